#pragma once

// Serial reference implementations of the first-stage estimators.
//
// These evaluate every (node, unit) pair directly through phi_D_hat /
// numerator_cf / phi_D_hat_directional with fresh exp() calls and no shared
// tables. They are slow and exist to check and benchmark the OpenMP kernels.

#include "crc/first_stage.hpp"
#include "crc/stage1_irregular.hpp"
#include "crc/stage1_regular.hpp"

namespace crc::reference {

/// Evaluates all nodes (negative ones included) directly.
FirstStageTarget first_stage_irregular(const DifferencedSample& sample, const IrregularConfig& config,
                                       const FrequencyGrid& grid);

/// Evaluates nodes u >= 0 directly and mirrors them, matching the kernel definition.
FirstStageTarget first_stage_regular(const StackedSample& sample, const RegularConfig& config,
                                     const FrequencyGrid& grid);

}  // namespace crc::reference
