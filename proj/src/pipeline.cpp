#include "crc/pipeline.hpp"

namespace crc {

EstimationResult finish_estimate(FirstStageTarget target, int sieve_dimension, const std::vector<double>& eval_grid) {
  const NormalEquations eq = assemble_normal_equations(target, sieve_dimension);
  EstimationResult r;
  r.coefficients = solve_constrained(eq.omega, eq.v, constraint_vector(sieve_dimension));
  r.density = evaluate_and_postprocess(r.coefficients, eval_grid);
  r.target = std::move(target);
  return r;
}

EstimationResult estimate_irregular(const DifferencedSample& sample, const IrregularTuning& tuning,
                                    const FrequencyGrid& grid, const std::vector<double>& eval_grid) {
  FirstStageTarget target = first_stage_irregular(sample, tuning.first_stage, grid);
  EstimationResult r = finish_estimate(std::move(target), tuning.sieve_dimension, eval_grid);
  r.stayer_share = split_stayers(sample.x, tuning.first_stage.tau_x).stayer_share();
  return r;
}

EstimationResult estimate_regular(const StackedSample& sample, const RegularTuning& tuning,
                                  const FrequencyGrid& grid, const std::vector<double>& eval_grid) {
  FirstStageTarget target = first_stage_regular(sample, tuning.first_stage, grid);
  return finish_estimate(std::move(target), tuning.sieve_dimension, eval_grid);
}

}  // namespace crc
