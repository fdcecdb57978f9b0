#include "crc/panel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

#include "crc/error.hpp"
#include "crc/stats.hpp"

namespace crc {

PanelDataset::PanelDataset(std::vector<PanelRecord> records) : records_(std::move(records)) {
  std::unordered_map<std::string, std::set<int>> seen;
  for (const auto& r : records_) {
    if (!std::isfinite(r.outcome) || !std::isfinite(r.regressor)) {
      throw InputError("non-finite value for unit '" + r.unit_id + "' period " + std::to_string(r.period));
    }
    if (!seen[r.unit_id].insert(r.period).second) {
      throw InputError("duplicate (unit_id, period) = (" + r.unit_id + ", " + std::to_string(r.period) + ")");
    }
  }
  for (const auto& [id, periods] : seen) {
    if (*periods.rbegin() - *periods.begin() + 1 != static_cast<int>(periods.size())) {
      throw InputError("unit '" + id + "' is not observed on a contiguous period range");
    }
  }
}

std::vector<std::string> PanelDataset::units() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& r : records_) {
    if (seen.insert(r.unit_id).second) out.push_back(r.unit_id);
  }
  return out;
}

std::vector<int> PanelDataset::periods() const {
  std::set<int> p;
  for (const auto& r : records_) p.insert(r.period);
  return {p.begin(), p.end()};
}

void DifferencedSample::validate() const {
  if (x.size() != y.size()) throw InputError("differenced sample: y and x differ in length");
  if (!ids.empty() && ids.size() != y.size()) throw InputError("differenced sample: ids length mismatch");
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i]) || !std::isfinite(x[i])) throw InputError("differenced sample: non-finite value at row " + std::to_string(i));
  }
}

DifferencedSample DifferencedSample::subset(const std::vector<std::size_t>& index) const {
  DifferencedSample out;
  out.y.reserve(index.size());
  out.x.reserve(index.size());
  for (std::size_t i : index) {
    out.y.push_back(y[i]);
    out.x.push_back(x[i]);
    if (!ids.empty()) out.ids.push_back(ids[i]);
  }
  return out;
}

void StackedSample::validate() const {
  const std::size_t n = y1.size();
  if (y2.size() != n || x1.size() != n || x2.size() != n) throw InputError("stacked sample: column lengths differ");
  if (!ids.empty() && ids.size() != n) throw InputError("stacked sample: ids length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(y1[i]) || !std::isfinite(y2[i]) || !std::isfinite(x1[i]) || !std::isfinite(x2[i])) {
      throw InputError("stacked sample: non-finite value at row " + std::to_string(i));
    }
    if (x1[i] * x1[i] + x2[i] * x2[i] <= 0.0) {
      throw InputError("stacked sample: unit " + std::to_string(i) + " has X'X = 0");
    }
  }
}

StackedSample StackedSample::subset(const std::vector<std::size_t>& index) const {
  StackedSample out;
  for (std::size_t i : index) {
    out.y1.push_back(y1[i]);
    out.y2.push_back(y2[i]);
    out.x1.push_back(x1[i]);
    out.x2.push_back(x2[i]);
    if (!ids.empty()) out.ids.push_back(ids[i]);
  }
  return out;
}

namespace {

using UnitRows = std::map<int, const PanelRecord*>;

// Units in first-appearance order with their rows keyed by period.
std::vector<std::pair<std::string, UnitRows>> group_by_unit(const PanelDataset& panel) {
  std::vector<std::pair<std::string, UnitRows>> out;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& r : panel.records()) {
    auto [it, inserted] = slot.try_emplace(r.unit_id, out.size());
    if (inserted) out.emplace_back(r.unit_id, UnitRows{});
    out[it->second].second[r.period] = &r;
  }
  return out;
}

}  // namespace

DifferenceReport first_difference(const PanelDataset& panel, int period_from, int period_to) {
  DifferenceReport rep;
  for (const auto& [id, rows] : group_by_unit(panel)) {
    auto a = rows.find(period_from);
    auto b = rows.find(period_to);
    if (a == rows.end() || b == rows.end()) {
      ++rep.dropped_units;
      continue;
    }
    rep.sample.y.push_back(b->second->outcome - a->second->outcome);
    rep.sample.x.push_back(b->second->regressor - a->second->regressor);
    rep.sample.ids.push_back(id);
  }
  if (rep.sample.size() == 0) throw InputError("empty differenced sample");
  return rep;
}

StackReport stack_two_periods(const PanelDataset& panel) {
  const auto periods = panel.periods();
  if (periods.size() < 3) throw InputError("stacking needs at least three periods");
  return stack_two_periods(panel, periods.front());
}

StackReport stack_two_periods(const PanelDataset& panel, int start) {
  const auto periods = panel.periods();
  if (periods.size() < 3) throw InputError("stacking needs at least three periods");
  StackReport rep;
  for (const auto& [id, rows] : group_by_unit(panel)) {
    auto p0 = rows.find(start);
    auto p1 = rows.find(start + 1);
    auto p2 = rows.find(start + 2);
    if (p0 == rows.end() || p1 == rows.end() || p2 == rows.end()) {
      ++rep.dropped_missing;
      continue;
    }
    const double x1 = p1->second->regressor - p0->second->regressor;
    const double x2 = p2->second->regressor - p1->second->regressor;
    if (x1 == 0.0 && x2 == 0.0) {
      ++rep.dropped_static;
      continue;
    }
    rep.sample.y1.push_back(p1->second->outcome - p0->second->outcome);
    rep.sample.y2.push_back(p2->second->outcome - p1->second->outcome);
    rep.sample.x1.push_back(x1);
    rep.sample.x2.push_back(x2);
    rep.sample.ids.push_back(id);
  }
  if (rep.sample.size() == 0) throw InputError("empty stacked sample");
  return rep;
}

double tau_x_rule(const std::vector<double>& x, double c_tau, double kappa) {
  if (!(c_tau > 0.0)) throw InputError("c_tau must be positive");
  if (!(kappa > 0.0 && kappa < 0.5)) throw InputError("kappa must lie in (0, 0.5)");
  if (x.size() < 2) throw InputError("tau_x rule needs at least two observations");
  if (stats::sample_sd(x) <= 0.0) throw InputError("degenerate regressor");
  return c_tau * std::pow(static_cast<double>(x.size()), -kappa) * stats::robust_scale(x);
}

Partition split_stayers(const std::vector<double>& x, double tau_x) {
  if (!(tau_x > 0.0)) throw InputError("tau_x must be positive");
  Partition p;
  p.threshold = tau_x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    (std::abs(x[i]) < tau_x ? p.stayers : p.movers).push_back(i);
  }
  return p;
}

Partition partition_stayers(const DifferencedSample& sample, double tau_x) {
  Partition p = split_stayers(sample.x, tau_x);
  if (p.stayers.empty()) throw InputError("empty stayer set");
  if (p.movers.empty()) throw InputError("empty mover set");
  return p;
}

SupportBounds beta_support_bounds(const DifferencedSample& sample, double tau_x, double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) throw InputError("alpha must lie in (0, 0.5)");
  const Partition p = partition_stayers(sample, tau_x);
  std::vector<double> stayer_y;
  for (std::size_t i : p.stayers) stayer_y.push_back(sample.y[i]);
  SupportBounds b;
  b.d_lo = stats::quantile(stayer_y, alpha);
  b.d_hi = stats::quantile(stayer_y, 1.0 - alpha);
  std::vector<double> lower, upper;
  for (std::size_t i : p.movers) {
    const double y = sample.y[i];
    const double x = sample.x[i];
    const double a = (y - b.d_hi) / x;
    const double c = (y - b.d_lo) / x;
    lower.push_back(std::min(a, c));
    upper.push_back(std::max(a, c));
  }
  b.lo = stats::quantile(lower, 0.25);
  b.hi = stats::quantile(upper, 0.75);
  return b;
}

}  // namespace crc
