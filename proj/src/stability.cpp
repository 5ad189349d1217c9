// Copyright 2026 The pirhc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pirhc/stability.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pirhc {

namespace {

constexpr std::uint64_t kBootstrapTag = 0x626F6F74ULL;

// Row indices of one bootstrap resample.
std::vector<std::size_t> resample_rows(NormalSource& rng, std::size_t rows) {
  std::vector<std::size_t> idx(rows);
  for (auto& i : idx) i = std::min(rows - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(rows)));
  return idx;
}

std::vector<double> column_means(const Matrix& samples, const std::vector<std::size_t>* rows) {
  const Eigen::Index cols = samples.cols();
  std::vector<double> mean(static_cast<std::size_t>(cols), 0.0);
  const std::size_t n = rows ? rows->size() : static_cast<std::size_t>(samples.rows());
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = static_cast<Eigen::Index>(rows ? (*rows)[r] : r);
    for (Eigen::Index c = 0; c < cols; ++c) mean[static_cast<std::size_t>(c)] += samples(row, c);
  }
  for (double& m : mean) m /= static_cast<double>(n);
  return mean;
}

double percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

bool overlaps(double lo_a, double hi_a, double lo_b, double hi_b) { return lo_a <= hi_b && lo_b <= hi_a; }

}  // namespace

Matrix moment_samples(std::span<const Trajectory> realizations, double p) {
  if (realizations.empty()) throw InvalidArgument("estimate_moments: empty realization set");
  const std::size_t grid = realizations.front().states.size();
  Matrix out(static_cast<Eigen::Index>(realizations.size()), static_cast<Eigen::Index>(grid));
  for (std::size_t r = 0; r < realizations.size(); ++r) {
    const Trajectory& traj = realizations[r];
    if (traj.states.size() != grid) throw GridMismatch("estimate_moments: realizations do not share the time grid");
    for (std::size_t j = 0; j < grid; ++j) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = std::pow(traj.states[j].norm(), p);
    }
  }
  return out;
}

MomentCurve estimate_moments(std::span<const Trajectory> realizations, double p, std::uint64_t seed,
                             std::size_t resamples) {
  const Matrix samples = moment_samples(realizations, p);
  MomentCurve curve;
  curve.p = p;
  curve.times = realizations.front().times;
  curve.moments = column_means(samples, nullptr);
  const std::size_t grid = curve.moments.size();
  std::vector<double> sum(grid, 0.0);
  std::vector<double> sum_sq(grid, 0.0);
  NormalSource rng(NoiseStream{derive_seed(seed, {kBootstrapTag}), 0});
  for (std::size_t b = 0; b < resamples; ++b) {
    const auto rows = resample_rows(rng, static_cast<std::size_t>(samples.rows()));
    const auto mean = column_means(samples, &rows);
    for (std::size_t j = 0; j < grid; ++j) {
      sum[j] += mean[j];
      sum_sq[j] += mean[j] * mean[j];
    }
  }
  curve.std_errors.assign(grid, 0.0);
  if (resamples > 1) {
    const double nb = static_cast<double>(resamples);
    for (std::size_t j = 0; j < grid; ++j) {
      const double var = (sum_sq[j] - sum[j] * sum[j] / nb) / (nb - 1.0);
      curve.std_errors[j] = std::sqrt(std::max(0.0, var));
    }
  }
  return curve;
}

DecayFit fit_decay_rate(std::span<const double> times, std::span<const double> moments, FitWindow transient,
                        FitWindow tail) {
  if (times.size() != moments.size()) throw InvalidArgument("fit_decay_rate: times and moments differ in length");
  if (transient.end > moments.size() || tail.end > moments.size()) throw InvalidArgument("fit_decay_rate: window");
  if (transient.size() < 5 || tail.size() < 5) throw InvalidArgument("fit_decay_rate: windows need >= 5 points");
  if (transient.end > tail.begin && tail.end > transient.begin) throw InvalidArgument("fit_decay_rate: windows overlap");

  DecayFit fit;
  double tail_sum = 0.0;
  for (std::size_t j = tail.begin; j < tail.end; ++j) tail_sum += moments[j];
  fit.plateau = tail_sum / static_cast<double>(tail.size());

  double scale = 0.0;
  bool any_excess = false;
  for (std::size_t j = transient.begin; j < transient.end; ++j) {
    const double excess = moments[j] - fit.plateau;
    any_excess = any_excess || excess > 0.0;
    scale = std::max(scale, std::abs(excess));
  }
  if (!any_excess) throw NoTransientDetected("no transient detected: moments never exceed the plateau");
  const double floor = 1e-12 * scale;

  double mean_t = 0.0;
  double mean_y = 0.0;
  const double n = static_cast<double>(transient.size());
  std::vector<double> ys(transient.size());
  for (std::size_t j = transient.begin; j < transient.end; ++j) {
    ys[j - transient.begin] = std::log(std::max(moments[j] - fit.plateau, floor));
    mean_t += times[j];
    mean_y += ys[j - transient.begin];
  }
  mean_t /= n;
  mean_y /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t j = transient.begin; j < transient.end; ++j) {
    const double dt = times[j] - mean_t;
    sxy += dt * (ys[j - transient.begin] - mean_y);
    sxx += dt * dt;
  }
  fit.rate = -sxy / sxx;
  return fit;
}

std::pair<FitWindow, FitWindow> choose_windows(std::span<const double> moments) {
  const std::size_t grid = moments.size();
  if (grid < 10) throw InvalidArgument("choose_windows: need at least 10 grid points");
  const std::size_t tail_len = std::max<std::size_t>(5, grid / 4);
  const FitWindow tail{grid - tail_len, grid};
  double plateau = 0.0;
  for (std::size_t j = tail.begin; j < tail.end; ++j) plateau += moments[j];
  plateau /= static_cast<double>(tail_len);
  const double initial = moments.front() - plateau;
  if (!(initial > 0.0)) throw NoTransientDetected("no transient detected: initial moment at or below the plateau");
  std::size_t end = 1;
  while (end < tail.begin && moments[end] - plateau >= 0.1 * initial) ++end;
  end = std::clamp<std::size_t>(end, std::min<std::size_t>(5, tail.begin), tail.begin);
  return {FitWindow{0, end}, tail};
}

DecayFitCI fit_decay_rate_bootstrap(std::span<const double> times, const Matrix& samples, std::uint64_t seed,
                                    std::size_t resamples) {
  const std::vector<double> mean = column_means(samples, nullptr);
  const auto [transient, tail] = choose_windows(mean);
  DecayFitCI out;
  out.transient = transient;
  out.tail = tail;
  out.fit = fit_decay_rate(times, mean, transient, tail);

  std::vector<double> rates;
  std::vector<double> plateaus;
  rates.reserve(resamples);
  plateaus.reserve(resamples);
  NormalSource rng(NoiseStream{derive_seed(seed, {kBootstrapTag, 1}), 0});
  for (std::size_t b = 0; b < resamples; ++b) {
    const auto rows = resample_rows(rng, static_cast<std::size_t>(samples.rows()));
    const auto resampled = column_means(samples, &rows);
    try {
      const DecayFit f = fit_decay_rate(times, resampled, transient, tail);
      rates.push_back(f.rate);
      plateaus.push_back(f.plateau);
    } catch (const NoTransientDetected&) {
      rates.push_back(0.0);
    }
  }
  if (rates.empty()) {
    out.rate_lo = out.rate_hi = out.fit.rate;
    out.plateau_lo = out.plateau_hi = out.fit.plateau;
    return out;
  }
  out.rate_lo = percentile(rates, 0.025);
  out.rate_hi = percentile(rates, 0.975);
  if (!plateaus.empty()) {
    out.plateau_lo = percentile(plateaus, 0.025);
    out.plateau_hi = percentile(plateaus, 0.975);
  }
  return out;
}

std::vector<Vector> sphere_points(int dim, std::size_t n_sphere, double delta, std::uint64_t seed) {
  if (!(delta > 0.0)) throw InvalidArgument("sphere_points: delta must be positive");
  if (dim <= 0) throw InvalidArgument("sphere_points: dimension must be positive");
  std::vector<Vector> pts;
  if (dim == 1) {
    pts.push_back(Vector::Constant(1, -delta));
    pts.push_back(Vector::Constant(1, delta));
    return pts;
  }
  if (n_sphere == 0) throw InvalidArgument("sphere_points: need at least one point");
  if (dim == 2) {
    for (std::size_t k = 0; k < n_sphere; ++k) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_sphere);
      Vector x(2);
      x << delta * std::cos(angle), delta * std::sin(angle);
      pts.push_back(x);
    }
    return pts;
  }
  NormalSource rng(NoiseStream{seed, 0});
  for (std::size_t k = 0; k < n_sphere; ++k) {
    Vector x(dim);
    for (int i = 0; i < dim; ++i) x[i] = rng.normal();
    pts.push_back(delta * x / x.norm());
  }
  return pts;
}

double estimate_level_set(const SdeModel& model, const CostSpec& cost, const GammaCoupling& gamma, double delta,
                          std::size_t n_sphere, std::size_t rollouts, double dt2, std::uint64_t seed) {
  const auto pts = sphere_points(model.state_dim, n_sphere, delta, seed);
  double level = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const ValueEstimate v = estimate_value(model, cost, gamma, pts[k], rollouts, dt2, derive_seed(seed, {k}));
    level = std::max(level, v.v_hat + 3.0 * v.std_err);
  }
  return level;
}

LevelSetStats level_set_statistics(std::span<const Trajectory> realizations, const ValueFunction& v, double level,
                                   double slack, double t_limit) {
  if (realizations.empty()) throw InvalidArgument("level_set_statistics: empty realization set");
  LevelSetStats stats;
  std::size_t hits = 0;
  std::size_t inside = 0;
  for (const Trajectory& traj : realizations) {
    std::size_t hit = traj.states.size();
    for (std::size_t j = 0; j < traj.states.size(); ++j) {
      if (v(traj.states[j]) < level) {
        hit = j;
        break;
      }
    }
    if (hit == traj.states.size()) continue;
    if (traj.times[hit] <= t_limit) ++hits;
    for (std::size_t j = hit; j < traj.states.size(); ++j) {
      ++stats.post_hit_steps;
      if (v(traj.states[j]) < level * slack) ++inside;
    }
  }
  stats.hit_fraction = static_cast<double>(hits) / static_cast<double>(realizations.size());
  stats.residence_fraction =
      stats.post_hit_steps > 0 ? static_cast<double>(inside) / static_cast<double>(stats.post_hit_steps) : 0.0;
  return stats;
}

EnvelopeCheck check_envelope(const MomentCurve& curve, double c4, double c5, double delta, double rate, double x0_norm,
                             double m_delta) {
  const double beta = c5 * (1.0 + std::pow(delta, -curve.p));
  const double x0p = std::pow(x0_norm, curve.p);
  EnvelopeCheck out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < curve.moments.size(); ++j) {
    const double bound = (beta * std::exp(-rate * curve.times[j]) * x0p + m_delta) / c4;
    const double margin = bound + 3.0 * curve.std_errors[j] - curve.moments[j];
    if (margin < out.worst_margin) {
      out.worst_margin = margin;
      out.worst_index = j;
    }
  }
  out.holds = out.worst_margin >= 0.0;
  return out;
}

std::vector<SandwichRow> check_value_sandwich(const SdeModel& model, const CostSpec& cost, const GammaCoupling& gamma,
                                              std::span<const Vector> points, double c4, double c5,
                                              std::size_t rollouts, double dt2, std::uint64_t seed) {
  std::vector<SandwichRow> rows;
  rows.reserve(points.size());
  for (std::size_t k = 0; k < points.size(); ++k) {
    const ValueEstimate v = estimate_value(model, cost, gamma, points[k], rollouts, dt2, derive_seed(seed, {k}));
    SandwichRow row;
    row.x = points[k];
    row.v_hat = v.v_hat;
    row.std_err = v.std_err;
    const double xp = std::pow(points[k].norm(), cost.growth_p);
    row.lower = c4 * xp;
    row.upper = c5 * (1.0 + xp);
    row.holds = row.v_hat + 3.0 * row.std_err >= row.lower && row.v_hat - 3.0 * row.std_err <= row.upper;
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

SweepRow analyze_batch(double parameter, const std::vector<RhcRun>& runs, double p, std::uint64_t seed) {
  std::vector<Trajectory> trajs;
  trajs.reserve(runs.size());
  for (const RhcRun& r : runs) trajs.push_back(r.trajectory);
  SweepRow row;
  row.parameter = parameter;
  row.curve = estimate_moments(trajs, p, seed);
  try {
    row.decay = fit_decay_rate_bootstrap(row.curve.times, moment_samples(trajs, p), seed);
  } catch (const NoTransientDetected&) {
    // The moment never decays (e.g. a large injected error drives the loop
    // outward): report rate 0 and the tail mean as plateau.
    const std::size_t n = row.curve.moments.size();
    const std::size_t begin = n - std::max<std::size_t>(1, n / 4);
    double tail = 0.0;
    for (std::size_t j = begin; j < n; ++j) tail += row.curve.moments[j];
    tail /= static_cast<double>(n - begin);
    row.decay.fit = DecayFit{0.0, tail};
    row.decay.plateau_lo = row.decay.plateau_hi = tail;
    row.decay.tail = FitWindow{begin, n};
  }
  return row;
}

}  // namespace

std::vector<SweepRow> robustness_sweep(const SdeModel& model, const BaseControllerFactory& make_base,
                                       std::span<const ErrorInjector> family, std::span<const double> parameters,
                                       const RhcConfig& rhc, const Vector& x0, std::size_t realizations,
                                       std::uint64_t seed, double p) {
  if (family.size() != parameters.size()) throw InvalidArgument("robustness_sweep: one parameter per injector");
  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < family.size(); ++k) {
    const auto runs = run_realizations(model, make_base, family[k], rhc, x0, seed, realizations);
    rows.push_back(analyze_batch(parameters[k], runs, p, seed));
  }
  return rows;
}

std::vector<SweepRow> hold_sweep(const SdeModel& model, const BaseControllerFactory& make_base,
                                 std::span<const double> dt1_values, const RhcConfig& base_rhc, const Vector& x0,
                                 std::size_t realizations, std::uint64_t seed, double p) {
  std::vector<SweepRow> rows;
  const ErrorInjector none;
  for (double dt1 : dt1_values) {
    RhcConfig rhc = base_rhc;
    rhc.dt1 = dt1;
    const auto runs = run_realizations(model, make_base, none, rhc, x0, seed, realizations);
    rows.push_back(analyze_batch(dt1, runs, p, seed));
  }
  return rows;
}

bool rates_non_increasing(std::span<const SweepRow> rows) {
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const DecayFitCI& prev = rows[k - 1].decay;
    const DecayFitCI& cur = rows[k].decay;
    if (cur.fit.rate > prev.fit.rate && !overlaps(prev.rate_lo, prev.rate_hi, cur.rate_lo, cur.rate_hi)) return false;
  }
  return true;
}

bool first_rate_is_max(std::span<const SweepRow> rows) {
  if (rows.empty()) return true;
  const DecayFitCI& first = rows.front().decay;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const DecayFitCI& cur = rows[k].decay;
    if (cur.fit.rate > first.fit.rate && !overlaps(first.rate_lo, first.rate_hi, cur.rate_lo, cur.rate_hi)) {
      return false;
    }
  }
  return true;
}

bool plateaus_non_decreasing(std::span<const SweepRow> rows) {
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const DecayFitCI& prev = rows[k - 1].decay;
    const DecayFitCI& cur = rows[k].decay;
    if (cur.fit.plateau < prev.fit.plateau &&
        !overlaps(prev.plateau_lo, prev.plateau_hi, cur.plateau_lo, cur.plateau_hi)) {
      return false;
    }
  }
  return true;
}

}  // namespace pirhc
