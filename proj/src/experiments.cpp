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

#include <pirhc/models.hpp>
#include <pirhc/scenario.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>

namespace pirhc {

using nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kLevelSetTag = 0x6C6576656CULL;
constexpr double kRiccatiSteps = 2000.0;

struct Instance {
  SdeModel model;
  CostSpec cost;
  std::optional<LqOracle> oracle;
  GammaCoupling gamma;
};

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::unique_ptr<Instance> build_instance(const ScenarioConfig& cfg) {
  auto inst = std::make_unique<Instance>();
  const auto& p = cfg.model.params;
  const CostSection& c = cfg.cost;
  const double T = c.horizon_seconds;
  const double dt = T / kRiccatiSteps;
  if (cfg.model.builtin == "lq_scalar") {
    inst->oracle = solve_riccati(scalar(p.at("a")), scalar(p.at("b")), scalar(p.at("sigma")), scalar(c.state_weight),
                                 scalar(c.terminal_weight), scalar(c.control_weight), T, dt);
  } else if (cfg.model.builtin == "lq_2d") {
    Matrix A(2, 2);
    A << 0.0, 1.0, 0.0, 0.0;
    Matrix B(2, 1);
    B << 0.0, 1.0;
    Matrix sigma(2, 1);
    sigma << 0.0, p.at("sigma");
    const Matrix I = Matrix::Identity(2, 2);
    inst->oracle = solve_riccati(A, B, sigma, c.state_weight * I, c.terminal_weight * I, scalar(c.control_weight), T, dt);
  }
  if (inst->oracle) {
    inst->model = inst->oracle->model();
    inst->cost = inst->oracle->cost();
  } else {
    inst->model = cubic_drift_model(p.at("sigma"));
    inst->cost = quadratic_cost(scalar(c.state_weight), scalar(c.terminal_weight), scalar(c.control_weight), T);
  }
  const int n = inst->model.state_dim;
  std::vector<Vector> probes{Vector::Zero(n), to_vector(cfg.rhc.x0)};
  for (int i = 0; i < n; ++i) probes.push_back(Vector::Unit(n, i));
  inst->gamma = fit_gamma(inst->model, inst->cost, probes, c.assumption4_tolerance);
  return inst;
}

PiConfig pi_config(const PiSection& s) { return PiConfig{s.rollouts, s.dt2_seconds, s.r_seconds, s.weight_floor}; }

RhcConfig rhc_config(const RhcSection& s) { return RhcConfig{s.dt1_seconds, s.dt_sim_seconds, s.t_end_seconds}; }

ErrorInjector injector_of(const InjectorSection& s) {
  ErrorInjector e;
  e.kind = injector_kind_from_string(s.kind);
  e.epsilon = s.epsilon;
  e.sigma_scale = s.sigma_scale;
  e.direction_mode = s.direction == "fixed"             ? DirectionMode::fixed
                     : s.direction == "random_per_call" ? DirectionMode::random_per_call
                                                        : DirectionMode::against_nominal;
  e.fixed_direction = to_vector(s.fixed_direction);
  return e;
}

BaseControllerFactory factory_of(const ScenarioConfig& cfg, const Instance& inst) {
  if (cfg.rhc.controller == "oracle") {
    BaseController base = oracle_controller(*inst.oracle);
    return [base](std::size_t) { return base; };
  }
  inst.gamma.require_certified();
  const PiConfig pc = pi_config(cfg.pi);
  const std::uint64_t seed = cfg.seed;
  return [&inst, pc, seed](std::size_t realization) {
    return path_integral_controller(inst.model, inst.cost, inst.gamma, pc, seed, realization);
  };
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }

ordered_json vector_json(const Vector& v) {
  ordered_json j = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

ordered_json matrix_json(const Matrix& m) {
  ordered_json j = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) j.push_back(vector_json(m.row(r).transpose()));
  return j;
}

std::vector<std::string> indexed(const std::string& prefix, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

Table moments_table(const MomentCurve* curve) {
  Table t{{"t", "moment", "stderr"}, {}};
  if (!curve) return t;
  for (std::size_t j = 0; j < curve->times.size(); ++j) {
    t.rows.push_back({fmt(curve->times[j]), fmt(curve->moments[j]), fmt(curve->std_errors[j])});
  }
  return t;
}

Table controls_table(int m, const std::vector<ControlRecord>* log) {
  Table t;
  t.header.push_back("t_k");
  for (auto& h : indexed("u_hat_", m)) t.header.push_back(h);
  for (auto& h : indexed("u_applied_", m)) t.header.push_back(h);
  t.header.push_back("ess");
  t.header.push_back("n_failed");
  if (!log) return t;
  for (const ControlRecord& r : *log) {
    std::vector<std::string> row{fmt(r.t)};
    for (int i = 0; i < m; ++i) row.push_back(fmt(r.nominal[i]));
    for (int i = 0; i < m; ++i) row.push_back(fmt(r.applied[i]));
    row.push_back(fmt(r.ess));
    row.push_back(fmt(r.n_failed));
    t.rows.push_back(std::move(row));
  }
  return t;
}

ordered_json decay_json(const DecayFitCI& d) {
  return {{"rate", d.fit.rate},
          {"rate_ci", {d.rate_lo, d.rate_hi}},
          {"plateau", d.fit.plateau},
          {"plateau_ci", {d.plateau_lo, d.plateau_hi}},
          {"transient_window", {d.transient.begin, d.transient.end}},
          {"tail_window", {d.tail.begin, d.tail.end}}};
}

void sweep_tables(ScenarioResult& res, const std::vector<SweepRow>& rows, const char* parameter) {
  Table sweep{{parameter, "rate", "rate_lo", "rate_hi", "plateau", "plateau_lo", "plateau_hi"}, {}};
  Table long_moments{{parameter, "t", "moment", "stderr"}, {}};
  ordered_json jrows = ordered_json::array();
  for (const SweepRow& r : rows) {
    const DecayFitCI& d = r.decay;
    sweep.rows.push_back({fmt(r.parameter), fmt(d.fit.rate), fmt(d.rate_lo), fmt(d.rate_hi), fmt(d.fit.plateau),
                          fmt(d.plateau_lo), fmt(d.plateau_hi)});
    for (std::size_t j = 0; j < r.curve.times.size(); ++j) {
      long_moments.rows.push_back(
          {fmt(r.parameter), fmt(r.curve.times[j]), fmt(r.curve.moments[j]), fmt(r.curve.std_errors[j])});
    }
    ordered_json jr = decay_json(d);
    jr[parameter] = r.parameter;
    jrows.push_back(jr);
  }
  res.tables["sweep.csv"] = std::move(sweep);
  res.tables["sweep_moments.csv"] = std::move(long_moments);
  res.tables["moments.csv"] = moments_table(rows.empty() ? nullptr : &rows.front().curve);
  res.report["results"]["rows"] = jrows;
}

void oracle_check(const ScenarioConfig& cfg, const Instance& inst, ScenarioResult& res) {
  const Vector x = to_vector(cfg.rhc.x0);
  const Vector u_star = inst.oracle->control(x);
  const PiConfig pc = pi_config(cfg.pi);
  const int m = inst.model.control_dim;
  Table t;
  t.header = {"seed_index"};
  for (auto& h : indexed("u_hat_", m)) t.header.push_back(h);
  for (auto& h : indexed("u_star_", m)) t.header.push_back(h);
  t.header.insert(t.header.end(), {"relative_error", "ess", "n_failed"});
  std::size_t passes = 0;
  ordered_json errors = ordered_json::array();
  for (std::size_t k = 0; k < cfg.experiment.repeats; ++k) {
    const ControlEstimate est = estimate_control(inst.model, inst.cost, inst.gamma, x, pc, derive_seed(cfg.seed, {k}));
    const double rel = (est.u_hat - u_star).norm() / u_star.norm();
    if (rel <= cfg.experiment.tolerance) ++passes;
    errors.push_back(rel);
    std::vector<std::string> row{fmt(k)};
    for (int i = 0; i < m; ++i) row.push_back(fmt(est.u_hat[i]));
    for (int i = 0; i < m; ++i) row.push_back(fmt(u_star[i]));
    row.insert(row.end(), {fmt(rel), fmt(est.ess), fmt(est.n_failed)});
    t.rows.push_back(std::move(row));
  }
  res.tables["agreement.csv"] = std::move(t);
  const double needed = cfg.experiment.pass_fraction * static_cast<double>(cfg.experiment.repeats);
  res.report["results"] = {{"u_star", vector_json(u_star)},
                           {"relative_errors", errors},
                           {"passes", passes},
                           {"required_passes", std::ceil(needed - 1e-9)}};
  res.verdicts["control_agreement"] = static_cast<double>(passes) >= needed - 1e-9;
}

void clt(const ScenarioConfig& cfg, const Instance& inst, ScenarioResult& res) {
  std::vector<std::size_t> ns;
  for (double v : cfg.experiment.values) ns.push_back(static_cast<std::size_t>(v));
  const auto rows = variance_sweep(inst.model, inst.cost, inst.gamma, to_vector(cfg.rhc.x0), pi_config(cfg.pi), ns,
                                   cfg.experiment.repeats, cfg.seed);
  const int m = inst.model.control_dim;
  Table t{{"rollouts", "variance"}, {}};
  for (auto& h : indexed("mean_u_hat_", m)) t.header.push_back(h);
  std::vector<double> xs;
  std::vector<double> ys;
  for (const VarianceRow& r : rows) {
    std::vector<std::string> row{fmt(r.rollouts), fmt(r.variance)};
    for (int i = 0; i < m; ++i) row.push_back(fmt(r.mean_u_hat[i]));
    t.rows.push_back(std::move(row));
    xs.push_back(static_cast<double>(r.rollouts));
    ys.push_back(r.variance);
  }
  res.tables["clt.csv"] = std::move(t);
  const double slope = rows.size() >= 2 ? loglog_slope(xs, ys) : std::numeric_limits<double>::quiet_NaN();
  res.report["results"] = {{"loglog_slope", slope}, {"slope_band", {-1.25, -0.75}}, {"variances", ys}};
  res.verdicts["clt_slope"] = slope >= -1.25 && slope <= -0.75;
}

void bias(const ScenarioConfig& cfg, const Instance& inst, ScenarioResult& res) {
  const Vector x = to_vector(cfg.rhc.x0);
  std::vector<PiConfig> configs;
  for (double dt2 : cfg.experiment.values) {
    PiConfig pc = pi_config(cfg.pi);
    pc.dt2 = dt2;
    if (cfg.experiment.window_steps) pc.r = static_cast<double>(*cfg.experiment.window_steps) * dt2;
    configs.push_back(pc);
  }
  const Vector u_star = inst.oracle->control(x);
  auto rows = bias_sweep(inst.model, inst.cost, inst.gamma, x, configs, cfg.experiment.repeats, cfg.seed, u_star);
  const int m = inst.model.control_dim;
  Table t{{"dt2_seconds", "r_seconds", "mean_error", "std_error"}, {}};
  for (auto& h : indexed("mean_u_hat_", m)) t.header.push_back(h);
  for (const BiasRow& r : rows) {
    std::vector<std::string> row{fmt(r.dt2), fmt(r.r), fmt(r.mean_error), fmt(r.std_error)};
    for (int i = 0; i < m; ++i) row.push_back(fmt(r.mean_u_hat[i]));
    t.rows.push_back(std::move(row));
  }
  res.tables["bias.csv"] = std::move(t);

  std::sort(rows.begin(), rows.end(), [](const BiasRow& a, const BiasRow& b) { return a.dt2 > b.dt2; });
  bool non_increasing = true;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const BiasRow& prev = rows[k - 1];
    const BiasRow& cur = rows[k];
    const bool overlap = cur.mean_error - 2.0 * cur.std_error <= prev.mean_error + 2.0 * prev.std_error;
    if (cur.mean_error > prev.mean_error && !overlap) non_increasing = false;
  }
  const double ratio = rows.back().mean_error / rows.front().mean_error;
  res.report["results"] = {{"u_star", vector_json(u_star)}, {"finest_to_coarsest_ratio", ratio}};
  res.verdicts["bias_non_increasing"] = non_increasing;
  res.verdicts["bias_shrinks"] = ratio <= 1.0 / 3.0;
}

void closed_loop(const ScenarioConfig& cfg, const Instance& inst, ScenarioResult& res) {
  const RhcConfig rhc = rhc_config(cfg.rhc);
  const Vector x0 = to_vector(cfg.rhc.x0);
  const auto runs = run_realizations(inst.model, factory_of(cfg, inst), injector_of(cfg.injector), rhc, x0, cfg.seed,
                                     cfg.realizations);
  std::vector<Trajectory> trajs;
  trajs.reserve(runs.size());
  for (const RhcRun& r : runs) trajs.push_back(r.trajectory);
  const double p = cfg.stability.p;
  const MomentCurve curve = estimate_moments(trajs, p, cfg.seed);
  const DecayFitCI decay = fit_decay_rate_bootstrap(curve.times, moment_samples(trajs, p), cfg.seed);
  res.tables["moments.csv"] = moments_table(&curve);
  res.tables["controls.csv"] = controls_table(inst.model.control_dim, &runs.front().log);

  ordered_json results = {{"decay", decay_json(decay)}};
  res.verdicts["rate_positive"] = decay.rate_ci_excludes_zero();
  if (inst.oracle) {
    const LqOracle& o = *inst.oracle;
    const StabilitySection& s = cfg.stability;
    const double m_delta =
        estimate_level_set(inst.model, inst.cost, inst.gamma, s.delta, s.n_sphere, s.sphere_rollouts,
                           s.sphere_dt2_seconds, derive_seed(cfg.seed, {kLevelSetTag}));
    const double c4 = o.c4();
    const double c5 = o.c5_zero_control();
    const EnvelopeCheck env = check_envelope(curve, c4, c5, s.delta, decay.fit.rate, x0.norm(), m_delta);
    const double t_limit =
        decay.fit.rate > 0.0 ? std::min(rhc.t_end, s.hit_time_factor / decay.fit.rate) : rhc.t_end;
    const LevelSetStats level = level_set_statistics(
        trajs, [&o](const Vector& x) { return o.value(x); }, m_delta, s.level_slack, t_limit);
    results["oracle"] = {{"P0", matrix_json(o.P0())},
                         {"value_offset", o.value_offset()},
                         {"analytic_rate", o.second_moment_rate()},
                         {"c4", c4},
                         {"c5", c5}};
    results["envelope"] = {{"holds", env.holds}, {"worst_margin", env.worst_margin}, {"worst_time", curve.times[env.worst_index]}};
    results["level_set"] = {{"m_delta", m_delta},
                            {"delta", s.delta},
                            {"hit_time_limit", t_limit},
                            {"hit_fraction", level.hit_fraction},
                            {"residence_fraction", level.residence_fraction},
                            {"post_hit_steps", level.post_hit_steps}};
    res.verdicts["envelope"] = env.holds;
    res.verdicts["hit"] = level.hit_fraction == 1.0;
    res.verdicts["residence"] = level.residence_fraction >= 0.99;
  }
  double min_ess = std::numeric_limits<double>::infinity();
  std::size_t failed = 0;
  for (const RhcRun& r : runs) {
    for (const ControlRecord& c : r.log) {
      min_ess = std::min(min_ess, c.ess);
      failed += c.n_failed;
    }
  }
  results["controller"] = {{"min_ess", min_ess}, {"total_failed_rollouts", failed}};
  res.report["results"] = results;
}

void injector_sweep(const ScenarioConfig& cfg, const Instance& inst, ScenarioResult& res, bool gaussian) {
  std::vector<ErrorInjector> family;
  const ErrorInjector base = injector_of(cfg.injector);
  for (double v : cfg.experiment.values) {
    ErrorInjector e = base;
    if (e.kind != InjectorKind::mixed) e.kind = gaussian ? InjectorKind::gaussian : InjectorKind::deterministic;
    (gaussian ? e.sigma_scale : e.epsilon) = v;
    e.covariance.reset();
    family.push_back(e);
  }
  const auto rows = robustness_sweep(inst.model, factory_of(cfg, inst), family, cfg.experiment.values,
                                     rhc_config(cfg.rhc), to_vector(cfg.rhc.x0), cfg.realizations, cfg.seed,
                                     cfg.stability.p);
  sweep_tables(res, rows, gaussian ? "sigma_scale" : "epsilon");
  if (gaussian) {
    res.verdicts["plateaus_non_decreasing"] = plateaus_non_decreasing(rows);
  } else {
    res.verdicts["rates_non_increasing"] = rates_non_increasing(rows);
    res.verdicts["first_rate_is_max"] = first_rate_is_max(rows);
  }
}

void hold(const ScenarioConfig& cfg, const Instance& inst, ScenarioResult& res) {
  const RhcConfig rhc = rhc_config(cfg.rhc);
  const auto factory = factory_of(cfg, inst);
  const Vector x0 = to_vector(cfg.rhc.x0);
  const auto rows =
      hold_sweep(inst.model, factory, cfg.experiment.values, rhc, x0, cfg.realizations, cfg.seed, cfg.stability.p);
  const double continuous_dt1[] = {rhc.dt_sim};
  const auto baseline =
      hold_sweep(inst.model, factory, continuous_dt1, rhc, x0, cfg.realizations, cfg.seed, cfg.stability.p);
  sweep_tables(res, rows, "dt1_seconds");
  const auto finest = std::min_element(rows.begin(), rows.end(),
                                       [](const SweepRow& a, const SweepRow& b) { return a.parameter < b.parameter; });
  const double continuous_rate = baseline.front().decay.fit.rate;
  res.report["results"]["continuous_feedback"] = decay_json(baseline.front().decay);
  res.report["results"]["quarter_rate_threshold"] = continuous_rate / 4.0;
  std::vector<SweepRow> ordered = rows;
  std::sort(ordered.begin(), ordered.end(),
            [](const SweepRow& a, const SweepRow& b) { return a.parameter < b.parameter; });
  res.verdicts["rates_non_increasing"] = rates_non_increasing(ordered);
  res.verdicts["hold_quarter_rate"] = finest->decay.fit.rate >= continuous_rate / 4.0;
}

void sandwich(const ScenarioConfig& cfg, const Instance& inst, ScenarioResult& res) {
  const LqOracle& o = *inst.oracle;
  const int n = inst.model.state_dim;
  std::vector<Vector> points;
  for (double v : cfg.experiment.values) points.push_back(v * Vector::Unit(n, 0));
  const double c4 = o.c4();
  const double c5 = o.c5_zero_control();
  const auto rows = check_value_sandwich(inst.model, inst.cost, inst.gamma, points, c4, c5, cfg.pi.rollouts,
                                         cfg.pi.dt2_seconds, cfg.seed);
  Table t{{"x_norm", "v_hat", "std_err", "lower", "upper", "v_oracle", "holds"}, {}};
  bool all = true;
  for (const SandwichRow& r : rows) {
    t.rows.push_back({fmt(r.x.norm()), fmt(r.v_hat), fmt(r.std_err), fmt(r.lower), fmt(r.upper), fmt(o.value(r.x)),
                      r.holds ? "1" : "0"});
    all = all && r.holds;
  }
  res.tables["sandwich.csv"] = std::move(t);
  res.report["results"] = {{"c4", c4}, {"c5", c5}, {"c5_from_value", o.c5_from_value()}};
  res.verdicts["sandwich"] = all;
}

std::string error_type(const std::exception& e) {
  if (dynamic_cast<const NumericalBlowUp*>(&e)) return "numerical_blow_up";
  if (dynamic_cast<const Assumption4Violated*>(&e)) return "assumption4_violated";
  if (dynamic_cast<const DegenerateWeights*>(&e)) return "degenerate_weights";
  if (dynamic_cast<const AllRolloutsFailed*>(&e)) return "all_rollouts_failed";
  if (dynamic_cast<const GainRankFailure*>(&e)) return "gain_rank_failure";
  if (dynamic_cast<const GridMismatch*>(&e)) return "grid_mismatch";
  if (dynamic_cast<const RiccatiSolveFailed*>(&e)) return "riccati_solve_failed";
  if (dynamic_cast<const NoTransientDetected*>(&e)) return "no_transient_detected";
  if (dynamic_cast<const InvalidArgument*>(&e)) return "invalid_argument";
  return "runtime_error";
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace

ScenarioResult run_experiment(const ScenarioConfig& resolved) {
  ScenarioResult res;
  res.report["config"] = emit_config(resolved);
  const auto inst = build_instance(resolved);
  res.report["gamma"] = {{"gamma", inst->gamma.gamma},
                         {"residual_norm", inst->gamma.residual_norm},
                         {"certified", inst->gamma.certified()}};
  res.report["results"] = ordered_json::object();
  res.tables["moments.csv"] = moments_table(nullptr);
  res.tables["controls.csv"] = controls_table(inst->model.control_dim, nullptr);

  const std::string& kind = resolved.experiment.kind;
  if (kind == "oracle_check") oracle_check(resolved, *inst, res);
  else if (kind == "clt_sweep") clt(resolved, *inst, res);
  else if (kind == "bias_sweep") bias(resolved, *inst, res);
  else if (kind == "closed_loop") closed_loop(resolved, *inst, res);
  else if (kind == "epsilon_sweep") injector_sweep(resolved, *inst, res, false);
  else if (kind == "gaussian_sweep") injector_sweep(resolved, *inst, res, true);
  else if (kind == "hold_sweep") hold(resolved, *inst, res);
  else if (kind == "sandwich") sandwich(resolved, *inst, res);

  ordered_json verdicts = ordered_json::object();
  res.all_passed = true;
  for (const std::string& name : resolved.verdicts) {
    const auto it = res.verdicts.find(name);
    const bool ok = it != res.verdicts.end() && it->second;
    verdicts[name] = ok;
    res.all_passed = res.all_passed && ok;
  }
  ordered_json informational = ordered_json::object();
  for (const auto& [name, ok] : res.verdicts) {
    if (!verdicts.contains(name)) informational[name] = ok;
  }
  res.report["verdicts"] = verdicts;
  res.report["informational_verdicts"] = informational;
  res.report["all_passed"] = res.all_passed;
  res.report["status"] = "ok";
  res.report["error"] = nullptr;
  return res;
}

int run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& output_dir) {
  const ScenarioConfig resolved = resolve(cfg);
  std::filesystem::create_directories(output_dir);
  ScenarioResult res;
  int code = 0;
  try {
    res = run_experiment(resolved);
    code = res.all_passed ? 0 : 3;
  } catch (const std::exception& e) {
    ordered_json report;
    report["config"] = emit_config(resolved);
    report["status"] = "error";
    report["error"] = {{"type", error_type(e)}, {"message", e.what()}};
    write_file(output_dir / "report.json", report.dump(2) + "\n");
    return 1;
  }
  for (const auto& [name, table] : res.tables) write_file(output_dir / name, to_csv(table));
  if (resolved.plots) {
    ordered_json plots = ordered_json::array();
    for (const auto& file : write_plots(output_dir)) plots.push_back(file);
    res.report["plots"] = plots;
  }
  write_file(output_dir / "report.json", res.report.dump(2) + "\n");
  return code;
}

}  // namespace pirhc
