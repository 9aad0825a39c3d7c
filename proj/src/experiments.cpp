#include "planecontrol/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "planecontrol/adjoint_bspde.hpp"
#include "planecontrol/control_solvers.hpp"
#include "planecontrol/csv.hpp"
#include "planecontrol/forward_spde.hpp"
#include "planecontrol/grid.hpp"
#include "planecontrol/plane_calculus.hpp"
#include "planecontrol/series_special.hpp"

namespace planecontrol {

namespace {

using nlohmann::json;

// Fully resolved settings of one run.
struct Settings {
  std::string name;
  int n_t = 32;
  int n_x = 32;
  double T = 1.0;
  double X = 1.0;
  bool X_auto = false;
  double alpha0 = 0.0;
  double beta0 = 0.0;
  double theta = 1.0;
  double y0 = 1.0;
  double eta = 3.0;
  int n_paths = 10000;
  std::uint64_t seed = 20240611;
  std::optional<double> tol;
  std::string out_dir;

  GridSpec grid() const { return GridSpec(T, X, n_t, n_x); }
  SeedSpec seed_spec() const { return {seed}; }
};

Settings defaults_for(const std::string& name) {
  Settings s;
  s.name = name;
  if (name == "sheet-check") {
    s.n_t = s.n_x = 16;
  } else if (name == "ibp") {
    s.alpha0 = 0.5;
    s.beta0 = 1.0;
  } else if (name == "positivity") {
    s.beta0 = 1.0;
  } else if (name == "negativity") {
    s.n_t = s.n_x = 64;
    s.beta0 = 1.0;
  } else if (name == "lq") {
    s.T = 0.5;
    s.X_auto = true;
    s.beta0 = 0.5;
  } else if (name == "harvest") {
    s.n_t = s.n_x = 16;
    s.alpha0 = 0.1;
    s.beta0 = 0.5;
  }
  return s;
}

Settings resolve(const ExperimentConfig& c) {
  Settings s = defaults_for(c.experiment);
  if (c.n_t) s.n_t = *c.n_t;
  if (c.n_x) s.n_x = *c.n_x;
  if (c.T) s.T = *c.T;
  if (c.X) {
    s.X = *c.X;
    s.X_auto = false;
  }
  if (c.alpha0) s.alpha0 = *c.alpha0;
  if (c.beta0) s.beta0 = *c.beta0;
  if (c.theta) s.theta = *c.theta;
  if (c.y0) s.y0 = *c.y0;
  if (c.eta) s.eta = *c.eta;
  if (c.n_paths) s.n_paths = *c.n_paths;
  if (c.seed) s.seed = *c.seed;
  s.tol = c.tol;
  s.out_dir = c.out_dir;
  return s;
}

json settings_json(const Settings& s) {
  json j;
  j["experiment"] = s.name;
  j["grid_nt"] = s.n_t;
  j["grid_nx"] = s.n_x;
  j["T"] = s.T;
  j["X"] = s.X;
  j["X_auto"] = s.X_auto;
  j["alpha0"] = s.alpha0;
  j["beta0"] = s.beta0;
  j["theta"] = s.theta;
  j["y0"] = s.y0;
  j["eta"] = s.eta;
  j["paths"] = s.n_paths;
  j["seed"] = s.seed;
  j["tol"] = s.tol ? json(*s.tol) : json(nullptr);
  return j;
}

std::string point_name(Point p) { return "(" + csv_number(p.t) + ";" + csv_number(p.x) + ")"; }

// Output sink for optional artifacts.
class Artifacts {
 public:
  explicit Artifacts(std::string dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }
  bool enabled() const { return !dir_.empty(); }
  std::ofstream open(const std::string& file) const {
    std::ofstream out(std::filesystem::path(dir_) / file);
    if (!out) throw std::runtime_error("cannot write " + file);
    return out;
  }

 private:
  std::string dir_;
};

// ---------------------------------------------------------------------------

std::vector<ReportRow> run_sheet_check(const Settings& s, const Artifacts& art) {
  const GridSpec g = s.grid();
  std::vector<SheetPath> paths;
  paths.reserve(s.n_paths);
  for (int k = 0; k < s.n_paths; ++k) paths.push_back(sample_sheet(g, s.seed_spec(), k));
  const double T = g.T();
  const double X = g.X();
  const std::vector<std::pair<Point, Point>> pairs{
      {{T, X}, {T, X}},
      {{0.5 * T, X}, {T, X}},
      {{0.5 * T, 0.5 * X}, {0.25 * T, X}},
      {{0.25 * T, 0.75 * X}, {0.75 * T, 0.25 * X}},
      {{0.5 * T, 0.5 * X}, {0.5 * T, 0.5 * X}},
      {{T, 0.5 * X}, {0.375 * T, 0.875 * X}}};
  std::vector<ReportRow> rows;
  for (const auto& [a, b] : pairs) {
    const CovarianceEstimate c = empirical_covariance(paths, a, b);
    const double target = std::min(a.t, b.t) * std::min(a.x, b.x);
    rows.push_back(target_row("cov" + point_name(a) + point_name(b), c.covariance, target,
                              5.0 * c.std_error, c.std_error));
  }
  // Rectangle-increment identity on the first path, all index pairs.
  const SheetPath& p0 = paths.front();
  double worst = 0.0;
  for (int i1 = 0; i1 <= g.n_t(); ++i1) {
    for (int i2 = i1; i2 <= g.n_t(); ++i2) {
      for (int j1 = 0; j1 <= g.n_x(); ++j1) {
        for (int j2 = j1; j2 <= g.n_x(); ++j2) {
          const double lhs = p0.value(i2, j2) - p0.value(i1, j2) - p0.value(i2, j1) + p0.value(i1, j1);
          const double rhs = p0.cell_increments().block(i1, j1, i2 - i1, j2 - j1).sum();
          worst = std::max(worst, std::abs(lhs - rhs));
        }
      }
    }
  }
  rows.push_back(bound_row("rectangle_identity_error", worst, 1e-12));
  if (art.enabled()) {
    auto out = art.open("path_0.csv");
    write_sheet_csv(out, p0);
  }
  return rows;
}

std::vector<ReportRow> run_isometry(const Settings& s) {
  const GridSpec g = s.grid();
  const Field2D phi = Field2D::from_function(g, Placement::kNode, [](Point z) { return z.t; });
  Field2D phi2(g, Placement::kNode);
  phi2.values() = phi.values().cwiseProduct(phi.values());
  const Rect all = Rect::origin_to({g.T(), g.X()});
  const double target = lebesgue_integral_2d(phi2, all);
  std::vector<double> I(s.n_paths);
  for (int k = 0; k < s.n_paths; ++k) {
    I[k] = ito_integral_first(phi, sample_sheet(g, s.seed_spec(), k), all);
  }
  const McEstimate m = summarize(I);
  const double n = s.n_paths;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : I) {
    const double d = v - m.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  const double var = m2 / (n - 1.0);
  const double var_se = std::sqrt(std::max(0.0, m4 / n - (m2 / n) * (m2 / n)) / n);
  return {target_row("mean", m.mean, 0.0, 5.0 * m.std_error, m.std_error),
          target_row("variance", var, target, 5.0 * var_se, var_se),
          info_row("integral_phi_squared", target)};
}

std::vector<ReportRow> run_ibp(const Settings& s) {
  const GridSpec g = s.grid();
  ControlProblem prob;
  const double a0 = s.alpha0;
  const double b0 = s.beta0;
  prob.alpha = [a0](Point, double y, double) { return a0 * y; };
  prob.beta = [b0](Point, double, double) { return b0; };
  prob.cost = [](Point, double, double) { return 0.0; };
  prob.terminal = [](double) { return 0.0; };
  prob.T = g.T();
  prob.X = g.X();
  prob.y0 = s.y0;
  const Control none = [](NodeIndex, double) { return 0.0; };
  std::vector<Field2D> Y, A, B;
  std::vector<double> y2(s.n_paths);
  for (int k = 0; k < s.n_paths; ++k) {
    PathSolution sol = solve_forward(prob, none, sample_sheet(g, s.seed_spec(), k));
    y2[k] = sol.Y(g.n_t(), g.n_x()) * sol.Y(g.n_t(), g.n_x());
    Field2D a(g, Placement::kNode);
    a.values() = a0 * sol.Y.values();
    A.push_back(std::move(a));
    B.push_back(Field2D::constant(g, b0));
    Y.push_back(std::move(sol.Y));
  }
  const McEstimate lhs = summarize(y2);
  const McEstimate rhs = ibp_second_moment_rhs(Y, A, B, {g.T(), g.X()});
  const double se = std::hypot(lhs.std_error, rhs.std_error);
  return {info_row("second_moment", lhs.mean, lhs.std_error),
          info_row("identity_rhs", rhs.mean, rhs.std_error),
          target_row("second_moment_minus_rhs", lhs.mean - rhs.mean, 0.0, 5.0 * se, se)};
}

std::vector<ReportRow> run_positivity(const Settings& s, const Artifacts& art) {
  const PositivityProbe probe = positivity_probe(s.eta, s.y0, -6.0, 6.0, 480);
  const GridSpec g = s.grid();
  const double eta_field =
      eta(Rect::origin_to({g.T(), g.X()}), Field2D::constant(g, s.beta0));
  if (art.enabled()) {
    auto out = art.open("probe.csv");
    write_probe_csv(out, probe);
  }
  return {flag_row("b_min", probe.min_value, probe.min_value < 0.0),
          info_row("b_argmin", probe.argmin), info_row("b_at_zero", b_function(0.0, s.eta, s.y0)),
          info_row("eta_of_beta0_on_domain", eta_field)};
}

std::vector<ReportRow> run_negativity(const Settings& s) {
  const NegativityEstimate e =
      negativity_experiment(s.alpha0, s.beta0, s.y0, s.grid(), s.n_paths, s.seed_spec());
  return {flag_row("p_negative", e.probability, e.probability - 3.0 * e.std_error > 0.0,
                   e.std_error)};
}

void dominance_rows(std::vector<ReportRow>& rows, const std::string& prefix,
                    const PerturbationTable& t) {
  rows.push_back(info_row(prefix + "J_base", t.base.mean, t.base.std_error));
  for (const PerturbationCell& c : t.cells) {
    const std::string name =
        prefix + "gain[" + t.direction_names[c.direction] + ";eps=" + csv_number(c.eps) + "]";
    rows.push_back(flag_row(name, c.gain.mean, c.gain.mean <= 2.0 * c.gain.std_error,
                            c.gain.std_error));
  }
  for (std::size_t d = 0; d < t.derivatives.size(); ++d) {
    const McEstimate& e = t.derivatives[d];
    rows.push_back(flag_row(prefix + "dJ_deps[" + t.direction_names[d] + "]", e.mean,
                            std::abs(e.mean) <= 2.0 * e.std_error, e.std_error));
  }
}

std::vector<ReportRow> run_lq(const Settings& s_in, const Artifacts& art) {
  Settings s = s_in;
  std::vector<ReportRow> rows;
  if (s.X_auto) {
    s.X = lq_find_X(s.T, s.theta, 1e-12);
    rows.push_back(info_row("X_auto", s.X));
  }
  const LQSpec spec{s.T, s.X, s.theta, s.beta0, s.y0};
  rows.push_back(target_row("condition_minus_one", lq_condition_value(s.T, s.X, s.theta) - 1.0,
                            0.0, 1e-10));
  double worst = 0.0;
  for (const auto& [ft, fx] : std::vector<std::pair<double, double>>{
           {0.5, 0.5}, {0.25, 0.25}, {0.25, 0.75}, {0.75, 0.25}, {0.75, 0.75}}) {
    worst = std::max(worst, std::abs(lq_riccati_residual(spec, ft * s.T, fx * s.X, 1e-4)));
  }
  rows.push_back(bound_row("riccati_residual_max", worst, 1e-6));
  const GridSpec g = s.grid();
  const LQReport r = lq_solve_and_verify(spec, g, s.n_paths, s.seed_spec());
  rows.push_back(info_row("lambda_00", r.lambda_00));
  rows.push_back(target_row("boundary_deterministic", r.boundary_deterministic, r.lambda_00,
                            1e-3 * r.lambda_00));
  rows.push_back(target_row("boundary_series", r.boundary_series, r.lambda_00, 1e-9));
  rows.push_back(target_row("boundary_noisy", r.boundary_noisy.mean, r.lambda_00,
                            5.0 * r.boundary_noisy.std_error, r.boundary_noisy.std_error));
  rows.push_back(info_row("J_lambda_Y", r.J_feedback.mean, r.J_feedback.std_error));
  rows.push_back(info_row("J_minus_lambda_Y", r.J_negative_feedback.mean,
                          r.J_negative_feedback.std_error));
  rows.push_back(info_row("open_loop_constant", r.open_loop_optimum));
  rows.push_back(info_row("J_open_loop_constant", r.J_open_loop_optimum.mean,
                          r.J_open_loop_optimum.std_error));

  const ControlProblem problem = make_lq_problem(spec);
  const Field2D lambda = lq_lambda_field(spec, g);
  const std::vector<Field2D> dirs{Field2D::constant(g, 1.0), lambda};
  const std::vector<std::string> names{"constant", "lambda"};
  PerturbationConfig pc;
  pc.n_paths = s.n_paths;
  pc.seed = s.seed_spec();
  dominance_rows(rows, "u_hat.", perturbation_dominance(problem, g, lq_feedback(spec, g), dirs, names, pc));
  const Control zero = [](NodeIndex, double) { return 0.0; };
  pc.epsilons.clear();
  const PerturbationTable tz = perturbation_dominance(problem, g, zero, dirs, names, pc);
  double best = 0.0;
  for (std::size_t d = 0; d < tz.derivatives.size(); ++d) {
    const McEstimate& e = tz.derivatives[d];
    const double z = e.std_error > 0.0 ? std::abs(e.mean) / e.std_error
                                       : (e.mean != 0.0 ? INFINITY : 0.0);
    rows.push_back(info_row("u_zero.dJ_deps[" + names[d] + "]", e.mean, e.std_error));
    best = std::max(best, z);
  }
  rows.push_back(flag_row("u_zero.max_dJ_deps_in_se", best, best > 5.0));
  if (art.enabled()) {
    auto out = art.open("field_lambda.csv");
    write_field_csv(out, lambda, "value");
  }
  return rows;
}

std::vector<ReportRow> run_harvest(const Settings& s, const Artifacts& art) {
  const HarvestSpec spec{s.alpha0, s.beta0, s.theta, s.T, s.X, s.y0};
  const GridSpec g = s.grid();
  const HarvestSolution h = harvest_solve(spec, g);
  const ControlProblem problem = make_harvest_problem(spec);
  const Field2D via_star = star(h.adjoint.L, Field2D::constant(g, 1.0), g.T());
  const double star_gap = (via_star.values() - h.L_star_one.values()).cwiseAbs().maxCoeff();
  double worst_dh = 0.0;
  for (int i = 0; i <= g.n_t(); ++i) {
    for (int j = 0; j <= g.n_x(); ++j) {
      HamiltonianArgs args;
      args.z = {i, j};
      args.y = s.y0;
      args.u = h.u_star(i, j);
      args.p = h.adjoint.p(i, j);
      args.L = &h.adjoint.L;
      args.horizon_t = g.T();
      worst_dh = std::max(worst_dh, std::abs(dH_du(problem, args)));
    }
  }
  const AdjointResiduals res =
      adjoint_residuals(Field2D::constant(g, s.alpha0), s.theta, g.T(), h.adjoint.p, h.adjoint.L);
  std::vector<ReportRow> rows{
      bound_row("dH_du_max", worst_dh, 1e-10),
      bound_row("star_expansion_gap", star_gap, 1e-10),
      bound_row("adjoint_p_residual", res.p_equation, 1e-8),
      bound_row("adjoint_L_residual", res.L_equation, 1e-8),
      target_row("p_terminal", h.adjoint.p(g.n_t(), g.n_x()), s.theta, 1e-12),
      info_row("adjoint_sweeps", h.adjoint.picard_iterations),
      info_row("u_star_00", h.u_star(0, 0)),
      info_row("u_star_min", h.u_star.values().minCoeff()),
      info_row("u_star_max", h.u_star.values().maxCoeff())};
  if (art.enabled()) {
    auto fu = art.open("field_u_star.csv");
    write_field_csv(fu, h.u_star, "value");
    auto fa = art.open("adjoint.csv");
    write_adjoint_csv(fa, h.adjoint);
  }
  return rows;
}

std::vector<ReportRow> run_ml(const Settings& s, const Artifacts& art) {
  MLSpec spec;
  spec.beta0 = s.beta0;
  spec.theta = s.theta;
  spec.T = s.T;
  spec.X = s.X;
  spec.y0 = s.y0;
  const GridSpec g = s.grid();
  std::vector<ReportRow> rows;
  std::optional<MLResult> solved;
  try {
    solved = ml_forward_backward_sweep(spec, g);
  } catch (const ConvergenceError& e) {
    rows.push_back(flag_row("converged", 0.0, false));
    rows.push_back(info_row("last_update", e.last_residual()));
    return rows;
  }
  const MLResult& r = *solved;
  rows.push_back(flag_row("sweeps", r.sweeps, r.sweeps <= spec.max_sweeps));
  rows.push_back(bound_row("last_update", r.last_update, 1e-6));
  rows.push_back(bound_row("u_residual", r.u_residual, 1e-6));
  rows.push_back(bound_row("p_residual", r.p_residual, 1e-6));
  rows.push_back(bound_row("L_residual", r.L_residual, 1e-6));

  // The u-derivative of H vanishes at the control formula given (Y, p, L).
  const ControlProblem problem = make_ml_problem(spec);
  const Field2D formula = ml_control_target(r.Y, r.p, r.L, g.T());
  double worst_dh = 0.0;
  for (int i = 0; i < g.n_t(); ++i) {
    for (int j = 0; j < g.n_x(); ++j) {
      HamiltonianArgs args;
      args.z = {i, j};
      args.y = r.Y(i, j);
      args.u = formula(i, j);
      args.p = r.p(i, j);
      args.L = &r.L;
      args.state = &r.Y;
      args.horizon_t = g.T();
      worst_dh = std::max(worst_dh, std::abs(dH_du(problem, args)));
    }
  }
  rows.push_back(bound_row("dH_du_at_formula_max", worst_dh, 1e-10));
  PerturbationConfig pc;
  pc.deterministic = s.beta0 == 0.0;
  pc.n_paths = s.n_paths;
  pc.seed = s.seed_spec();
  dominance_rows(rows, "u_star.",
                 perturbation_dominance(problem, g, open_loop(r.u),
                                        {Field2D::constant(g, 1.0), r.Y}, {"constant", "state"}, pc));
  if (art.enabled()) {
    auto fu = art.open("field_u_star.csv");
    write_field_csv(fu, r.u, "value");
    auto fp = art.open("field_p.csv");
    write_field_csv(fp, r.p, "value");
    auto fl = art.open("field_L.csv");
    write_field_csv(fl, r.L, "value");
    auto fy = art.open("path_Y.csv");
    write_field_csv(fy, r.Y, "Y");
  }
  return rows;
}

std::vector<ReportRow> run_r0() {
  const RootBracket b = bracket_r0();
  const double r0 = b.root();
  return {target_row("r0", r0, 1.4458, 1e-3), bound_row("f0_at_r0", series_f0(r0).value, 1e-9),
          bound_row("bracket_width", b.hi - b.lo, 1e-10)};
}

void apply_tolerance_override(std::vector<ReportRow>& rows, std::optional<double> tol) {
  if (!tol) return;
  for (ReportRow& r : rows) {
    if (!r.tolerance) continue;
    r.tolerance = *tol;
    r.pass = std::abs(r.value - r.target.value_or(0.0)) <= *tol;
  }
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"sheet-check", "isometry", "ibp",
                                              "positivity",  "negativity", "lq",
                                              "harvest",     "ml",       "r0"};
  return names;
}

ExperimentConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  static const std::vector<std::string> known{"experiment", "grid_nt", "grid_nx", "T",    "X",
                                              "alpha0",     "beta0",   "theta",   "y0",   "eta",
                                              "paths",      "seed",    "tol",     "out"};
  ExperimentConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw std::invalid_argument("unknown config key '" + key + "'");
      }
    }
    if (j.contains("experiment")) c.experiment = j["experiment"].get<std::string>();
    if (j.contains("grid_nt")) c.n_t = j["grid_nt"].get<int>();
    if (j.contains("grid_nx")) c.n_x = j["grid_nx"].get<int>();
    if (j.contains("T")) c.T = j["T"].get<double>();
    if (j.contains("X")) c.X = j["X"].get<double>();
    if (j.contains("alpha0")) c.alpha0 = j["alpha0"].get<double>();
    if (j.contains("beta0")) c.beta0 = j["beta0"].get<double>();
    if (j.contains("theta")) c.theta = j["theta"].get<double>();
    if (j.contains("y0")) c.y0 = j["y0"].get<double>();
    if (j.contains("eta")) c.eta = j["eta"].get<double>();
    if (j.contains("paths")) c.n_paths = j["paths"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("tol")) c.tol = j["tol"].get<double>();
    if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad config value: ") + e.what());
  }
  return c;
}

void validate(const ExperimentConfig& config) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), config.experiment) == names.end()) {
    throw std::invalid_argument("unknown experiment '" + config.experiment + "'");
  }
  const Settings s = resolve(config);
  if (s.n_t < 1 || s.n_x < 1 || s.n_t > 1024 || s.n_x > 1024) {
    throw std::invalid_argument("grid sizes must lie in [1, 1024]");
  }
  if (!(s.T > 0.0) || !(s.X > 0.0)) throw std::invalid_argument("T and X must be positive");
  if (s.n_paths < 2) throw std::invalid_argument("need at least two paths");
  if (s.tol && !(*s.tol >= 0.0)) throw std::invalid_argument("tolerance must be nonnegative");
  if (s.name == "lq" && !(s.T < 1.0)) throw std::invalid_argument("lq needs T < 1");
  if (s.name == "lq" && !(s.theta > 0.0)) throw std::invalid_argument("lq needs theta > 0");
  if ((s.name == "harvest" || s.name == "positivity" || s.name == "negativity") && !(s.y0 > 0.0)) {
    throw std::invalid_argument(s.name + " needs y0 > 0");
  }
  if (s.name == "ml" && !(s.theta >= 0.0)) throw std::invalid_argument("ml needs theta >= 0");
}

ReportRow target_row(std::string metric, double value, double target, double tolerance,
                     std::optional<double> std_error) {
  ReportRow r{std::move(metric), value, std_error, target, tolerance, true, false};
  r.pass = std::abs(value - target) <= tolerance;
  return r;
}

ReportRow bound_row(std::string metric, double value, double bound) {
  return target_row(std::move(metric), value, 0.0, bound);
}

ReportRow flag_row(std::string metric, double value, bool pass, std::optional<double> std_error) {
  return {std::move(metric), value, std_error, std::nullopt, std::nullopt, true, pass};
}

ReportRow info_row(std::string metric, double value, std::optional<double> std_error) {
  return {std::move(metric), value, std_error, std::nullopt, std::nullopt, false, true};
}

RunResult run(const ExperimentConfig& config) {
  validate(config);
  const Settings s = resolve(config);
  const Artifacts art(s.out_dir);
  std::vector<ReportRow> rows;
  if (s.name == "sheet-check") {
    rows = run_sheet_check(s, art);
  } else if (s.name == "isometry") {
    rows = run_isometry(s);
  } else if (s.name == "ibp") {
    rows = run_ibp(s);
  } else if (s.name == "positivity") {
    rows = run_positivity(s, art);
  } else if (s.name == "negativity") {
    rows = run_negativity(s);
  } else if (s.name == "lq") {
    rows = run_lq(s, art);
  } else if (s.name == "harvest") {
    rows = run_harvest(s, art);
  } else if (s.name == "ml") {
    rows = run_ml(s, art);
  } else {
    rows = run_r0();
  }
  apply_tolerance_override(rows, s.tol);
  RunResult result{std::move(rows), 0};
  for (const ReportRow& r : result.rows) {
    if (!r.pass) result.exit_code = 1;
  }
  if (art.enabled()) {
    auto params = art.open("params.json");
    params << settings_json(s).dump(2) << '\n';
    auto results = art.open("results.csv");
    write_results_csv(results, result.rows);
  }
  return result;
}

void write_results_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  const auto opt = [](const std::optional<double>& v) { return v ? csv_number(*v) : std::string(); };
  out << "metric,value,stderr,target,tolerance,pass\n";
  for (const ReportRow& r : rows) {
    out << r.metric << ',' << csv_number(r.value) << ',' << opt(r.std_error) << ','
        << opt(r.target) << ',' << opt(r.tolerance) << ',' << (r.pass ? "true" : "false") << '\n';
  }
}

int selftest(std::ostream& log, const std::string& out_dir, std::optional<double> tol) {
  int failures = 0;
  log << std::left << std::setw(12) << "experiment" << std::setw(44) << "metric" << std::setw(26)
      << "value" << "status\n";
  for (const std::string& name : experiment_names()) {
    ExperimentConfig c;
    c.experiment = name;
    c.tol = tol;
    if (!out_dir.empty()) c.out_dir = (std::filesystem::path(out_dir) / name).string();
    RunResult r;
    try {
      r = run(c);
    } catch (const std::exception& e) {
      log << std::setw(12) << name << "error: " << e.what() << '\n';
      ++failures;
      continue;
    }
    for (const ReportRow& row : r.rows) {
      if (!row.checked) continue;
      log << std::setw(12) << name << std::setw(44) << row.metric << std::setw(26)
          << csv_number(row.value) << (row.pass ? "PASS" : "FAIL") << '\n';
      if (!row.pass) ++failures;
    }
  }
  log << (failures == 0 ? "selftest: all checks passed\n"
                        : "selftest: " + std::to_string(failures) + " check(s) failed\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace planecontrol
