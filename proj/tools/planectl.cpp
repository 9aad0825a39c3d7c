// Command-line front end for the plane-control experiments.
//
//   planectl <experiment> [--config file.json] [--grid-nt N] [--grid-nx N]
//            [--paths N] [--seed S] [--T v] [--X v] [--theta v] [--alpha0 v]
//            [--beta0 v] [--tol v] [--out dir]
//   planectl selftest [--out dir] [--tol v]
//
// Exit codes: 0 all checks pass, 1 a numeric check failed, 2 usage error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "planecontrol/experiments.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

template <typename T>
void override_if(const CLI::Option* opt, std::optional<T>& field, const T& value) {
  if (opt->count() > 0) field = value;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic control in the plane: experiments and self-test"};
  std::string experiment;
  std::string config_path;
  int n_t = 0;
  int n_x = 0;
  int paths = 0;
  std::uint64_t seed = 0;
  double T = 0.0;
  double X = 0.0;
  double theta = 0.0;
  double alpha0 = 0.0;
  double beta0 = 0.0;
  double y0 = 0.0;
  double eta = 0.0;
  double tol = 0.0;
  std::string out_dir;

  std::string names;
  for (const std::string& n : planecontrol::experiment_names()) names += " " + n;
  app.add_option("experiment", experiment, "one of:" + names + " selftest")->required();
  app.add_option("--config", config_path, "JSON configuration file");
  auto* o_nt = app.add_option("--grid-nt", n_t, "time cells");
  auto* o_nx = app.add_option("--grid-nx", n_x, "space cells");
  auto* o_paths = app.add_option("--paths", paths, "Monte Carlo paths");
  auto* o_seed = app.add_option("--seed", seed, "master seed");
  auto* o_T = app.add_option("--T", T, "time horizon");
  auto* o_X = app.add_option("--X", X, "space horizon");
  auto* o_theta = app.add_option("--theta", theta, "terminal weight");
  auto* o_a0 = app.add_option("--alpha0", alpha0, "drift constant");
  auto* o_b0 = app.add_option("--beta0", beta0, "noise constant");
  auto* o_y0 = app.add_option("--y0", y0, "initial value Y(0,0)");
  auto* o_eta = app.add_option("--eta", eta, "eta for the positivity probe");
  auto* o_tol = app.add_option("--tol", tol, "tolerance applied to every checked metric");
  auto* o_out = app.add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (experiment == "selftest") {
      std::optional<double> t;
      override_if(o_tol, t, tol);
      return planecontrol::selftest(std::cout, out_dir, t);
    }
    planecontrol::ExperimentConfig config;
    if (!config_path.empty()) config = planecontrol::parse_config_json(read_file(config_path));
    if (!config.experiment.empty() && config.experiment != experiment) {
      throw std::invalid_argument("config names experiment '" + config.experiment + "'");
    }
    config.experiment = experiment;
    override_if(o_nt, config.n_t, n_t);
    override_if(o_nx, config.n_x, n_x);
    override_if(o_paths, config.n_paths, paths);
    override_if(o_seed, config.seed, seed);
    override_if(o_T, config.T, T);
    override_if(o_X, config.X, X);
    override_if(o_theta, config.theta, theta);
    override_if(o_a0, config.alpha0, alpha0);
    override_if(o_b0, config.beta0, beta0);
    override_if(o_y0, config.y0, y0);
    override_if(o_eta, config.eta, eta);
    override_if(o_tol, config.tol, tol);
    if (o_out->count() > 0) config.out_dir = out_dir;
    if (config.out_dir.empty()) config.out_dir = "out/" + experiment;
    planecontrol::validate(config);

    const planecontrol::RunResult result = planecontrol::run(config);
    planecontrol::write_results_csv(std::cout, result.rows);
    for (const auto& row : result.rows) {
      if (!row.pass) std::cerr << "failed metric: " << row.metric << '\n';
    }
    return result.exit_code;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
