// qcd: CuSum covert-adversary analytics and Monte Carlo checks.
//
// Exit status: 0 on success, 2 on usage errors, 1 on numeric or domain
// errors. THREADS sets the simulator's worker count; results do not depend
// on it.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include "qcd/commands.hpp"
#include "qcd/svg.hpp"

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + out + " for writing");
  f << text;
  if (!f) throw std::runtime_error("failed writing " + out);
}

unsigned threads_from_env() {
  const char* env = std::getenv("THREADS");
  if (!env || !*env) return 0;
  try {
    const long v = std::stol(env);
    if (v < 1) throw std::out_of_range("THREADS");
    return static_cast<unsigned>(v);
  } catch (const std::exception&) {
    throw UsageError(std::string("THREADS must be a positive integer, got '") + env + "'");
  }
}

std::vector<double> delta_grid(const std::vector<double>& explicit_grid, int steps) {
  if (!explicit_grid.empty()) {
    for (std::size_t i = 0; i < explicit_grid.size(); ++i) {
      const double d = explicit_grid[i];
      if (!(d >= 0.0 && d <= 1.0)) throw UsageError("--deltas values must lie in [0, 1]");
      if (i > 0 && !(d > explicit_grid[i - 1])) throw UsageError("--deltas must be strictly increasing");
    }
    return explicit_grid;
  }
  if (steps < 1) throw UsageError("--delta-steps must be at least 1");
  return qcd::report::unit_delta_grid(steps);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-time CuSum under a covert drift adversary"};
  app.require_subcommand(1);
  std::string out;

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Threshold, delays and damage for one operating point");
  double a_gamma = 0.0;
  std::optional<double> a_mu, a_delta, a_mu0;
  double a_c = 1.0;
  analyze->add_option("--gamma", a_gamma, "False-alarm constraint (mean time to false alarm)")->required();
  auto* mu_opt = analyze->add_option("--mu", a_mu, "Post-change drift");
  auto* delta_opt = analyze->add_option("--delta", a_delta, "Power-law schedule mu = c gamma^-delta");
  analyze->add_option("--c", a_c, "Power-law prefactor")->capture_default_str()->needs(delta_opt);
  auto* mu0_opt = analyze->add_option("--mu0", a_mu0, "Constant schedule mu = mu0");
  mu_opt->excludes(delta_opt)->excludes(mu0_opt);
  delta_opt->excludes(mu0_opt);
  analyze->add_option("--out", out, "Output CSV path (default stdout)");

  // table1
  auto* table1 = app.add_subcommand("table1", "Relative gap M(gamma) for delta in {0.75, 2, 5}");
  table1->add_option("--out", out, "Output CSV path (default stdout)");

  // fig1
  auto* fig1 = app.add_subcommand("fig1", "n(gamma) versus gamma for mu = gamma^-delta");
  std::vector<double> f_deltas{0.75, 2.0, 5.0};
  double f_gmin = 1.0, f_gmax = 1e5;
  int f_points = 101;
  fig1->add_option("--deltas", f_deltas, "Comma-separated deltas")->delimiter(',')->capture_default_str();
  fig1->add_option("--gamma-min", f_gmin)->capture_default_str();
  fig1->add_option("--gamma-max", f_gmax)->capture_default_str();
  fig1->add_option("--points", f_points, "Log-spaced grid points")->capture_default_str();
  fig1->add_option("--out", out, "Output CSV path (default stdout)");

  // phase / damage share grid flags
  std::vector<double> p_gammas = qcd::report::default_figure_gammas();
  std::vector<double> d_gammas = qcd::report::default_damage_gammas();
  std::vector<double> grid_deltas;
  int grid_steps = 200;
  auto* phase = app.add_subcommand("phase", "Threshold and n(gamma)/gamma across delta");
  phase->add_option("--gammas", p_gammas)->delimiter(',')->capture_default_str();
  auto* damage = app.add_subcommand("damage", "log damage across delta and its maximizer");
  damage->add_option("--gammas", d_gammas)->delimiter(',')->capture_default_str();
  for (auto* sub : {phase, damage}) {
    auto* explicit_grid = sub->add_option("--deltas", grid_deltas, "Explicit comma-separated delta grid")->delimiter(',');
    sub->add_option("--delta-steps", grid_steps, "Uniform grid on [0,1] with this many intervals")
        ->capture_default_str()
        ->excludes(explicit_grid);
    sub->add_option("--out", out, "Output CSV path (default stdout)");
  }

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of a mean stopping time");
  simulate->set_help_flag("--help", "Print this help message and exit");
  qcd::report::SimulateRequest req;
  std::string s_mode;
  std::string s_bridge = "on";
  std::optional<unsigned> s_threads;
  simulate->add_option("--mode", s_mode, "pre (false-alarm time) or post (detection delay)")
      ->required()
      ->check(CLI::IsMember({"pre", "post"}));
  simulate->add_option("--mu", req.mu, "Drift")->required();
  auto* h_opt = simulate->add_option("--h", req.h, "Threshold");
  auto* g_opt = simulate->add_option("--gamma", req.gamma, "Design the threshold for this constraint");
  h_opt->excludes(g_opt);
  simulate->add_option("--step", req.step, "Time step (default 1e-3 min(1,h^2)/mu^2)");
  simulate->add_option("--horizon", req.horizon, "Truncation time (default 50x the larger analytic mean)");
  simulate->add_option("--paths", req.paths)->capture_default_str();
  simulate->add_option("--seed", req.seed)->capture_default_str();
  simulate->add_option("--bridge", s_bridge, "Brownian-bridge crossing correction")
      ->capture_default_str()
      ->check(CLI::IsMember({"on", "off"}));
  simulate->add_flag("--strict", req.strict, "Fail if any path reaches the horizon");
  simulate->add_option("--threads", s_threads, "Worker threads (overrides THREADS)");
  simulate->add_option("--out", out, "Output CSV path (default stdout)");

  // plot
  auto* plot = app.add_subcommand("plot", "Render a CSV produced by this tool as SVG");
  std::string csv_path;
  plot->add_option("csv", csv_path, "Input CSV")->required();
  plot->add_option("--out", out, "Output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    using namespace qcd::report;
    if (*analyze) {
      CurveTable t;
      if (a_mu) {
        t = qcd::report::analyze(a_gamma, *a_mu);
      } else if (a_delta) {
        t = qcd::report::analyze(a_gamma, qcd::DriftSchedule::power_law(a_c, *a_delta));
      } else if (a_mu0) {
        t = qcd::report::analyze(a_gamma, qcd::DriftSchedule::constant(*a_mu0));
      } else {
        throw UsageError("analyze: give one of --mu, --delta or --mu0");
      }
      emit(to_csv(t), out);
    } else if (*table1) {
      emit(to_csv(qcd::report::table1()), out);
    } else if (*fig1) {
      if (f_deltas.empty()) throw UsageError("fig1: --deltas must not be empty");
      if (f_points < 2) throw UsageError("fig1: --points must be at least 2");
      if (!(f_gmin > 0.0) || !(f_gmax > f_gmin)) throw UsageError("fig1: need 0 < gamma-min < gamma-max");
      emit(to_csv(qcd::report::fig1(f_deltas, f_gmin, f_gmax, f_points)), out);
    } else if (*phase) {
      emit(to_csv(qcd::report::phase(p_gammas, delta_grid(grid_deltas, grid_steps))), out);
    } else if (*damage) {
      emit(to_csv(qcd::report::damage(d_gammas, delta_grid(grid_deltas, grid_steps))), out);
    } else if (*simulate) {
      if (!req.h && !req.gamma) throw UsageError("simulate: give --h or --gamma");
      req.mode = s_mode == "pre" ? qcd::sim::Mode::PreChange : qcd::sim::Mode::PostChange;
      req.bridge = s_bridge == "on";
      const unsigned threads = s_threads ? *s_threads : threads_from_env();
      const CurveTable t = qcd::report::simulate(req, threads);
      const auto& row = t.rows.front();
      if (row[t.column_index("truncated")] > 0) {
        std::cerr << "warning: " << row[t.column_index("truncated")]
                  << " paths reached the horizon; mean not computed\n";
      }
      emit(to_csv(t), out);
    } else if (*plot) {
      std::ifstream in(csv_path, std::ios::binary);
      if (!in) throw std::runtime_error("cannot open " + csv_path);
      emit(render_svg(read_csv(in)), out);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
