// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "greensplit/cli.hpp"
#include "greensplit/distributed.hpp"
#include "greensplit/errors.hpp"
#include "greensplit/lyapunov.hpp"
#include "greensplit/optimizer.hpp"
#include "greensplit/scenario_io.hpp"
#include "greensplit/sim.hpp"
#include "greensplit/ssa.hpp"
#include "oracles.hpp"

using namespace greensplit;

namespace {

const std::string kScenarios = GREENSPLIT_TEST_SCENARIOS;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

Outcome scalar_closed_form() {
  const Eigen::Matrix<double, 1, 1> a(-1.0), one(1.0);
  double worst = 0;
  for (double eps : {0.5, 1.0, 2.0}) {
    worst = std::max(worst, std::abs(smoothed_abscissa(a, one, one, eps).alpha_tilde - (-1.0 + eps / 2.0)));
  }
  return {worst < 1e-8, fmt("max abs error %.2e", worst)};
}

Outcome lyapunov_vs_quadrature() {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> dim(3, 8);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const int n = dim(gen);
    const Eigen::MatrixXd lambda = oracle::random_stable(n, gen);
    const Eigen::MatrixXd d = oracle::random_symmetric(n, gen);
    const Eigen::MatrixXd ref = oracle::lyapunov_integral(lambda, d, 40.0 / std::abs(spectral_abscissa(lambda)));
    worst = std::max(worst, (solve_lyapunov(lambda, d).x - ref).norm() / ref.norm());
  }
  return {worst < 1e-6, fmt("max relative error %.2e over 100 systems", worst)};
}

Outcome gramian_cost_equivalence() {
  const NetworkSpec spec = load_scenario(kScenarios + "/four_intersections.json");
  const ModeSet ms = assemble_modes(spec, uniform_schedule(spec));
  const Eigen::MatrixXd a = averaged_matrix(ms.modes, ms.durations);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(spec.state_dim);
  const double trace = congestion_cost(a, ms.output_map, x0);
  const double energy = oracle::output_energy(a, ms.output_map, x0, 40.0 / std::abs(spectral_abscissa(a)));
  const double rel = std::abs(trace - energy) / trace;
  return {rel < 1e-4, fmt("relative gap %.2e (trace %.6g)", rel, trace)};
}

Outcome averaged_stability() {
  std::mt19937_64 gen(7);
  double worst = -std::numeric_limits<double>::infinity();
  for (const NetworkSpec& spec : {load_scenario(kScenarios + "/four_intersections.json"), generate_grid(3, 3)}) {
    const ModeSet ms = assemble_modes(spec, uniform_schedule(spec));
    for (int k = 0; k < 200; ++k) {
      const Eigen::VectorXd d = oracle::random_simplex(ms.mode_count(), ms.cycle_time, gen);
      worst = std::max(worst, spectral_abscissa(averaged_matrix(ms.modes, d)));
    }
  }
  return {worst < 0, fmt("largest abscissa %.3e over 400 samples", worst)};
}

Outcome gradient_vs_finite_differences() {
  const NetworkSpec spec = load_scenario(kScenarios + "/four_intersections.json");
  const ModeSet ms = assemble_modes(spec, uniform_schedule(spec));
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(spec.state_dim);
  const double eps = 1.1 / cost_at(ms, ms.output_map, x0, ms.durations);
  SsaResult r = smoothed_abscissa(averaged_matrix(ms.modes, ms.durations, ms.cycle_time), ms.output_map, x0, eps);
  const Eigen::VectorXd g = ssa_gradient(r, ms);
  const Eigen::VectorXd fd = oracle::ssa_gradient_fd(ms, ms.output_map, x0, eps, ms.durations, 1e-5 * ms.cycle_time);
  double worst = 0;
  int checked = 0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (std::abs(g[i]) <= 1e-8) continue;
    worst = std::max(worst, std::abs(g[i] - fd[i]) / std::abs(g[i]));
    ++checked;
  }
  return {checked > 0 && worst < 1e-5, fmt("max relative error %.2e over %g components", worst, checked)};
}

Outcome end_to_end_optimization() {
  const NetworkSpec spec = load_scenario(kScenarios + "/four_intersections.json");
  const ModeSet ms = assemble_modes(spec, uniform_schedule(spec));
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(spec.state_dim);
  const OptReport rep = optimize(ms, ms.output_map, x0);
  const double uniform = cost_at(ms, ms.output_map, x0, ms.durations);
  const double reached = cost_at(ms, ms.output_map, x0, rep.d_star);
  bool feasible = on_simplex(rep.d_star, ms.cycle_time);
  for (const auto& rec : rep.trajectory) feasible = feasible && on_simplex(rec.d, ms.cycle_time);
  const double rel = std::abs(1.0 / rep.eps_star - reached) / reached;
  const bool pass = reached <= uniform && feasible && rel < 1e-4;
  return {pass, fmt("cost %.6g -> %.6g, |1/eps* - J(d*)|/J = %.2e", uniform, reached, rel) +
                    (feasible ? ", iterates feasible" : ", infeasible iterate")};
}

Outcome averaging_accuracy() {
  const NetworkSpec base = load_scenario(kScenarios + "/single_road.json");
  std::map<double, double> err;
  for (double cycle : {120.0, 100.0, 60.0, 30.0}) {
    const NetworkSpec spec = rescale_cycle(base, cycle);
    const ModeSet ms = assemble_modes(spec, scenario_schedule(spec));
    const Eigen::VectorXd x0 = load_state(kScenarios + "/single_road_x0.json", spec);
    err[cycle] = averaging_error(ms, average_system(ms, spec), spec, x0, 600, 1).error_percent;
  }
  const bool pass = err[120] > err[60] && err[60] > err[30] && err[100] < 10.0;
  return {pass, fmt("Error%% T=120: %.3f, T=60: %.3f, T=30: %.3f", err[120], err[60], err[30]) +
                    fmt(", T=100: %.3f", err[100])};
}

Outcome distributed_grid() {
  std::mt19937_64 gen(8);
  const int n = 6;
  const Eigen::MatrixXd lambda = oracle::random_stable(n, gen);
  const Eigen::MatrixXd s = oracle::random_symmetric(n, gen);
  const Eigen::MatrixXd d = s * s.transpose() + Eigen::MatrixXd::Identity(n, n);
  const CommGraph graph = CommGraph::grid(3, 3);
  std::vector<int> assignment(n);
  for (int k = 0; k < n; ++k) assignment[static_cast<std::size_t>(k)] = k * graph.size() / n;
  const DistributedResult r = run_distributed(lambda, d, graph, assignment, graph.diameter(), 1e-6);

  double worst = 0;
  for (const auto& x : r.x_hat) worst = std::max(worst, (x - r.x_star).norm() / r.x_star.norm());
  std::map<int, double> last;
  bool monotone = true;
  for (const auto& e : r.trace) {
    auto it = last.find(e.agent);
    if (it != last.end() && e.frobenius_error > it->second * (1 + 1e-9) + 1e-14) monotone = false;
    last[e.agent] = e.frobenius_error;
  }
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  for (const auto& di : r.d_hat) sum += di;
  const double dgap = (sum - d).norm() / d.norm();
  const bool pass = r.rounds <= graph.diameter() && worst < 1e-6 && monotone && dgap < 1e-8;
  return {pass, fmt("rounds %g (diam %g), max error %.2e", r.rounds, graph.diameter(), worst) +
                    fmt(", sum D_i gap %.2e", dgap) + (monotone ? ", errors nonincreasing" : ", error increased")};
}

Outcome scale_invariance() {
  const NetworkSpec spec = load_scenario(kScenarios + "/four_intersections.json");
  const ModeSet ms = assemble_modes(spec, uniform_schedule(spec));
  std::mt19937_64 gen(9);
  const Eigen::VectorXd d = oracle::random_simplex(ms.mode_count(), ms.cycle_time, gen);
  const Eigen::MatrixXd base = averaged_matrix(ms.modes, d);
  double worst = 0;
  for (double c : {0.5, 2.0}) worst = std::max(worst, (averaged_matrix(ms.modes, c * d) - base).cwiseAbs().maxCoeff());
  return {worst <= 1e-14, fmt("max elementwise difference %.2e", worst)};
}

Outcome determinism() {
  RunConfig cfg;
  cfg.command = "optimize";
  cfg.scenario = kScenarios + "/four_intersections.json";
  cfg.seed = 42;
  std::ostringstream first, second, err;
  const int a = run(cfg, first, err);
  const int b = run(cfg, second, err);
  const bool same = a == 0 && b == 0 && !first.str().empty() && first.str() == second.str();
  return {same, same ? "report bodies identical (" + std::to_string(first.str().size()) + " bytes)"
                     : "reports differ or run failed: " + err.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 scalar smoothed abscissa closed form", scalar_closed_form},
      {"2 Lyapunov solver vs quadrature", lyapunov_vs_quadrature},
      {"3 Gramian trace equals output energy", gramian_cost_equivalence},
      {"4 averaged system stays Hurwitz", averaged_stability},
      {"5 analytic gradient vs finite differences", gradient_vs_finite_differences},
      {"6 end-to-end split optimization", end_to_end_optimization},
      {"7 averaging accuracy on the single road", averaging_accuracy},
      {"8 distributed solve on a 3x3 agent grid", distributed_grid},
      {"9 scale invariance of the average", scale_invariance},
      {"10 deterministic optimization report", determinism},
  };
  const double limits[] = {1, 30, 10, 30, 60, 300, 30, 120, 1, 600};
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > limits[k]) {
      o.pass = false;
      o.detail += fmt(" [over the %.0f s budget]", limits[k]);
    }
    failures += !o.pass;
    std::printf("[%s] %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", criteria[k].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
