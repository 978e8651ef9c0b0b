#include <gtest/gtest.h>

#include <cmath>

#include "hyperloss/analysis.hpp"
#include "hyperloss/optimizer.hpp"

using namespace hyperloss;

namespace {

double torus_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

ChainSpec chain_2pct() {
  ChainSpec c;
  c.n_nodes = 10;
  c.eps = 0.02;
  c.r_in = db_to_r(15.0);
  return c;
}

}  // namespace

TEST(Optimizer, MachZehnderRecoversAtPi) {
  for (Readout readout : {Readout::optimal, Readout::locked}) {
    const auto res = optimize_phases(make_problem(mz_network(0.08, 0.08, 0.0, db_to_r(15.0)), readout));
    ASSERT_EQ(res.phi_star.size(), 1u);
    EXPECT_LT(torus_distance(res.phi_star[0], kPi), 1e-6);
    EXPECT_NEAR(res.value, 15.0, 1e-9);
  }
}

TEST(Optimizer, ChainCommonPhaseReachesTarget) {
  const auto res = optimize_phases(make_problem(chain_2pct()));
  EXPECT_GE(res.value, 10.0);
}

TEST(Optimizer, PerNodeChainPhases) {
  ChainSpec c = chain_2pct();
  c.n_nodes = 4;
  c.phi = {0.0, 0.0, 0.0, 0.0};
  const auto res = optimize_phases(make_problem(c), 8, 4, 7);
  EXPECT_EQ(res.phi_star.size(), 4u);
  EXPECT_NEAR(res.value, 15.0, 1e-6);
}

TEST(Optimizer, FlatLandscapeReturnsInput) {
  const auto res = optimize_phases(make_problem(mz_network(0.0, 0.0, 1.0, db_to_r(12.0))));
  EXPECT_NEAR(res.value, 12.0, 1e-12);
  EXPECT_DOUBLE_EQ(res.phi_star[0], 0.0);  // ties resolve to the smallest phase
}

TEST(Optimizer, NeverWorseThanBestSeed) {
  const auto f = [](const std::vector<double>& x) { return std::cos(x[0] - 1.0) + 0.5 * std::cos(2 * x[1] + 0.3); };
  const auto res = optimize_phases(f, 2, OptOptions{5, 3, 0});
  EXPECT_GE(res.value, res.best_seed_value);
  for (const auto& t : res.trace) EXPECT_LE(t.value, res.value);
  EXPECT_NEAR(res.value, 1.5, 1e-9);
  EXPECT_NEAR(res.phi_star[0], 1.0, 1e-5);
}

TEST(Optimizer, WrapsAcrossZero) {
  const auto f = [](const std::vector<double>& x) { return std::cos(x[0] + 0.05); };
  const auto res = optimize_phases(f, 1, OptOptions{4, 1, 0});
  EXPECT_LT(torus_distance(res.phi_star[0], kTwoPi - 0.05), 1e-5);
  EXPECT_GE(res.phi_star[0], 0.0);
  EXPECT_LT(res.phi_star[0], kTwoPi);
}

TEST(Optimizer, Deterministic) {
  auto p = make_problem(mz_network(0.08, 0.05, 0.0, 1.0));
  const auto a = optimize_phases(p, 16, 3, 11);
  const auto b = optimize_phases(p, 16, 3, 11);
  EXPECT_EQ(a.phi_star, b.phi_star);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.n_evals, b.n_evals);
}

TEST(Optimizer, DoublingDensityDoesNotHurt) {
  auto p = make_problem(mz_network(0.08, 0.03, 0.0, 1.5), Readout::locked);
  double previous = -1e300;
  for (int d : {4, 8, 16, 32}) {
    const double v = optimize_phases(p, d, 2).value;
    EXPECT_GE(v, previous - 1e-9);
    previous = v;
  }
}

TEST(Optimizer, HighDimensionUsesRandomSeeds) {
  const auto f = [](const std::vector<double>& x) {
    double s = 0;
    for (std::size_t k = 0; k < x.size(); ++k) s += std::cos(x[k] - 0.1 * static_cast<double>(k + 1));
    return s;
  };
  const auto a = optimize_phases(f, 5, OptOptions{8, 2, 42});
  const auto b = optimize_phases(f, 5, OptOptions{8, 2, 42});
  EXPECT_NEAR(a.value, 5.0, 1e-9);
  EXPECT_EQ(a.phi_star, b.phi_star);
  EXPECT_EQ(a.trace.front().evals, 8u + 2u + 8u);
}

TEST(Optimizer, Errors) {
  NetworkSpec net = mz_network(0.1, 0.1, 0.0, 1.0);
  std::get<Phase>(net.components[1]).free = false;
  EXPECT_THROW(optimize_phases(make_problem(net)), InvalidProblem);
  OptProblem bad{mz_network(0.1, 0.1, 0.0, 1.0), {0}};
  EXPECT_THROW(make_objective(bad), InvalidProblem);
  const auto f = [](const std::vector<double>&) { return 0.0; };
  EXPECT_THROW(optimize_phases(f, 3, OptOptions{200, 1, 0, 1000}), BudgetExceeded);
  EXPECT_THROW(optimize_phases(f, 1, OptOptions{8, 1, 0, 9}), BudgetExceeded);
}

TEST(Optimizer, WorstCaseBandObjective) {
  OptProblem p = make_problem(mz_network(0.08, 0.08, 0.0, 1.0));
  p.objective = ObjectiveKind::worst_case_band;
  p.band_lo = 0.0;
  p.band_hi = kTwoPi * 1e6;
  p.band_points = 3;
  const auto res = optimize_phases(p, 16, 2);
  EXPECT_NEAR(res.value, variance_to_db(std::exp(-2.0)), 1e-9);
}

TEST(Optimizer, RobustnessLimits) {
  const auto p = make_problem(mz_network(0.08, 0.08, 0.0, db_to_r(15.0)));
  const auto res = optimize_phases(p);
  const auto zero = robustness(p, res.phi_star, 0.0, 50, 1);
  EXPECT_NEAR(zero.mean_db, res.value, 1e-12);
  EXPECT_NEAR(zero.p05_db, res.value, 1e-12);
  const auto a = robustness(p, res.phi_star, 0.2, 200, 5);
  const auto b = robustness(p, res.phi_star, 0.2, 200, 5);
  EXPECT_EQ(a.mean_db, b.mean_db);
  EXPECT_LT(a.mean_db, res.value);
  EXPECT_LE(a.p05_db, a.mean_db);

  const auto flat = make_problem(mz_network(0.0, 0.0, 0.0, db_to_r(15.0)));
  EXPECT_NEAR(robustness(flat, {1.0}, 0.0, 20, 3).mean_db, robustness(flat, {1.0}, 2.0, 20, 3).mean_db, 1e-12);
  EXPECT_THROW(robustness(p, res.phi_star, -1.0, 10, 0), InvalidArgument);
}

TEST(Optimizer, RobustnessAtFullSpreadApproachesSweep) {
  // σ = π samples the phase uniformly: the mean matches the phase-sweep average.
  const auto net = mz_network(0.08, 0.08, 0.0, 1.0);
  const auto p = make_problem(net);
  const auto sweep = phase_sweep(net, uniform_phase_grid(2000));
  double mean = 0;
  for (double v : sweep.v_min) mean += variance_to_db(v);
  mean /= static_cast<double>(sweep.size());
  const auto rob = robustness(p, {kPi}, kPi, 20000, 9);
  EXPECT_NEAR(rob.mean_db, mean, 0.05);
}
