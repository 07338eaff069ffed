#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "greensplit/dynamics.hpp"
#include "greensplit/lyapunov.hpp"
#include "greensplit/scenario_io.hpp"
#include "greensplit/sim.hpp"
#include "oracles.hpp"

using namespace greensplit;

TEST(SpectralAbscissa, Diagonal) {
  EXPECT_DOUBLE_EQ(spectral_abscissa(Eigen::Vector2d(-1, -2).asDiagonal().toDenseMatrix()), -1.0);
}

TEST(SpectralAbscissa, PurelyImaginary) {
  Eigen::Matrix2d a;
  a << 0, 1,
      -1, 0;
  EXPECT_NEAR(spectral_abscissa(a), 0.0, 1e-15);
}

TEST(SpectralAbscissa, ExampleNetworkIsStable) {
  const NetworkSpec spec = load_scenario(GREENSPLIT_TEST_SCENARIOS "/four_intersections.json");
  const ModeSet ms = assemble_modes(spec, uniform_schedule(spec));
  EXPECT_LT(spectral_abscissa(averaged_matrix(ms.modes, ms.durations)), 0.0);
}

TEST(SpectralAbscissa, NonFiniteInput) {
  Eigen::Matrix2d a = Eigen::Matrix2d::Identity();
  a(0, 1) = std::nan("");
  EXPECT_THROW(spectral_abscissa(a), EigenFailure);
}

TEST(SolveLyapunov, Scalar) {
  const auto sol = solve_lyapunov(Eigen::Matrix<double, 1, 1>(-1.0), Eigen::Matrix<double, 1, 1>(2.0));
  EXPECT_NEAR(sol.x(0, 0), 1.0, 1e-15);
}

TEST(SolveLyapunov, NegativeIdentity) {
  std::mt19937_64 gen(5);
  const Eigen::MatrixXd d = oracle::random_symmetric(6, gen);
  const auto sol = solve_lyapunov(-Eigen::MatrixXd::Identity(6, 6), d);
  EXPECT_TRUE(sol.x.isApprox(d / 2, 1e-14));
}

TEST(SolveLyapunov, MatchesQuadratureOracle) {
  std::mt19937_64 gen(17);
  const Eigen::MatrixXd lambda = oracle::random_stable(5, gen);
  const Eigen::MatrixXd d = oracle::random_symmetric(5, gen);
  const double horizon = 40.0 / std::abs(spectral_abscissa(lambda));
  const Eigen::MatrixXd ref = oracle::lyapunov_integral(lambda, d, horizon);
  const auto sol = solve_lyapunov(lambda, d);
  EXPECT_LT((sol.x - ref).norm() / ref.norm(), 1e-6);
}

TEST(SolveLyapunov, ResidualAndSymmetryOnManyInstances) {
  std::mt19937_64 gen(23);
  std::uniform_int_distribution<int> dim(1, 12);
  for (int k = 0; k < 1000; ++k) {
    const int n = dim(gen);
    const Eigen::MatrixXd lambda = oracle::random_stable(n, gen, 1e-2);
    const Eigen::MatrixXd d = oracle::random_symmetric(n, gen);
    const auto sol = solve_lyapunov(lambda, d);
    EXPECT_EQ((sol.x - sol.x.transpose()).norm(), 0.0);
    const double scale = 1.0 + d.norm() + 2.0 * lambda.norm() * sol.x.norm();
    EXPECT_LE(sol.residual_norm, kLyapunovTolerance * scale) << "instance " << k;
  }
}

TEST(SolveLyapunov, UnstableIsRejected) {
  EXPECT_THROW(solve_lyapunov(Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity()), UnstableMatrix);
  Eigen::Matrix2d rot;
  rot << 0, 1,
        -1, 0;
  EXPECT_THROW(solve_lyapunov(rot, Eigen::Matrix2d::Identity()), UnstableMatrix);
}

TEST(SolveLyapunov, ShiftedAndAdjointSolvesShareOneDecomposition) {
  std::mt19937_64 gen(29);
  const Eigen::MatrixXd a = oracle::random_stable(7, gen);
  const Eigen::MatrixXd d = oracle::random_symmetric(7, gen);
  const ShiftedLyapunov<double> solver(a);
  for (double s : {0.0, 0.3, 2.0}) {
    const Eigen::MatrixXd as = a - s * Eigen::MatrixXd::Identity(7, 7);
    const Eigen::MatrixXd x = solver.solve(d, s);
    EXPECT_LT(lyapunov_residual(as, x, d), 1e-10 * (1 + d.norm()));
    const Eigen::MatrixXd y = solver.solve_adjoint(d, s);
    EXPECT_LT((as.transpose() * y + y * as + d).norm(), 1e-10 * (1 + d.norm()));
  }
  EXPECT_THROW(solver.solve(d, solver.abscissa() - 0.1), UnstableMatrix);
}

TEST(SolveLyapunov, LongDoubleInstantiation) {
  using M = DenseMatrix<long double>;
  M a(2, 2);
  a << -2, 1,
        0, -3;
  const M d = M::Identity(2, 2);
  const auto sol = solve_lyapunov(a, d);
  EXPECT_LT(static_cast<double>(sol.residual_norm), 1e-15);
}

TEST(Gramian, Scalar) {
  const Eigen::MatrixXd w = gramian(Eigen::Matrix<double, 1, 1>(-1.0), Eigen::Matrix<double, 1, 1>(1.0));
  EXPECT_NEAR(w(0, 0), 0.5, 1e-15);
}

TEST(Gramian, ZeroInitialState) {
  std::mt19937_64 gen(31);
  const Eigen::MatrixXd w = gramian(oracle::random_stable(4, gen), Eigen::VectorXd::Zero(4));
  EXPECT_TRUE(w.isZero(0.0));
}

TEST(Gramian, SingleRoadMatchesSimulatedOutputEnergy) {
  NetworkSpec spec;
  spec.step = 1.0;
  Road r;
  r.id = "r1";
  r.length = 3.0;
  r.free_flow_speed = 1.0;
  r.is_destination = true;
  r.exit_rate = 0.5;
  spec.roads.push_back(r);
  spec = validate_network(spec);
  const Eigen::MatrixXd a = mode_matrix(spec, {});
  const Eigen::MatrixXd c = output_map(spec);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Unit(3, 0);
  const double cost = congestion_cost(a, c, x0);

  AveragedSystem sys{a, Eigen::MatrixXd::Zero(3, 1), c, Eigen::VectorXd::Zero(1)};
  const Trajectory traj = simulate_average(sys, x0, 40.0 / std::abs(spectral_abscissa(a)), 0.01);
  EXPECT_NEAR(output_energy(traj) / cost, 1.0, 1e-4);
}

TEST(Gramian, PositiveSemidefinite) {
  std::mt19937_64 gen(37);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 50; ++k) {
    const Eigen::MatrixXd a = oracle::random_stable(8, gen, 1e-2);
    Eigen::VectorXd x0(8);
    for (auto& v : x0) v = normal(gen);
    const Eigen::MatrixXd w = gramian(a, x0);
    const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(w).eigenvalues().minCoeff();
    EXPECT_GE(lo, -1e-10 * w.norm());
  }
}

TEST(CongestionCost, Scalar) {
  EXPECT_NEAR(congestion_cost(Eigen::Matrix<double, 1, 1>(-1.0), Eigen::Matrix<double, 1, 1>(1.0),
                              Eigen::Matrix<double, 1, 1>(1.0)),
              0.5, 1e-15);
}

TEST(CongestionCost, UnstableIsInfinite) {
  EXPECT_TRUE(std::isinf(congestion_cost(Eigen::Matrix<double, 1, 1>(0.5), Eigen::Matrix<double, 1, 1>(1.0),
                                         Eigen::Matrix<double, 1, 1>(1.0))));
}

TEST(CongestionCost, ExampleNetworkMatchesSimulation) {
  const NetworkSpec spec = load_scenario(GREENSPLIT_TEST_SCENARIOS "/four_intersections.json");
  const ModeSet ms = assemble_modes(spec, uniform_schedule(spec));
  AveragedSystem sys = average_system(ms, spec);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Ones(spec.state_dim);
  const double cost = congestion_cost(sys.a, sys.c, x0);
  const double horizon = 40.0 / std::abs(spectral_abscissa(sys.a));
  EXPECT_NEAR(oracle::output_energy(sys.a, sys.c, x0, horizon) / cost, 1.0, 1e-4);
}

TEST(CongestionCost, MatchesOutputEnergyOnRandomSystems) {
  std::mt19937_64 gen(41);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 10; ++k) {
    const int n = 2 + k;
    const Eigen::MatrixXd a = oracle::random_stable(n, gen);
    Eigen::MatrixXd c(2, n);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = normal(gen);
    Eigen::VectorXd x0(n);
    for (auto& v : x0) v = normal(gen);
    const double cost = congestion_cost(a, c, x0);
    const double horizon = 40.0 / std::abs(spectral_abscissa(a));
    EXPECT_LT(std::abs(oracle::output_energy(a, c, x0, horizon) - cost) / cost, 1e-4);
  }
}
