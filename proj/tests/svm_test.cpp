#include "pfsvm/svm.hpp"

#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "dual_oracle.hpp"

namespace pfsvm {
namespace {

struct Problem {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd cost;
};

Problem four_points(double cost = 10.0) {
  Problem p;
  p.x.resize(4, 2);
  p.x << 0, 0, 0, 1, 2, 0, 2, 1;
  p.y.resize(4);
  p.y << -1, -1, 1, 1;
  p.cost = Eigen::VectorXd::Constant(4, cost);
  return p;
}

// Random 2-D instance with both classes present.
Problem random_problem(std::mt19937& rng, int n, bool separable = false) {
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> cost(0.1, 10.0);
  Problem p;
  p.x.resize(n, 2);
  p.y.resize(n);
  p.cost.resize(n);
  for (int i = 0; i < n; ++i) {
    p.y[i] = i % 2 == 0 ? 1.0 : -1.0;
    const double shift = separable ? 3.0 * p.y[i] : 0.6 * p.y[i];
    p.x(i, 0) = coord(rng) + shift;
    p.x(i, 1) = coord(rng);
    p.cost[i] = cost(rng);
  }
  return p;
}

SvmModeld hand_model(double w0, double w1, double b) {
  SvmModeld m;
  m.normal = Eigen::Vector2d(w0, w1);
  m.offset = b;
  m.margin_width = 2.0 / m.normal.norm();
  return m;
}

void expect_type_invariants(const SvmModeld& m, const Problem& p) {
  for (Eigen::Index i = 0; i < p.y.size(); ++i) {
    EXPECT_GE(m.duals[i], 0.0);
    EXPECT_LE(m.duals[i], m.per_sample_cost[i]);
  }
  EXPECT_LE(std::abs(m.duals.dot(p.y)), 1e-8 * m.duals.sum() + 1e-12);
  const Eigen::VectorXd normal = p.x.transpose() * m.duals.cwiseProduct(p.y);
  EXPECT_TRUE(normal.isApprox(m.normal, 1e-12) || (normal - m.normal).norm() < 1e-12);
  EXPECT_GT(m.margin_width, 0.0);
  EXPECT_NEAR(m.margin_width, 2.0 / m.normal.norm(), 1e-12);
}

TEST(SvmTrain, SymmetricFourPointsGivePerpendicularBisector) {
  const Problem p = four_points();
  const SvmModeld m = train(p.x, p.y, p.cost);
  ASSERT_TRUE(m.converged);
  EXPECT_NEAR(m.normal[0], 1.0, 1e-3);
  EXPECT_NEAR(m.normal[1], 0.0, 1e-3);
  EXPECT_NEAR(m.offset, -1.0, 1e-3);
  EXPECT_NEAR(m.margin_width, 2.0, 2e-3);
  EXPECT_NEAR(decision_value(m, Eigen::Vector2d(1.0, 0.7)), 0.0, 1e-3);
  EXPECT_NEAR(decision_value(m, Eigen::Vector2d(0.0, 0.0)), -1.0, 1e-3);
  EXPECT_NEAR(decision_value(m, Eigen::Vector2d(2.0, 0.5)), 1.0, 1e-3);
  expect_type_invariants(m, p);
}

TEST(SvmTrain, HugeCostMatchesHardMargin) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Problem p = random_problem(rng, 10, /*separable=*/true);
    p.cost.setConstant(1e6);
    TrainOptions opts;
    opts.tolerance = 1e-8;
    const SvmModeld m = train(p.x, p.y, p.cost, opts);
    ASSERT_TRUE(m.converged);
    EXPECT_LT(slack_of(m, p.x, p.y).maxCoeff(), 1e-6);
    // Hard margin: no dual reaches the (huge) box.
    EXPECT_LT(m.duals.maxCoeff(), 1e5);
    const auto oracle = testing::solve_dual_oracle(p.x, p.y, Eigen::VectorXd::Constant(10, 1e6));
    EXPECT_NEAR(m.dual_objective, oracle.dual_objective, 1e-4 * std::abs(oracle.dual_objective));
  }
}

TEST(SvmTrain, MatchesProjectedGradientOracleOnRandomInstances) {
  std::mt19937 rng(20240611);
  TrainOptions opts;
  opts.tolerance = 1e-6;
  for (int trial = 0; trial < 120; ++trial) {
    const int n = 4 + trial % 9;  // 4..12 points
    const Problem p = random_problem(rng, n);
    const SvmModeld m = train(p.x, p.y, p.cost, opts);
    ASSERT_TRUE(m.converged) << "trial " << trial;
    const auto oracle = testing::solve_dual_oracle(p.x, p.y, p.cost);
    EXPECT_NEAR(m.dual_objective, oracle.dual_objective, 1e-4 * std::abs(oracle.dual_objective))
        << "trial " << trial;
    EXPECT_LE(kkt_violation(m, p.x, p.y), opts.tolerance) << "trial " << trial;
    expect_type_invariants(m, p);
  }
}

TEST(SvmTrain, DualObjectiveNeverDecreases) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Problem p = random_problem(rng, 12);
    std::vector<double> trace{0.0};
    TrainOptions opts;
    opts.tolerance = 1e-8;
    opts.on_update = [&](double value) { trace.push_back(value); };
    const SvmModeld m = train(p.x, p.y, p.cost, opts);
    ASSERT_TRUE(m.converged);
    for (std::size_t s = 1; s < trace.size(); ++s)
      EXPECT_GE(trace[s], trace[s - 1] - 1e-12 * std::max(1.0, std::abs(trace[s - 1]))) << "step " << s;
    EXPECT_NEAR(trace.back(), m.dual_objective, 1e-9 * std::max(1.0, std::abs(m.dual_objective)));
  }
}

// With c_i = gamma * v_i the optimal sum(v_i zeta_i) is non-increasing in
// gamma: adding the two optimality inequalities for gamma_1 < gamma_2 gives
// (gamma_2 - gamma_1)(S_2 - S_1) <= 0. With equal costs this is the plain
// total slack.
TEST(SvmTrain, ScalingCostsUpNeverAddsWeightedSlack) {
  std::mt19937 rng(99);
  TrainOptions opts;
  opts.tolerance = 1e-8;
  for (int trial = 0; trial < 15; ++trial) {
    Problem p = random_problem(rng, 10);
    if (trial % 2 == 0) p.cost.setConstant(p.cost[0]);
    double previous = std::numeric_limits<double>::infinity();
    for (double gamma : {1.0, 1.5, 4.0, 20.0}) {
      const SvmModeld m = train(p.x, p.y, Eigen::VectorXd(gamma * p.cost), opts);
      const double slack = p.cost.dot(slack_of(m, p.x, p.y));
      EXPECT_LE(slack, previous + 1e-5 * (1.0 + slack)) << "trial " << trial << " gamma " << gamma;
      previous = slack;
    }
  }
}

TEST(SvmTrain, SingleClassIsATrainingError) {
  Problem p = four_points();
  p.y.setConstant(1.0);
  EXPECT_THROW(train(p.x, p.y, p.cost), TrainingError);
}

TEST(SvmTrain, RejectsNonPositiveCosts) {
  Problem p = four_points();
  p.cost[2] = 0.0;
  EXPECT_THROW(train(p.x, p.y, p.cost), ArgumentError);
  p.cost[2] = -1.0;
  EXPECT_THROW(train(p.x, p.y, p.cost), ArgumentError);
}

TEST(SvmTrain, ReportsNonConvergenceInsteadOfLooping) {
  std::mt19937 rng(3);
  const Problem p = random_problem(rng, 12);
  TrainOptions opts;
  opts.tolerance = 1e-12;
  opts.max_passes = 0;
  const SvmModeld m = train(p.x, p.y, p.cost, opts);
  EXPECT_FALSE(m.converged);
  EXPECT_EQ(m.iterations, 0);
}

TEST(SvmTrain, WorksForFloatScalars) {
  const Problem p = four_points();
  const SvmModel<float> m = train(p.x.cast<float>(), p.y.cast<float>(), p.cost.cast<float>());
  ASSERT_TRUE(m.converged);
  EXPECT_NEAR(m.margin_width, 2.0f, 1e-2f);
  EXPECT_EQ(predict_sign(m, Eigen::Vector2f(3.0f, 0.0f)), Label::Malignant);
}

TEST(SvmDecision, ValueAndSign) {
  const SvmModeld m = hand_model(1.0, 0.0, -1.0);
  EXPECT_DOUBLE_EQ(decision_value(m, Eigen::Vector2d(1.0, 5.0)), 0.0);
  EXPECT_EQ(predict_sign(hand_model(0.0, 0.0, 3.2), Eigen::Vector2d(0, 0)), Label::Malignant);
  EXPECT_EQ(predict_sign(hand_model(0.0, 0.0, -0.01), Eigen::Vector2d(0, 0)), Label::Benign);
  EXPECT_EQ(predict_sign(hand_model(0.0, 0.0, 0.0), Eigen::Vector2d(0, 0)), Label::Malignant);
}

TEST(SvmDecision, InMarginIsStrict) {
  EXPECT_TRUE(in_margin(hand_model(0, 0, 0.5), Eigen::Vector2d(0, 0)));
  EXPECT_FALSE(in_margin(hand_model(0, 0, 1.0), Eigen::Vector2d(0, 0)));
  EXPECT_FALSE(in_margin(hand_model(0, 0, -1.0), Eigen::Vector2d(0, 0)));
  EXPECT_FALSE(in_margin(hand_model(0, 0, -3.0), Eigen::Vector2d(0, 0)));
}

TEST(SvmDecision, SlackFromDefinition) {
  const SvmModeld m = hand_model(1.0, 0.0, 0.0);
  Eigen::MatrixXd x(3, 2);
  x << 3.0, 0.0,   // correct side, outside the margin
      1.0, 0.0,    // on its own margin hyperplane
      -0.5, 0.0;   // misclassified
  const Eigen::Vector3d y(1.0, 1.0, 1.0);
  const Eigen::VectorXd slack = slack_of(m, x, y);
  EXPECT_DOUBLE_EQ(slack[0], 0.0);
  EXPECT_DOUBLE_EQ(slack[1], 0.0);
  EXPECT_DOUBLE_EQ(slack[2], 1.5);
}

TEST(SvmDecision, DimensionMismatchThrows) {
  const SvmModeld m = hand_model(1.0, 0.0, 0.0);
  EXPECT_THROW(decision_value(m, Eigen::Vector3d(1, 2, 3)), ArgumentError);
  EXPECT_THROW(in_margin(m, Eigen::Vector3d(1, 2, 3)), ArgumentError);
  EXPECT_THROW(slack_of(m, Eigen::MatrixXd::Zero(2, 3), Eigen::Vector2d(1, -1)), ArgumentError);
}

TEST(SvmOffset, FallsBackToFeasibleMidpointWithoutFreeVectors) {
  // Every dual at its bound: a = 0 for all, so the offset comes from the
  // interval [max over y=+1 of 1 - x·w, min over y=-1 of -1 - x·w].
  Eigen::MatrixXd x(2, 1);
  x << 3.0, -3.0;
  const Eigen::Vector2d y(1.0, -1.0);
  const Eigen::Vector2d alpha(0.0, 0.0);
  const Eigen::Vector2d cost(1.0, 1.0);
  const Eigen::VectorXd normal = Eigen::VectorXd::Constant(1, 1.0);
  // y=+1: b >= 1 - 3 = -2; y=-1: b <= -1 + 3 = 2.
  EXPECT_DOUBLE_EQ(detail::compute_offset<double>(x, y, alpha, cost, normal), 0.0);
}

}  // namespace
}  // namespace pfsvm
