#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "anoml/bytes.hpp"
#include "anoml/detect/isolation_forest.hpp"
#include "oracles.hpp"

using namespace anoml::detect;

namespace {

Eigen::MatrixXd gaussian(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = g(rng);
  return m;
}

// Path length by walking the stored tree directly.
double oracle_path(const IsolationTree& t, const Eigen::VectorXd& x) {
  std::size_t node = 0;
  double depth = 0;
  while (!t.nodes[node].external()) {
    const auto& n = t.nodes[node];
    node = static_cast<std::size_t>(x(n.feature) < n.split ? n.left : n.right);
    depth += 1;
  }
  return depth + oracle::iforest_c(t.nodes[node].size);
}

}  // namespace

TEST(IsolationForest, AveragePathLength) {
  EXPECT_EQ(average_path_length(0), 0.0);
  EXPECT_EQ(average_path_length(1), 0.0);
  EXPECT_NEAR(average_path_length(2), 0.1544313298, 1e-10);
  EXPECT_NEAR(average_path_length(256), oracle::iforest_c(256), 1e-12);
}

TEST(IsolationForest, ScoreIsHalfAtExpectedPathLength) {
  const double psi = 256;
  EXPECT_DOUBLE_EQ(std::exp2(-average_path_length(psi) / average_path_length(psi)), 0.5);
}

TEST(IsolationForest, MatchesTreeWalkOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t n = 2 + seed % 7;
    const auto data = gaussian(n, 2, seed);
    const auto f = IsolationForest::fit(data, {1 + seed % 3, n, seed});
    const auto probes = gaussian(10, 2, seed + 100);
    for (Eigen::Index i = 0; i < probes.rows(); ++i) {
      const Eigen::VectorXd x = probes.row(i).transpose();
      double h = 0;
      for (const auto& t : f.trees()) h += oracle_path(t, x);
      h /= static_cast<double>(f.trees().size());
      const double expected = std::exp2(-h / oracle::iforest_c(static_cast<double>(n)));
      EXPECT_NEAR(f.path_length(x), h, 1e-12);
      EXPECT_NEAR(f.score(x).value, expected, 1e-12);
    }
  }
}

TEST(IsolationForest, TreeStructureInvariants) {
  const auto data = gaussian(300, 3, 4);
  const auto f = IsolationForest::fit(data, {10, 64, 4});
  EXPECT_EQ(f.height_limit(), 6u);
  for (const auto& t : f.trees()) {
    std::uint32_t total = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [node, depth] = stack.back();
      stack.pop_back();
      const auto& nd = t.nodes[node];
      EXPECT_LE(depth, f.height_limit());
      if (nd.external()) {
        total += nd.size;
      } else {
        stack.push_back({static_cast<std::size_t>(nd.left), depth + 1});
        stack.push_back({static_cast<std::size_t>(nd.right), depth + 1});
      }
    }
    EXPECT_EQ(total, 64u);
  }
}

TEST(IsolationForest, ScoresInUnitInterval) {
  const auto data = gaussian(200, 4, 2);
  const auto f = IsolationForest::fit(data, {50, 64, 2});
  const auto scores = f.score_all(gaussian(100, 4, 3) * 5.0);
  EXPECT_GT(scores.minCoeff(), 0.0);
  EXPECT_LE(scores.maxCoeff(), 1.0);
}

TEST(IsolationForest, PlantedOutlierScoresHighest) {
  Eigen::MatrixXd data = gaussian(500, 2, 1);
  data.row(250) << 10, 10;
  const auto f = IsolationForest::fit(data, {100, 256, 1});
  const auto scores = f.score_all(data);
  Eigen::Index top = 0;
  scores.maxCoeff(&top);
  EXPECT_EQ(top, 250);
}

TEST(IsolationForest, TinyAndDegenerateInputs) {
  Eigen::MatrixXd same(2, 2);
  same << 1, 1, 1, 1;
  const auto f = IsolationForest::fit(same, {10, 256, 0});
  EXPECT_EQ(f.subsample_size(), 256u);
  const double s = f.score(Eigen::Vector2d(1, 1)).value;
  EXPECT_GT(s, 0.0);
  EXPECT_LE(s, 1.0);
  EXPECT_THROW(IsolationForest::fit(Eigen::MatrixXd(0, 2), {}), DetectError);
  EXPECT_THROW(IsolationForest::fit(same, {0, 256, 0}), DetectError);
  EXPECT_THROW(f.score(Eigen::Vector3d(1, 1, 1)), DetectError);
}

TEST(IsolationForest, DeterministicInSeed) {
  const auto data = gaussian(100, 3, 8);
  const auto a = IsolationForest::fit(data, {20, 32, 9});
  const auto b = IsolationForest::fit(data, {20, 32, 9});
  const auto c = IsolationForest::fit(data, {20, 32, 10});
  EXPECT_EQ(a.score_all(data), b.score_all(data));
  EXPECT_NE(a.score_all(data), c.score_all(data));
}

TEST(IsolationForest, Contamination) {
  const auto data = gaussian(200, 2, 5);
  auto f = IsolationForest::fit(data, {50, 128, 5});
  const auto scores = f.score_all(data);
  f.set_contamination(scores, 0.1);
  const auto flagged = (scores.array() > f.threshold()).count();
  EXPECT_NEAR(static_cast<double>(flagged), 20.0, 2.0);
}

TEST(IsolationForest, SaveLoadRoundTrip) {
  const auto data = gaussian(100, 3, 6);
  const auto f = IsolationForest::fit(data, {15, 50, 6});
  anoml::bytes::Writer w;
  f.save(w);
  anoml::bytes::Reader r(w.data());
  const auto g = IsolationForest::load(r);
  EXPECT_EQ(f.score_all(data), g.score_all(data));
  EXPECT_EQ(r.remaining(), 0u);
}
