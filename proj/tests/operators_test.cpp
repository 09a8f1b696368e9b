#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cablekit/correspondence.hpp"
#include "cablekit/operators.hpp"
#include "oracles.hpp"

using namespace cablekit;

namespace {

constexpr double kPi = std::numbers::pi;

MetricGraphModel interval(double length = 1.0) {
  return MetricGraphModel::Builder{}.vertex("0").vertex("1").edge("e", "0", "1", length).build();
}

MetricGraphModel circle(double length = 1.0) {
  return MetricGraphModel::Builder{}.vertex("p").edge("c", "p", "p", length).build();
}

MetricGraphModel unit_star(int leaves) {
  MetricGraphModel::Builder b;
  b.vertex("o");
  for (int i = 0; i < leaves; ++i) {
    const auto id = "l" + std::to_string(i);
    b.vertex(id).edge("e" + std::to_string(i), "o", id, 1.0);
  }
  return b.build();
}

SimpleGraph cycle(std::size_t n) {
  std::vector<std::pair<Index, Index>> e;
  for (Index i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
  return SimpleGraph(oracle::numbered_ids(n), e);
}

}  // namespace

TEST(DiscreteLaplacian, ActsByWeightedDifferences) {
  const auto g = DiscreteGraph::Builder{}.vertex("a", 2).vertex("b", 1).vertex("c", 4).edge("a", "b", 3).edge("b", "c", 1).build();
  const auto lf = apply_discrete_laplacian(g, {1.0, 0.0, 2.0});
  EXPECT_DOUBLE_EQ(lf[0], 3.0 * 1.0 / 2.0);
  EXPECT_DOUBLE_EQ(lf[1], (3.0 * -1.0 + 1.0 * -2.0) / 1.0);
  EXPECT_DOUBLE_EQ(lf[2], 1.0 * 2.0 / 4.0);
  EXPECT_DOUBLE_EQ(weighted_degree(g)[1], 4.0);
}

TEST(DiscreteLaplacian, GreenIdentityOnRandomGraphs) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = oracle::random_connected(rng, 3 + trial);
    VertexFunction f(g.size());
    for (auto& x : f) x = gauss(rng);
    const double q = energy_form_discrete(g, f);
    EXPECT_NEAR(inner_product(g, apply_discrete_laplacian(g, f), f), q, 1e-10 * std::max(1.0, q));
    EXPECT_GE(q, 0.0);
  }
}

TEST(DiscreteSpectrum, NormalizedThreeStar) {
  const auto s = spectrum_discrete(discretize(unit_star(3)));
  ASSERT_EQ(s.eigenvalues.size(), 4u);
  const std::vector<double> expect{0.0, 1.0, 1.0, 2.0};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(s.eigenvalues[i], expect[i], 1e-12);
}

TEST(DiscreteSpectrum, NormalizedCycleMatchesClosedForm) {
  for (std::size_t n : {3u, 4u, 7u, 12u}) {
    const auto s = spectrum_discrete(normalized_laplacian(cycle(n)));
    const auto ref = oracle::cycle_normalized(n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(s.eigenvalues[i], ref[i], 1e-12);
  }
}

TEST(DiscreteSpectrum, CombinatorialCycleIsTwiceNormalized) {
  const auto s = spectrum_discrete(combinatorial_laplacian(cycle(6)));
  const auto ref = oracle::cycle_normalized(6);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(s.eigenvalues[i], 2.0 * ref[i], 1e-12);
}

TEST(DiscreteSpectrum, EigenvectorsAreMassOrthonormalAndSatisfyEquation) {
  std::mt19937_64 rng(2);
  const auto g = oracle::random_connected(rng, 12);
  const auto s = spectrum_discrete(g);
  ASSERT_TRUE(s.complete());
  const Eigen::MatrixXd gram = s.eigenvectors.transpose() * s.mass * s.eigenvectors;
  EXPECT_LT((gram - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff(), 1e-10);
  for (int j = 0; j < 12; ++j) {
    VertexFunction f(12);
    for (int i = 0; i < 12; ++i) f[i] = s.eigenvectors(i, j);
    const auto lf = apply_discrete_laplacian(g, f);
    for (int i = 0; i < 12; ++i) EXPECT_NEAR(lf[i], s.eigenvalues[j] * f[i], 1e-9 * std::max(1.0, s.eigenvalues[j]));
  }
}

TEST(DiscreteSpectrum, LargestEigenvalueMatchesPowerIteration) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const auto g = oracle::random_connected(rng, 6 + trial);
    const double ref = oracle::largest_eigenvalue(g);
    EXPECT_NEAR(spectrum_discrete(g).eigenvalues.back(), ref, 1e-7 * ref);
  }
}

TEST(DiscreteSpectrum, CapacityLimitIsEnforced) {
  std::mt19937_64 rng(1);
  const auto g = oracle::random_connected(rng, 10);
  EXPECT_THROW(spectrum_discrete(g, {5, false}), CapacityError);
}

TEST(ClusterEigenvalues, GroupsNearlyEqualValues) {
  const auto c = cluster_eigenvalues({0.0, 1.0, 1.0 + 1e-12, 2.0});
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[1].multiplicity, 2u);
}

TEST(Skeleton, RejectsLoopsAndParallelEdges) {
  EXPECT_THROW(skeleton(circle()), InvalidGraph);
}

TEST(Fem, ElementCountCoversEdge) {
  EXPECT_EQ(element_count(1.0, 0.01), 100u);
  EXPECT_EQ(element_count(1.0, 0.3), 4u);
  EXPECT_EQ(element_count(0.001, 0.1), 1u);
  const auto fem = assemble_fem(interval(), 0.1);
  EXPECT_EQ(fem.dof_count, 11u);
  EXPECT_EQ(assemble_fem(interval(), 0.1, {0, 1}).dof_count, 9u);
  EXPECT_EQ(assemble_fem(circle(), 0.1).dof_count, 10u);
}

TEST(MetricSpectrum, IntervalNeumannConvergesQuadratically) {
  const auto coarse = spectrum_metric(interval(), 0.02, 4);
  const auto fine = spectrum_metric(interval(), 0.01, 4);
  EXPECT_NEAR(fine.eigenvalues[0], 0.0, 1e-9);
  for (std::size_t k = 1; k < 4; ++k) {
    const double ref = oracle::interval_neumann(k);
    const double e1 = std::abs(coarse.eigenvalues[k] - ref);
    const double e2 = std::abs(fine.eigenvalues[k] - ref);
    EXPECT_LT(e2 / ref, 1e-3);
    EXPECT_GT(e1 / e2, 3.0);
  }
}

TEST(MetricSpectrum, IntervalDirichlet) {
  const auto s = spectrum_metric(interval(2.0), 0.01, 3, {0, 1});
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(s.eigenvalues[k], oracle::interval_neumann(k + 1, 2.0), 2e-3 * (k + 1) * (k + 1));
}

TEST(MetricSpectrum, CircleHasDoubleEigenvalues) {
  // (4π)² carries FEM error ≈ λ h²/12 relative, so refine below h = 0.01
  const auto s = spectrum_metric(circle(), 0.005, 5);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(s.eigenvalues[i], oracle::circle(i), 1e-3 * std::max(1.0, oracle::circle(i)));
}

TEST(MetricSpectrum, WeightedEdgeScalesByNuOverMu) {
  const auto g = MetricGraphModel::Builder{}.vertex("0").vertex("1").edge("e", "0", "1", 1.0, 2.0, 8.0).build();
  const auto s = spectrum_metric(g, 0.01, 2);
  EXPECT_NEAR(s.eigenvalues[1], 4.0 * kPi * kPi, 4e-3 * kPi * kPi);
}

TEST(MetricSpectrum, UnitStarMatchesSecularEquation) {
  const auto s = spectrum_metric(unit_star(3), 0.005, 6);
  const std::vector<double> ref{0.0, kPi * kPi / 4, kPi * kPi / 4, kPi * kPi, 9 * kPi * kPi / 4, 9 * kPi * kPi / 4};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(s.eigenvalues[i], ref[i], 1e-3 * std::max(1.0, ref[i]));
}

TEST(MetricSpectrum, TooManyEigenvaluesIsDomainError) {
  EXPECT_THROW(spectrum_metric(interval(), 0.5, 10), DomainError);
  EXPECT_THROW(spectrum_metric(interval(), 0.001, 3, {}, {100, false}), CapacityError);
}

TEST(MetricEnergy, AffineExtensionReproducesDiscreteEnergy) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 10; ++trial) {
    const auto model = oracle::random_model(rng, 4 + trial, 3);
    VertexFunction fv(model.vertex_count());
    for (auto& x : fv) x = gauss(rng);
    const double q = energy_form_discrete(discretize(model), fv);
    EXPECT_NEAR(energy_form_metric(model, extend_affine(model, fv)), q, 1e-12 * std::max(1.0, q));
  }
}

TEST(MetricEnergy, FemQuadraticFormMatchesIntegral) {
  const auto g = unit_star(3);
  const auto fem = assemble_fem(g, 0.1);
  const auto f = extend_affine(g, {1.0, 0.0, 2.0, -1.0});
  const Eigen::VectorXd x = fem_interpolate(fem, g, f);
  EXPECT_NEAR(x.dot(fem.stiffness * x), energy_form_metric(g, f), 1e-12);
}

TEST(HeatSemigroup, ConservesMassAndEquilibrates) {
  std::mt19937_64 rng(6);
  const auto g = oracle::random_connected(rng, 10);
  const auto s = spectrum_discrete(g);
  VertexFunction f0(10, 0.0);
  f0[3] = 1.0;
  const double total = inner_product(g, f0, VertexFunction(10, 1.0));
  double mass_sum = 0.0;
  for (Index v = 0; v < 10; ++v) mass_sum += g.m(v);
  const auto at0 = heat_semigroup(s, 0.0, f0);
  for (Index v = 0; v < 10; ++v) EXPECT_NEAR(at0[v], f0[v], 1e-10);
  for (double t : {0.1, 1.0, 10.0}) {
    const auto ft = heat_semigroup(s, t, f0);
    EXPECT_NEAR(inner_product(g, ft, VertexFunction(10, 1.0)), total, 1e-10);
    for (double x : ft) EXPECT_GE(x, -1e-10);
  }
  const auto late = heat_semigroup(s, 1e4, f0);
  for (double x : late) EXPECT_NEAR(x, total / mass_sum, 1e-8);
  EXPECT_THROW(heat_semigroup(s, -1.0, f0), DomainError);
}

TEST(HeatSemigroup, IntervalCosineModeDecays) {
  const auto g = interval();
  const double h = 0.01;
  const auto fem = assemble_fem(g, h);
  const auto s = spectrum_metric(g, h, fem.dof_count);
  EdgewiseFunction f{{1.0, -1.0}, {{}}};
  for (std::size_t i = 0; i <= 100; ++i) f.edge_nodes[0].push_back(std::cos(kPi * static_cast<double>(i) / 100.0));
  const Eigen::VectorXd x0 = fem_interpolate(fem, g, f);
  const Eigen::VectorXd xt = heat_semigroup(s, 0.1, x0);
  const double factor = std::exp(-kPi * kPi * 0.1);
  EXPECT_NEAR(xt(static_cast<Eigen::Index>(fem.vertex_dof[0])), factor, 1e-3);
}

TEST(EquilateralCheck, StarAndSquareSatisfyCorrespondence) {
  const auto square = MetricGraphModel::Builder{}
                          .vertex("a").vertex("b").vertex("c").vertex("d")
                          .edge("ab", "a", "b", 1.0).edge("bc", "b", "c", 1.0)
                          .edge("cd", "c", "d", 1.0).edge("da", "d", "a", 1.0)
                          .build();
  EquilateralOptions opt;
  opt.h = 0.01;
  for (const auto& g : {unit_star(3), square}) {
    const auto rep = equilateral_correspondence_check(g, opt);
    EXPECT_TRUE(rep.ok);
    EXPECT_GT(rep.checked, 3u);
    for (const auto& e : rep.entries) EXPECT_LE(e.lambda, opt.lambda_cap);
  }
}

TEST(EquilateralCheck, RejectsNonEquilateralModels) {
  const auto g = MetricGraphModel::Builder{}.vertex("a").vertex("b").vertex("c").edge("e", "a", "b", 1.0).edge("f", "b", "c", 2.0).build();
  EXPECT_THROW(equilateral_correspondence_check(g), DomainError);
}
