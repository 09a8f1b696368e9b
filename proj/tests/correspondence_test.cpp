#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cablekit/correspondence.hpp"
#include "cablekit/operators.hpp"
#include "oracles.hpp"

using namespace cablekit;

namespace {

MetricGraphModel unit_star(int leaves) {
  MetricGraphModel::Builder b;
  b.vertex("o");
  for (int i = 0; i < leaves; ++i) {
    const auto id = "l" + std::to_string(i);
    b.vertex(id).edge("e" + std::to_string(i), "o", id, 1.0);
  }
  return b.build();
}

}  // namespace

TEST(Discretize, UnitStarGivesDegreeMeasureAndAdjacency) {
  const auto d = discretize(unit_star(3));
  EXPECT_DOUBLE_EQ(d.m(d.index("o")), 3.0);
  for (int i = 0; i < 3; ++i) {
    const auto leaf = d.index("l" + std::to_string(i));
    EXPECT_DOUBLE_EQ(d.m(leaf), 1.0);
    EXPECT_DOUBLE_EQ(d.b(d.index("o"), leaf), 1.0);
  }
}

TEST(Discretize, SumsParallelEdgesAndCountsLoopsTwice) {
  const auto g = MetricGraphModel::Builder{}
                     .vertex("a")
                     .vertex("b")
                     .edge("e", "a", "b", 2.0, 3.0, 4.0)  // ν/|e| = 2, |e|μ = 6
                     .edge("f", "a", "b", 0.5, 1.0, 1.0)  // ν/|e| = 2, |e|μ = 0.5
                     .edge("l", "a", "a", 1.5, 2.0, 7.0)  // |e|μ = 3, twice at a
                     .build();
  const auto d = discretize(g);
  EXPECT_DOUBLE_EQ(d.b(0, 1), 4.0);
  EXPECT_DOUBLE_EQ(d.b(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(d.m(0), 6.0 + 0.5 + 6.0);
  EXPECT_DOUBLE_EQ(d.m(1), 6.5);
}

TEST(IntrinsicLength, ScalesWithRootOfMuOverNu) {
  EXPECT_DOUBLE_EQ(intrinsic_length({"e", 0, 1, 2.0, 9.0, 4.0}), 3.0);
  const auto g = MetricGraphModel::Builder{}.vertex("a").vertex("b").edge("e", "a", "b", 2.0, 9.0, 4.0).edge("f", "a", "b", 5.0).build();
  EXPECT_DOUBLE_EQ(intrinsic_size(g), 5.0);
}

TEST(DefaultIntrinsicWeight, SaturatesTheTighterEndpoint) {
  const auto g = DiscreteGraph::Builder{}.vertex("a", 5).vertex("b", 1).edge("a", "b", 1).build();
  const auto p = default_intrinsic_weight(g);
  EXPECT_DOUBLE_EQ(p(0, 1), 1.0);
  EXPECT_TRUE(check_intrinsic_weight(g, p).ok);
}

TEST(Realize, AddsDeficitLoopWhenMassIsNotExhausted) {
  const auto g = DiscreteGraph::Builder{}.vertex("a", 5).vertex("b", 1).edge("a", "b", 1).build();
  const auto cs = realize(g);
  ASSERT_EQ(cs.loop_vertices.size(), 1u);
  EXPECT_EQ(cs.loop_vertices[0], 0u);
  EXPECT_DOUBLE_EQ(cs.deficits[0], 4.0);
  const auto back = discretize(cs.model);
  EXPECT_DOUBLE_EQ(back.m(0), 5.0);
  EXPECT_DOUBLE_EQ(back.m(1), 1.0);
  EXPECT_DOUBLE_EQ(back.b(0, 1), 1.0);
}

TEST(Realize, RejectsNonIntrinsicWeight) {
  const auto g = DiscreteGraph::Builder{}.vertex("a", 1).vertex("b", 1).edge("a", "b", 1).build();
  WeightFunction p;
  p.set(0, 1, 2.0);
  EXPECT_THROW(realize(g, p), DomainError);
}

TEST(Realize, RejectsWeightWithWrongSupport) {
  const auto g = DiscreteGraph::Builder{}.vertex("a", 1).vertex("b", 1).vertex("c", 1).edge("a", "b", 1).edge("b", "c", 1).build();
  WeightFunction p;
  p.set(0, 1, 0.5);
  EXPECT_THROW(realize(g, p), DomainError);
}

TEST(Realize, RoundTripPropertyOnRandomGraphs) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const auto g = oracle::random_connected(rng, 2 + trial % 25);
    const auto back = discretize(realize(g).model);
    for (Index u = 0; u < g.size(); ++u) {
      EXPECT_NEAR(back.m(u), g.m(u), 1e-12 * g.m(u));
      for (Index v = 0; v < g.size(); ++v) EXPECT_NEAR(back.b(u, v), g.b(u, v), 1e-12 * g.b(u, v));
    }
  }
}

TEST(Realize, UnitWeightOnTightGraphHasNoLoops) {
  // m(v) = Σ_u b(u, v) makes p ≡ 1 exactly intrinsic with zero deficits.
  const auto g = discretize(unit_star(4));
  const auto cs = realize(g, WeightFunction::constant(g, 1.0));
  EXPECT_TRUE(cs.loop_vertices.empty());
  EXPECT_EQ(cs.model.edge_count(), 4u);
}

TEST(HarmonicCorrespondence, DefectEqualsMinusMassTimesLaplacian) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 20; ++trial) {
    const auto model = oracle::random_model(rng, 3 + trial % 10, trial % 5);
    const auto g = discretize(model);
    VertexFunction fv(g.size());
    for (auto& x : fv) x = gauss(rng);
    const auto defect = kirchhoff_defect(model, extend_affine(model, fv));
    // independent evaluation of -m(v) (Lf)(v) = Σ_u b(u,v) (f(u) - f(v))
    for (Index v = 0; v < g.size(); ++v) {
      double expect = 0.0;
      for (Index u = 0; u < g.size(); ++u)
        if (u != v) expect += g.b(u, v) * (fv[u] - fv[v]);
      EXPECT_NEAR(defect[v], expect, 1e-12 * std::max(1.0, std::abs(expect)));
    }
  }
}

TEST(HarmonicCorrespondence, AffineFunctionHasZeroDefectAtInteriorOfPath) {
  const auto g = MetricGraphModel::Builder{}.vertex("a").vertex("b").vertex("c").edge("e", "a", "b", 1).edge("f", "b", "c", 2, 1, 2).build();
  const auto defect = kirchhoff_defect(g, extend_affine(g, {0.0, 1.0, 2.0}));
  EXPECT_NEAR(defect[1], 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(defect[0], 1.0);
  EXPECT_DOUBLE_EQ(defect[2], -1.0);
}

TEST(HarmonicCorrespondence, RestrictionInvertsExtension) {
  const auto g = unit_star(3);
  const VertexFunction fv{1.0, -2.0, 0.5, 3.0};
  EXPECT_EQ(restrict_to_vertices(extend_affine(g, fv)), fv);
}

TEST(HarmonicCorrespondence, DiscontinuousFunctionIsRejected) {
  const auto g = unit_star(1);
  EdgewiseFunction f{{0.0, 1.0}, {{0.0, 0.5}}};
  EXPECT_THROW(kirchhoff_defect(g, f), DomainError);
}

TEST(HarmonicCorrespondence, RefinedNodesGiveSameDefectForAffineData) {
  const auto g = MetricGraphModel::Builder{}.vertex("a").vertex("b").edge("e", "a", "b", 2.0, 1.0, 3.0).build();
  EdgewiseFunction f{{1.0, 3.0}, {{1.0, 1.5, 2.0, 2.5, 3.0}}};
  const auto defect = kirchhoff_defect(g, f);
  EXPECT_DOUBLE_EQ(defect[0], 3.0);
  EXPECT_DOUBLE_EQ(defect[1], -3.0);
}
