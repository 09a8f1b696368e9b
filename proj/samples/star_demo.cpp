// Realizes a weighted star as a cable system and compares the two spectra.
#include <cstdio>

#include "cablekit/cablekit.hpp"

int main() {
  using namespace cablekit;
  DiscreteGraph::Builder b;
  b.vertex("hub", 3.0);
  for (const char* leaf : {"a", "b", "c"}) {
    b.vertex(leaf, 1.0);
    b.edge("hub", leaf, 1.0);
  }
  const auto g = b.build();

  const auto cable = realize(g);
  std::printf("cable system: %zu edges, %zu deficit loops\n", cable.model.edge_count(), cable.loop_vertices.size());

  const auto back = discretize(cable.model);
  for (Index v = 0; v < g.size(); ++v)
    std::printf("  m(%s) = %.6f  recovered %.6f\n", g.id(v).c_str(), g.m(v), back.m(v));

  const auto discrete = spectrum_discrete(g);
  std::printf("discrete spectrum:");
  for (double x : discrete.eigenvalues) std::printf(" %.6f", x);
  std::printf("\n");

  const auto metric = spectrum_metric(cable.model, 0.01, 6);
  std::printf("lowest metric eigenvalues:");
  for (double x : metric.eigenvalues) std::printf(" %.6f", x);
  std::printf("\n");
}
