#pragma once

#include <cmath>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "uavmg/io/csv.hpp"
#include "uavmg/match_graph.hpp"

namespace uavmg::io {

// Undirected DOT graph. Nodes carry their position in meters and an optional
// label; edges are listed in (i, j) order with the weight as label.
inline void export_dot(std::ostream& out, const WeightedGraph& g,
                       const std::vector<std::string>& labels = {}) {
  out << "graph G {\n";
  for (std::size_t v = 0; v < g.vertex_count(); ++v) {
    const Vec2& p = g.position(v);
    out << "  " << v << " [pos=\"" << format_g6(p.x()) << ',' << format_g6(p.y()) << '"';
    if (v < labels.size()) out << ", label=\"" << labels[v] << '"';
    out << "];\n";
  }
  for (const auto& e : g.sorted_edges()) {
    out << "  " << e.i << " -- " << e.j << " [label=\"" << format_g6(e.weight) << "\"];\n";
  }
  out << "}\n";
}

// Plain PGM adjacency image: cell (r, c) is round(255 w) of the edge between
// order[r] and order[c], 0 without an edge. `order` defaults to vertex order.
inline void export_adjacency_pgm(std::ostream& out, const WeightedGraph& g,
                                 std::vector<std::size_t> order = {}) {
  const std::size_t n = g.vertex_count();
  if (n == 0) throw InvalidArgument("adjacency image needs at least one vertex");
  if (order.empty()) {
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  if (order.size() != n) throw InvalidArgument("vertex order has the wrong size");
  std::vector<std::size_t> row_of(n);
  for (std::size_t r = 0; r < n; ++r) row_of.at(order[r]) = r;
  std::vector<int> cell(n * n, 0);
  for (const auto& e : g.edges()) {
    const int v = static_cast<int>(std::lround(255.0 * e.weight));
    cell[row_of[e.i] * n + row_of[e.j]] = v;
    cell[row_of[e.j] * n + row_of[e.i]] = v;
  }
  out << "P2\n" << n << ' ' << n << "\n255\n";
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      if (c) out << ' ';
      out << cell[r * n + c];
    }
    out << '\n';
  }
}

}  // namespace uavmg::io
