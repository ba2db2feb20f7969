#pragma once

#include <vector>

#include "urnkit/linalg.hpp"

namespace urnkit {

inline constexpr int kMaxDim = 64;

// Boolean pattern of a replacement policy: entry (k,q) is true iff the
// (k,q) replacement entry is nonzero with positive probability.
struct StructureMatrix {
  int d = 0;
  std::vector<bool> nonzero;  // row-major d*d

  StructureMatrix() = default;
  StructureMatrix(int dim, bool fill = false);

  bool at(int k, int q) const { return nonzero[static_cast<std::size_t>(k) * d + q]; }
  void set(int k, int q, bool v) { nonzero[static_cast<std::size_t>(k) * d + q] = v; }

  // Pattern of a fixed matrix: entries that are exactly nonzero.
  static StructureMatrix from_pattern(const Matrix& h);
};

// Maximal strongly connected components of the off-diagonal digraph
// (edge k -> q iff nonzero(k,q) and k != q), returned in a topological
// order of the condensation; members of each class sorted ascending.
std::vector<std::vector<int>> strongly_connected_classes(const StructureMatrix& s);

// True iff the off-diagonal digraph is strongly connected.
bool is_irreducible(const StructureMatrix& s);

}  // namespace urnkit
