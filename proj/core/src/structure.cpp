#include "urnkit/structure.hpp"

#include <algorithm>

#include "urnkit/errors.hpp"

namespace urnkit {

StructureMatrix::StructureMatrix(int dim, bool fill) : d(dim) {
  if (dim < 1 || dim > kMaxDim) throw DomainError("StructureMatrix: dimension outside [1, 64]");
  nonzero.assign(static_cast<std::size_t>(dim) * dim, fill);
}

StructureMatrix StructureMatrix::from_pattern(const Matrix& h) {
  if (h.rows() != h.cols()) throw DomainError("StructureMatrix: matrix must be square");
  StructureMatrix s(static_cast<int>(h.rows()));
  for (int k = 0; k < s.d; ++k)
    for (int q = 0; q < s.d; ++q) s.set(k, q, h(k, q) != 0.0);
  return s;
}

namespace {

struct TarjanState {
  const StructureMatrix& s;
  std::vector<int> index, lowlink, stack_pos;
  std::vector<int> stack;
  int counter = 0;
  std::vector<std::vector<int>> sccs;  // reverse topological emission order

  explicit TarjanState(const StructureMatrix& sm)
      : s(sm), index(sm.d, -1), lowlink(sm.d, -1), stack_pos(sm.d, -1) {}

  void visit(int v) {
    index[v] = lowlink[v] = counter++;
    stack_pos[v] = static_cast<int>(stack.size());
    stack.push_back(v);
    for (int q = 0; q < s.d; ++q) {
      if (q == v || !s.at(v, q)) continue;
      if (index[q] == -1) {
        visit(q);
        lowlink[v] = std::min(lowlink[v], lowlink[q]);
      } else if (stack_pos[q] != -1) {
        lowlink[v] = std::min(lowlink[v], index[q]);
      }
    }
    if (lowlink[v] == index[v]) {
      const int base = stack_pos[v];
      std::vector<int> scc(stack.begin() + base, stack.end());
      for (int w : scc) stack_pos[w] = -1;
      stack.resize(static_cast<std::size_t>(base));
      sccs.push_back(std::move(scc));
    }
  }
};

}  // namespace

std::vector<std::vector<int>> strongly_connected_classes(const StructureMatrix& s) {
  if (s.d < 1) throw DomainError("strongly_connected_classes: empty structure");
  TarjanState t(s);
  for (int v = 0; v < s.d; ++v)
    if (t.index[v] == -1) t.visit(v);
  // Tarjan emits components after all their successors; reverse for a
  // topological order of the condensation.
  std::reverse(t.sccs.begin(), t.sccs.end());
  for (auto& c : t.sccs) std::sort(c.begin(), c.end());
  return t.sccs;
}

bool is_irreducible(const StructureMatrix& s) {
  return strongly_connected_classes(s).size() == 1;
}

}  // namespace urnkit
