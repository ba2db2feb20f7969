#include "urnkit/linalg.hpp"

#include <algorithm>
#include <functional>
#include <vector>

namespace urnkit {

RowVec project_to_simplex(const RowVec& y) {
  const int n = static_cast<int>(y.size());
  std::vector<double> u(y.data(), y.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  for (int i = 0; i < n; ++i) {
    cum += u[i];
    const double t = (cum - 1.0) / (i + 1);
    if (u[i] - t > 0.0) tau = t;
  }
  RowVec out(n);
  for (int i = 0; i < n; ++i) out(i) = std::max(y(i) - tau, 0.0);
  return out;
}

}  // namespace urnkit
