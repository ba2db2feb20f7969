#include "urnkit/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <complex>

#include "urnkit/errors.hpp"

namespace urnkit {

namespace {

constexpr double kEigenTol = 1e-8;
constexpr double kPowerIterTol = 1e-12;
constexpr long kPowerIterCap = 1000000;

double cluster_width(double lambda_h) { return kEigenTol * std::max(1.0, std::abs(lambda_h)); }

// Dominant eigenpair of a nonnegative matrix by power iteration.
// Returns the eigenvalue; the (nonnegative, sum-one) eigenvector in v.
// Stops on a 1e-12 eigenvalue increment once the residual is small too.
double power_iteration(const Matrix& b, ColVec& v) {
  const auto m = b.rows();
  v = ColVec::Constant(m, 1.0 / static_cast<double>(m));
  double lambda = 0.0;
  ColVec w(m);
  for (long it = 0; it < kPowerIterCap; ++it) {
    w.noalias() = b * v;
    const double next = w.sum();
    if (next <= 0.0) break;  // nonnegative input, only at numerical zero
    const double resid = (w - next * v).cwiseAbs().maxCoeff();
    const bool done = std::abs(next - lambda) < kPowerIterTol &&
                      resid < 1e-11 * std::max(1.0, std::abs(next));
    lambda = next;
    w /= next;
    v.swap(w);
    if (done) break;
  }
  return lambda;
}

Matrix submatrix(const Matrix& h, const std::vector<int>& rows, const std::vector<int>& cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = h(rows[i], cols[j]);
  return out;
}

// Rank of a complex matrix with singular values below tol treated as zero.
long numeric_rank(const Eigen::MatrixXcd& a, double tol) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
  long rank = 0;
  for (long i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol) ++rank;
  return rank;
}

// Largest Jordan block size of eigenvalue lam: the smallest k at which
// rank((H - lam I)^k) stabilizes. Thresholds scale with ||H||^k so the
// zero modes of higher powers stay below them.
int jordan_block_size(const Matrix& h, std::complex<double> lam) {
  const long d = h.rows();
  const double scale = std::max(1.0, max_row_sum_norm(h));
  Eigen::MatrixXcd a = h.cast<std::complex<double>>();
  for (long i = 0; i < d; ++i) a(i, i) -= lam;
  Eigen::MatrixXcd power = a;
  long prev = numeric_rank(power, kEigenTol * scale);
  double thr = kEigenTol * scale;
  for (int k = 1; k <= d; ++k) {
    power = power * a;
    thr *= scale;
    const long next = numeric_rank(power, thr);
    if (next == prev) return k;
    prev = next;
  }
  return static_cast<int>(d);
}

}  // namespace

void validate_mean_matrix(const Matrix& h) {
  if (h.rows() != h.cols()) throw DomainError("H: matrix must be square");
  if (h.rows() < 1 || h.rows() > kMaxDim) throw DomainError("H: dimension outside [1, 64]");
  if (!h.allFinite()) throw DomainError("H: entries must be finite");
  for (int k = 0; k < h.rows(); ++k)
    for (int q = 0; q < h.cols(); ++q)
      if (k != q && h(k, q) < 0.0)
        throw DomainError("H: off-diagonal entry (" + std::to_string(k + 1) + "," +
                          std::to_string(q + 1) +
                          ") is negative; the mean replacement matrix requires nonnegative "
                          "off-diagonal entries");
}

SpectralProfile perron_data(const Matrix& h, const std::vector<std::vector<int>>& classes) {
  validate_mean_matrix(h);
  const int d = static_cast<int>(h.rows());

  SpectralProfile p;
  p.d = d;
  const double beta = 1.0 + h.diagonal().cwiseAbs().maxCoeff();

  // Per-class dominant eigenvalue with local left/right Perron vectors.
  std::vector<ColVec> local_left(classes.size()), local_right(classes.size());
  for (std::size_t j = 0; j < classes.size(); ++j) {
    const auto& cls = classes[j];
    SpectralClass sc;
    sc.colors = cls;
    if (cls.size() == 1) {
      sc.lambda = h(cls[0], cls[0]);
      local_left[j] = ColVec::Ones(1);
      local_right[j] = ColVec::Ones(1);
    } else {
      Matrix block = submatrix(h, cls, cls);
      block.diagonal().array() += beta;
      sc.lambda = power_iteration(block, local_right[j]) - beta;
      Matrix blockT = block.transpose();
      power_iteration(blockT, local_left[j]);
    }
    p.classes.push_back(std::move(sc));
  }

  p.lambda_h = p.classes.front().lambda;
  for (const auto& c : p.classes) p.lambda_h = std::max(p.lambda_h, c.lambda);
  if (p.lambda_h <= 0.0)
    throw NonPositiveLambda("dominant eigenvalue is " + std::to_string(p.lambda_h) +
                            "; a strictly positive dominant eigenvalue is required");

  const double tol = cluster_width(p.lambda_h);
  std::vector<std::size_t> dominant;
  std::vector<int> subdominant_colors;
  for (std::size_t j = 0; j < p.classes.size(); ++j) {
    if (p.classes[j].lambda >= p.lambda_h - tol)
      dominant.push_back(j);
    else
      subdominant_colors.insert(subdominant_colors.end(), p.classes[j].colors.begin(),
                                p.classes[j].colors.end());
  }
  std::sort(subdominant_colors.begin(), subdominant_colors.end());
  p.nu1 = static_cast<int>(dominant.size());
  p.irreducible = classes.size() == 1;

  // Left eigenvectors: the local Perron row of each dominant class,
  // embedded with zeros and normalized to sum one.
  for (std::size_t idx : dominant) {
    RowVec v = RowVec::Zero(d);
    const auto& cls = p.classes[idx].colors;
    double sum = local_left[idx].sum();
    for (std::size_t i = 0; i < cls.size(); ++i) v(cls[i]) = local_left[idx](i) / sum;
    p.v_basis.push_back(std::move(v));
  }

  // Right eigenvectors: local Perron column on the class, zero on other
  // dominant classes, and on sub-dominant colors the unique solution of
  // (lambda_h I - H_TT) x = H_{T,C_j} u_{C_j}.
  Matrix h_tt;
  Eigen::PartialPivLU<Matrix> lu;
  if (!subdominant_colors.empty()) {
    h_tt = submatrix(h, subdominant_colors, subdominant_colors);
    Matrix sys = -h_tt;
    sys.diagonal().array() += p.lambda_h;
    lu.compute(sys);
  }
  for (std::size_t idx : dominant) {
    ColVec u = ColVec::Zero(d);
    const auto& cls = p.classes[idx].colors;
    for (std::size_t i = 0; i < cls.size(); ++i) u(cls[i]) = local_right[idx](i);
    if (!subdominant_colors.empty()) {
      Matrix cross = submatrix(h, subdominant_colors, cls);
      ColVec rhs = cross * local_right[idx];
      ColVec x = lu.solve(rhs);
      for (std::size_t i = 0; i < subdominant_colors.size(); ++i) u(subdominant_colors[i]) = x(i);
    }
    // A global right eigenvector only exists when dominant classes feed
    // nothing outside themselves; a large residual means that structure
    // (and with it a positive right eigenvector) is absent.
    const double resid = (h * u - p.lambda_h * u).cwiseAbs().maxCoeff();
    if (resid > 1e-7 * std::max(1.0, p.lambda_h) * std::max(1.0, u.cwiseAbs().maxCoeff()))
      throw NoPositiveRightEigenvector(
          "no right eigenvector supported on a dominant class exists; a dominant class feeds "
          "colors outside itself");
    p.u_basis.push_back(std::move(u));
  }

  // Normalize v_j * u_j = 1 and check the positivity of sum_j u_j.
  for (int j = 0; j < p.nu1; ++j) {
    const double s = p.v_basis[j] * p.u_basis[j];
    if (!(s > 0.0)) throw NoPositiveRightEigenvector("degenerate eigenvector pairing");
    p.u_basis[j] /= s;
  }
  ColVec total = ColVec::Zero(d);
  for (const auto& u : p.u_basis) total += u;
  const double umax = total.maxCoeff();
  for (int k = 0; k < d; ++k) {
    if (total(k) <= 1e-10 * std::max(1.0, umax))
      throw NoPositiveRightEigenvector(
          "no strictly positive right eigenvector: color " + std::to_string(k + 1) +
          " receives no weight (a sub-dominant class feeds no dominant class)");
  }

  p.u_projection = Matrix::Zero(d, d);
  for (int j = 0; j < p.nu1; ++j) p.u_projection += p.u_basis[j] * p.v_basis[j];
  return p;
}

std::pair<std::optional<double>, int> second_eigen_structure(const Matrix& h, double lambda_h) {
  validate_mean_matrix(h);
  Eigen::EigenSolver<Matrix> es(h, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw Error("eigensolver failed to converge");
  const auto& ev = es.eigenvalues();

  const double width = cluster_width(lambda_h);
  std::vector<std::complex<double>> secondary;
  for (long i = 0; i < ev.size(); ++i)
    if (ev(i).real() < lambda_h - width) secondary.push_back(ev(i));
  if (secondary.empty()) return {std::nullopt, 1};

  double second_re = secondary.front().real();
  for (const auto& z : secondary) second_re = std::max(second_re, z.real());
  const double rho = second_re / lambda_h;

  // Distinct eigenvalues in the band at the second-largest real part.
  std::vector<std::complex<double>> band;
  for (const auto& z : secondary) {
    if (std::abs(z.real() - second_re) > kEigenTol) continue;
    bool dup = false;
    for (const auto& w : band)
      if (std::abs(z - w) <= kEigenTol) dup = true;
    if (!dup) band.push_back(z);
  }
  int nu_sec = 1;
  for (const auto& z : band) nu_sec = std::max(nu_sec, jordan_block_size(h, z));
  return {rho, nu_sec};
}

SpectralProfile analyze_mean_matrix(const Matrix& h, const StructureMatrix& structure,
                                    std::optional<int> nu_sec_override) {
  if (structure.d != h.rows()) throw DomainError("analyze: structure dimension mismatch");
  SpectralProfile p = perron_data(h, strongly_connected_classes(structure));
  auto [rho, nu_sec] = second_eigen_structure(h, p.lambda_h);
  p.rho = rho;
  p.nu_sec = nu_sec_override.value_or(nu_sec);
  if (p.nu_sec < 1) throw DomainError("nu_sec override must be >= 1");
  return p;
}

SpectralProfile analyze_mean_matrix(const Matrix& h, std::optional<int> nu_sec_override) {
  return analyze_mean_matrix(h, StructureMatrix::from_pattern(h), nu_sec_override);
}

double rate_bn(std::optional<double> rho, int nu_sec, double n) {
  if (n < 16.0) throw DomainError("rate_bn: n must be at least 16");
  if (nu_sec < 1) throw DomainError("rate_bn: nu_sec must be >= 1");
  if (rho && *rho >= 1.0 - 1e-12) throw DomainError("rate_bn: rho must be below 1");
  const double loglog = std::log(std::log(n));
  if (!rho || *rho < 0.5 - 1e-12)
    return std::pow(n, -0.5) * std::sqrt(loglog);
  if (std::abs(*rho - 0.5) <= 1e-12)
    return std::pow(n, -0.5) * std::pow(std::log(n), nu_sec - 1) * std::sqrt(loglog);
  return std::pow(n, *rho - 1.0) * std::pow(std::log(n), nu_sec - 1);
}

double dist_to_limit_set(const RowVec& x, const SpectralProfile& profile, double scale) {
  if (!(scale > 0.0)) throw DomainError("dist_to_limit_set: scale must be positive");
  if (x.size() != profile.d) throw DomainError("dist_to_limit_set: dimension mismatch");
  const int m = profile.nu1;

  // Objective f(beta) = || x - scale * sum_j beta_j v_j ||^2, a convex QP
  // over the simplex. The gradient is Lipschitz with constant
  // 2 scale^2 lambda_max(V V^t); Gershgorin bounds that by the row sums.
  Matrix vt(m, profile.d);
  for (int j = 0; j < m; ++j) vt.row(j) = profile.v_basis[j];
  Matrix gram = vt * vt.transpose();
  const double lip = 2.0 * scale * scale * std::max(max_row_sum_norm(gram), 1e-30);
  const double step = 1.0 / lip;

  RowVec beta = RowVec::Constant(m, 1.0 / m);
  auto objective = [&](const RowVec& b) {
    RowVec r = x - scale * (b * vt);
    return r.squaredNorm();
  };
  double f = objective(beta);
  for (long it = 0; it < 100000; ++it) {
    RowVec r = x - scale * (beta * vt);
    RowVec grad = -2.0 * scale * (r * vt.transpose());
    beta = project_to_simplex(beta - step * grad);
    const double fn = objective(beta);
    if (std::abs(f - fn) < 1e-14) {
      f = fn;
      break;
    }
    f = fn;
  }
  return std::sqrt(std::max(f, 0.0));
}

RowVec sa_regression(const RowVec& theta, const Matrix& h) {
  const double alpha = theta.sum();
  if (std::abs(alpha) < 1e-300) throw DomainError("sa_regression: zero total mass");
  return theta - (theta * h) / alpha;
}

std::vector<OdeSample> integrate_mean_ode(const RowVec& theta0, const Matrix& h, double T, double dt) {
  validate_mean_matrix(h);
  if (theta0.size() != h.rows()) throw DomainError("integrate_mean_ode: dimension mismatch");
  if ((theta0.array() <= 0.0).any())
    throw DomainError("integrate_mean_ode: theta0 must be strictly positive componentwise");
  if (!(dt > 0.0) || dt > 1e-2) throw DomainError("integrate_mean_ode: dt must lie in (0, 1e-2]");
  if (!(T > 0.0)) throw DomainError("integrate_mean_ode: horizon must be positive");

  const long steps = static_cast<long>(std::ceil(T / dt));
  const double h_step = T / static_cast<double>(steps);

  auto check_mass = [](const RowVec& th) {
    const double a = th.sum();
    if (!(a >= 1e-9 && a <= 1e9))
      throw BlowUpError("total mass " + std::to_string(a) + " left [1e-9, 1e9]");
  };
  auto deriv = [&](const RowVec& th) { return RowVec(-sa_regression(th, h)); };

  std::vector<OdeSample> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  RowVec theta = theta0;
  check_mass(theta);
  out.push_back({0.0, theta});
  for (long i = 0; i < steps; ++i) {
    const RowVec k1 = deriv(theta);
    const RowVec k2 = deriv(theta + 0.5 * h_step * k1);
    const RowVec k3 = deriv(theta + 0.5 * h_step * k2);
    const RowVec k4 = deriv(theta + h_step * k3);
    theta += (h_step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_mass(theta);
    out.push_back({static_cast<double>(i + 1) * h_step, theta});
  }
  return out;
}

}  // namespace urnkit
