#include "trekit/frechet_log.hpp"

#include <array>
#include <cstdio>
#include <cmath>
#include <string>
#include <vector>

namespace trekit {

namespace {

constexpr int kGaussOrder = 16;

struct GaussRule {
  std::array<double, kGaussOrder> nodes;    // on [-1, 1]
  std::array<double, kGaussOrder> weights;
};

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1] by Newton
// iteration on the Legendre recurrence.
GaussRule gauss_legendre_rule() {
  GaussRule rule{};
  const int n = kGaussOrder;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

const GaussRule& gauss_rule() {
  static const GaussRule rule = gauss_legendre_rule();
  return rule;
}

bool close_rel(double x, double y, double tol) {
  return std::abs(x - y) <= tol * std::max(std::abs(x), std::abs(y));
}

}  // namespace

double log_divided_difference(double x, double y, double confluence_tol) {
  if (close_rel(x, y, confluence_tol)) {
    return 2.0 / (x + y);
  }
  const double d = x - y;
  return std::log1p(d / y) / d;
}

double log_divided_difference2(double x, double y, double z, double confluence_tol) {
  // Sort so only adjacent pairs can be confluent.
  double a = x, b = y, c = z;
  if (a > b) std::swap(a, b);
  if (b > c) std::swap(b, c);
  if (a > b) std::swap(a, b);

  const bool ab = close_rel(a, b, confluence_tol);
  const bool bc = close_rel(b, c, confluence_tol);
  if (ab && bc) {
    const double m = (a + b + c) / 3.0;
    return -1.0 / (2.0 * m * m);
  }
  if (ab) {
    const double m = 0.5 * (a + b);
    return (log_divided_difference(m, c, confluence_tol) - 1.0 / m) / (c - m);
  }
  if (bc) {
    const double m = 0.5 * (b + c);
    return (log_divided_difference(m, a, confluence_tol) - 1.0 / m) / (a - m);
  }
  return (log_divided_difference(a, b, confluence_tol) -
          log_divided_difference(b, c, confluence_tol)) /
         (a - c);
}

DividedDifferenceKernel::DividedDifferenceKernel(const PsdMatrix& base,
                                                 const ToleranceConfig& tol)
    : base_(base.spectrum()), confluence_tol_(tol.confluence_tol) {
  tol.validate();
  support_begin_ = base_.support_begin(tol.rank_tol);
  const int n = base_.dim();
  first_table_ = Eigen::MatrixXd::Zero(n, n);
  for (int i = support_begin_; i < n; ++i) {
    for (int j = support_begin_; j <= i; ++j) {
      const double v = log_divided_difference(base_.eigenvalues(i), base_.eigenvalues(j),
                                              confluence_tol_);
      first_table_(i, j) = v;
      first_table_(j, i) = v;
    }
  }
}

CMatrix DividedDifferenceKernel::to_eigenbasis_checked(const HermitianMatrix& delta) const {
  if (delta.dim() != dim()) {
    throw DimensionMismatch("t_map/r_map: base dim " + std::to_string(dim()) +
                            " vs direction dim " + std::to_string(delta.dim()));
  }
  CMatrix dt = base_.eigenvectors.adjoint() * delta.entries() * base_.eigenvectors;
  if (support_begin_ > 0) {
    const double bound = 1e-10 * std::max(1.0, delta.max_abs());
    double leak = 0.0;
    for (int i = 0; i < dim(); ++i) {
      for (int j = 0; j < dim(); ++j) {
        if (i < support_begin_ || j < support_begin_) {
          leak = std::max(leak, std::abs(dt(i, j)));
        }
      }
    }
    if (leak > bound) {
      throw SupportMismatch("direction leaks " + std::to_string(leak) +
                            " outside the support of a singular base");
    }
  }
  return dt;
}

HermitianMatrix t_map(const DividedDifferenceKernel& kernel, const HermitianMatrix& delta) {
  const int n = kernel.dim();
  const int sb = kernel.support_begin();
  CMatrix dt = kernel.to_eigenbasis_checked(delta);
  CMatrix out = CMatrix::Zero(n, n);
  for (int i = sb; i < n; ++i) {
    for (int j = sb; j < n; ++j) {
      out(i, j) = dt(i, j) * kernel.first_table()(i, j);
    }
  }
  const CMatrix& u = kernel.base().eigenvectors;
  return HermitianMatrix(hermitize(u * out * u.adjoint()));
}

HermitianMatrix t_map(const PsdMatrix& a, const HermitianMatrix& delta,
                      const ToleranceConfig& tol) {
  return t_map(DividedDifferenceKernel(a, tol), delta);
}

HermitianMatrix r_map(const DividedDifferenceKernel& kernel, const HermitianMatrix& delta) {
  const int n = kernel.dim();
  const int sb = kernel.support_begin();
  const RVector& lam = kernel.base().eigenvalues;
  CMatrix dt = kernel.to_eigenbasis_checked(delta);
  CMatrix out = CMatrix::Zero(n, n);
  for (int i = sb; i < n; ++i) {
    for (int j = sb; j < n; ++j) {
      Complex acc(0.0, 0.0);
      for (int k = sb; k < n; ++k) {
        acc += dt(i, k) * dt(k, j) *
               log_divided_difference2(lam(i), lam(k), lam(j), kernel.confluence_tol());
      }
      out(i, j) = -2.0 * acc;
    }
  }
  const CMatrix& u = kernel.base().eigenvectors;
  return HermitianMatrix(hermitize(u * out * u.adjoint()));
}

HermitianMatrix r_map(const PsdMatrix& a, const HermitianMatrix& delta,
                      const ToleranceConfig& tol) {
  return r_map(DividedDifferenceKernel(a, tol), delta);
}

CMatrix integrate_semi_infinite(const std::function<CMatrix(double)>& integrand,
                                double anchor, int dim, int initial_panels,
                                double convergence_tol, int max_nodes) {
  if (!(anchor > 0.0)) {
    throw ParameterOutOfRange("quadrature anchor must be strictly positive");
  }
  const GaussRule& rule = gauss_rule();

  auto evaluate = [&](int panels) {
    CMatrix acc = CMatrix::Zero(dim, dim);
    const double width = 1.0 / panels;
    for (int p = 0; p < panels; ++p) {
      const double left = p * width;
      for (int q = 0; q < kGaussOrder; ++q) {
        const double t = left + 0.5 * width * (rule.nodes[q] + 1.0);
        const double w = 0.5 * width * rule.weights[q];
        const double s = anchor * t / (1.0 - t);
        const double jac = anchor / ((1.0 - t) * (1.0 - t));
        acc += (w * jac) * integrand(s);
      }
    }
    return acc;
  };

  int panels = std::max(1, initial_panels);
  CMatrix prev = evaluate(panels);
  while (true) {
    if (2 * panels * kGaussOrder > max_nodes) {
      char tol_buf[32];
      std::snprintf(tol_buf, sizeof(tol_buf), "%g", convergence_tol);
      throw QuadratureNonConvergence("no convergence to " + std::string(tol_buf) +
                                     " within " + std::to_string(max_nodes) + " nodes");
    }
    panels *= 2;
    CMatrix cur = evaluate(panels);
    if ((cur - prev).cwiseAbs().maxCoeff() <= convergence_tol) {
      return cur;
    }
    prev = std::move(cur);
  }
}

namespace {

double strictly_positive_min(const PsdMatrix& a) {
  const double lmin = a.spectrum().lambda_min();
  const double lmax = a.spectrum().lambda_max();
  if (!(lmin > 0.0) || !(lmin > 1e-14 * lmax)) {
    throw SupportMismatch("quadrature oracle requires a strictly positive base operator");
  }
  return lmin;
}

}  // namespace

HermitianMatrix quadrature_t_map(const PsdMatrix& a, const HermitianMatrix& delta,
                                 int panels) {
  if (a.dim() != delta.dim()) {
    throw DimensionMismatch("quadrature_t_map: dimension mismatch");
  }
  const double lmin = strictly_positive_min(a);
  const int n = a.dim();
  const CMatrix id = CMatrix::Identity(n, n);
  auto f = [&](double s) -> CMatrix {
    const CMatrix res = (a.entries() + s * id).partialPivLu().solve(id);
    return res * delta.entries() * res;
  };
  return HermitianMatrix(hermitize(integrate_semi_infinite(f, lmin, n, panels)));
}

HermitianMatrix quadrature_r_map(const PsdMatrix& a, const HermitianMatrix& delta,
                                 int panels) {
  if (a.dim() != delta.dim()) {
    throw DimensionMismatch("quadrature_r_map: dimension mismatch");
  }
  const double lmin = strictly_positive_min(a);
  const int n = a.dim();
  const CMatrix id = CMatrix::Identity(n, n);
  auto f = [&](double s) -> CMatrix {
    const CMatrix res = (a.entries() + s * id).partialPivLu().solve(id);
    const CMatrix rd = res * delta.entries();
    return 2.0 * rd * rd * res;
  };
  return HermitianMatrix(hermitize(integrate_semi_infinite(f, lmin, n, panels)));
}

}  // namespace trekit
