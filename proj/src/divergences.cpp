#include "trekit/divergences.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace trekit {

namespace {

constexpr double kTelescopeBoundary = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// -log a, after refusing telescope parameters too close to the endpoints,
// where the 1/(-log a) scaling loses all precision.
double checked_neg_log(double a) {
  if (!(a > kTelescopeBoundary) || !(a < 1.0 - kTelescopeBoundary)) {
    throw ParameterOutOfRange("telescope parameter " + std::to_string(a) +
                              " outside (1e-12, 1-1e-12)");
  }
  return -std::log(a);
}

void check_dims(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("argument dims " + std::to_string(a.dim()) + " vs " +
                            std::to_string(b.dim()));
  }
}

// Weight of A on the kernel of B: sum of <v|A|v> over kernel eigenvectors.
double support_leak(const PsdMatrix& a, const PsdMatrix& b, double rank_tol) {
  const SpectralDecomposition& d = b.spectrum();
  const int sb = d.support_begin(rank_tol);
  double leak = 0.0;
  for (int i = 0; i < sb; ++i) {
    leak += (d.eigenvectors.col(i).adjoint() * a.entries() * d.eigenvectors.col(i))(0, 0)
                .real();
  }
  return leak;
}

bool support_contained(const PsdMatrix& a, const PsdMatrix& b, double rank_tol) {
  const double trace_a = a.trace();
  if (!(trace_a > 0.0)) return true;  // zero operator has empty support
  return support_leak(a, b, rank_tol) <= rank_tol * trace_a;
}

// tr A log A over the support of A, evaluated in A's own eigenbasis so the
// first term of S is exact at the eigenvalue level (0 log 0 = 0).
double trace_a_log_a(const PsdMatrix& a, double rank_tol) {
  const SpectralDecomposition& d = a.spectrum();
  double acc = 0.0;
  for (int i = d.support_begin(rank_tol); i < d.dim(); ++i) {
    acc += d.eigenvalues(i) * std::log(d.eigenvalues(i));
  }
  return acc;
}

}  // namespace

DivergenceResult rel_entropy(const PsdMatrix& a, const PsdMatrix& b,
                             const ToleranceConfig& tol) {
  tol.validate();
  check_dims(a, b);
  DivergenceResult res;
  res.tol = tol;
  res.effective_ranks = {a.rank(tol.rank_tol), b.rank(tol.rank_tol)};
  res.support_contained = support_contained(a, b, tol.rank_tol);
  if (!res.support_contained) {
    res.value = kInf;
    return res;
  }
  if (res.effective_ranks.first == 0) {
    res.value = 0.0;
    return res;
  }
  res.value = trace_a_log_a(a, tol.rank_tol) -
              trace_product(a.entries(), log_on_support(b, tol).entries());
  return res;
}

DivergenceResult tre(double a, const PsdMatrix& x, const PsdMatrix& y,
                     const ToleranceConfig& tol) {
  tol.validate();
  check_dims(x, y);
  const double neg_log_a = checked_neg_log(a);
  const PsdMatrix mix(a * x.entries() + (1.0 - a) * y.entries());
  DivergenceResult res = rel_entropy(x, mix, tol);
  res.a = a;
  res.value /= neg_log_a;
  res.effective_ranks = {x.rank(tol.rank_tol), y.rank(tol.rank_tol)};
  res.support_contained = support_contained(x, y, tol.rank_tol);
  return res;
}

double tre_scalar(double a, double b, double c) {
  const double neg_log_a = checked_neg_log(a);
  if (b < 0.0 || c < 0.0) {
    throw ParameterOutOfRange("scalar arguments must be nonnegative");
  }
  if (b == 0.0) return 0.0;
  if (c == 0.0) return b;
  return b * (std::log(b) - std::log(a * b + (1.0 - a) * c)) / neg_log_a;
}

double rel_entropy_scalar(double b, double c) {
  if (b < 0.0 || c < 0.0) {
    throw ParameterOutOfRange("scalar arguments must be nonnegative");
  }
  if (b == 0.0) return 0.0;
  if (c == 0.0) return kInf;
  return b * (std::log(b) - std::log(c));
}

double tre_limit(int endpoint, const DensityMatrix& rho, const DensityMatrix& sigma,
                 const ToleranceConfig& tol) {
  tol.validate();
  check_dims(rho, sigma);
  double overlap = 0.0;
  if (endpoint == 0) {
    overlap = trace_product(rho.entries(), support_projector(sigma, tol).entries());
  } else if (endpoint == 1) {
    overlap = trace_product(sigma.entries(), support_projector(rho, tol).entries());
  } else {
    throw ParameterOutOfRange("endpoint must be 0 or 1");
  }
  return std::clamp(1.0 - overlap, 0.0, 1.0);
}

HermitianMatrix grad1_rel(const PsdMatrix& a, const PsdMatrix& b,
                          const ToleranceConfig& tol) {
  tol.validate();
  check_dims(a, b);
  if (!support_contained(a, b, tol.rank_tol)) {
    throw SupportMismatch("grad1_rel requires supp A within supp B");
  }
  return HermitianMatrix(log_on_support(a, tol).entries() -
                         log_on_support(b, tol).entries() +
                         support_projector(a, tol).entries());
}

HermitianMatrix grad2_rel(const PsdMatrix& a, const PsdMatrix& b,
                          const ToleranceConfig& tol) {
  tol.validate();
  check_dims(a, b);
  return HermitianMatrix(-t_map(b, a, tol).entries());
}

HermitianMatrix grad1_tre(double a, const PsdMatrix& x, const PsdMatrix& y,
                          const ToleranceConfig& tol) {
  tol.validate();
  check_dims(x, y);
  const double neg_log_a = checked_neg_log(a);
  const PsdMatrix mix(a * x.entries() + (1.0 - a) * y.entries());
  const CMatrix g = log_on_support(x, tol).entries() - log_on_support(mix, tol).entries() +
                    support_projector(x, tol).entries() -
                    a * t_map(mix, x, tol).entries();
  return HermitianMatrix(g / neg_log_a);
}

HermitianMatrix grad2_tre(double a, const PsdMatrix& x, const PsdMatrix& y,
                          const ToleranceConfig& tol) {
  tol.validate();
  check_dims(x, y);
  const double neg_log_a = checked_neg_log(a);
  const PsdMatrix mix(a * x.entries() + (1.0 - a) * y.entries());
  return HermitianMatrix(-((1.0 - a) / neg_log_a) * t_map(mix, x, tol).entries());
}

}  // namespace trekit
