#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "trekit/frechet_log.hpp"
#include "trekit/operator_core.hpp"

namespace trekit {

/// Divergence value plus diagnostic metadata.
struct DivergenceResult {
  /// The divergence; +infinity for the ordinary relative entropy when the
  /// support condition fails.
  double value = 0.0;
  /// Telescope parameter; empty for the ordinary relative entropy.
  std::optional<double> a;
  /// Whether supp(first argument) is contained in supp(second argument).
  bool support_contained = true;
  /// Support ranks of the two arguments under rank_tol.
  std::pair<int, int> effective_ranks{0, 0};
  ToleranceConfig tol;

  bool is_infinite() const { return std::isinf(value); }
};

/// Ordinary relative entropy S(A||B) = tr A (log A - log B). Returns
/// +infinity (with support_contained = false) when supp A is not contained
/// in supp B. Arguments need not be normalized; for states the first
/// argument is the usual rho.
DivergenceResult rel_entropy(const PsdMatrix& a, const PsdMatrix& b,
                             const ToleranceConfig& tol = {});

/// Telescopic relative entropy
///   S_a(X||Y) = S(X || aX + (1-a)Y) / (-log a),
/// always finite; in [0, 1] for states. The telescope parameter must lie in
/// (1e-12, 1 - 1e-12): endpoint values come from tre_limit.
DivergenceResult tre(double a, const PsdMatrix& x, const PsdMatrix& y,
                     const ToleranceConfig& tol = {});

/// Scalar telescopic relative entropy
///   S_a(b||c) = b (log b - log(ab + (1-a)c)) / (-log a)
/// with 0 log 0 = 0; S_a(b||0) = b and S_a(0||c) = 0.
double tre_scalar(double a, double b, double c);

/// Scalar ordinary relative entropy b (log b - log c), with S(0||c) = 0 and
/// S(b||0) = +infinity for b > 0.
double rel_entropy_scalar(double b, double c);

/// Closed-form endpoint limits:
///   endpoint 0: S_0 = 1 - tr rho {sigma}
///   endpoint 1: S_1 = 1 - tr sigma {rho}
double tre_limit(int endpoint, const DensityMatrix& rho, const DensityMatrix& sigma,
                 const ToleranceConfig& tol = {});

/// Gradient of S(A||B) in the first argument: log A - log B + {A}.
/// Requires supp A contained in supp B.
HermitianMatrix grad1_rel(const PsdMatrix& a, const PsdMatrix& b,
                          const ToleranceConfig& tol = {});

/// Gradient of S(A||B) in the second argument: -T_B(A).
HermitianMatrix grad2_rel(const PsdMatrix& a, const PsdMatrix& b,
                          const ToleranceConfig& tol = {});

/// Gradient of S_a(A||B) in the first argument:
///   (log A - log C + {A} - a T_C(A)) / (-log a),  C = aA + (1-a)B.
HermitianMatrix grad1_tre(double a, const PsdMatrix& x, const PsdMatrix& y,
                          const ToleranceConfig& tol = {});

/// Gradient of S_a(A||B) in the second argument:
///   -((1-a)/(-log a)) T_C(A),  C = aA + (1-a)B.
/// The mixture argument C is what the chain rule produces and what the
/// finite-difference oracle validates; the variant using T_B(A) in its
/// place coincides only at A = B and fails the oracle otherwise.
HermitianMatrix grad2_tre(double a, const PsdMatrix& x, const PsdMatrix& y,
                          const ToleranceConfig& tol = {});

}  // namespace trekit
