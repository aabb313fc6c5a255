#pragma once

#include <functional>

#include "trekit/operator_core.hpp"

namespace trekit {

/// First divided difference of log: (log x - log y)/(x - y) for x, y > 0,
/// with the confluent limit 2/(x + y) when the relative gap is below
/// confluence_tol. Stable at small gaps via log1p.
double log_divided_difference(double x, double y, double confluence_tol = 1e-7);

/// Second divided difference of log over positive arguments, with confluent
/// limits: -1/(2 m^2) when all three coincide (m their mean) and the
/// one-sided formula when exactly two coincide.
double log_divided_difference2(double x, double y, double z, double confluence_tol = 1e-7);

/// Spectral kernel of the first derivative of the matrix logarithm at a PSD
/// base operator: the table of first divided differences of log over the
/// base spectrum. Entries touching the kernel block are zero. Construct once
/// per base operator and share read-only across workers.
class DividedDifferenceKernel {
 public:
  explicit DividedDifferenceKernel(const PsdMatrix& base, const ToleranceConfig& tol = {});

  const SpectralDecomposition& base() const { return base_; }
  const Eigen::MatrixXd& first_table() const { return first_table_; }
  double confluence_tol() const { return confluence_tol_; }
  /// Eigenvalue indices >= support_begin() form the support block.
  int support_begin() const { return support_begin_; }
  int dim() const { return base_.dim(); }

  /// U^dagger delta U, with a SupportMismatch if delta leaks outside the
  /// support block of a singular base by more than 1e-10 (relative to
  /// max(1, ||delta||_max)).
  CMatrix to_eigenbasis_checked(const HermitianMatrix& delta) const;

 private:
  SpectralDecomposition base_;
  Eigen::MatrixXd first_table_;
  double confluence_tol_;
  int support_begin_;
};

/// First Frechet derivative of log at A in direction delta:
///   T_A(delta) = d/dt log(A + t delta) at t = 0.
/// For singular A, delta must satisfy {A} delta {A} = delta.
HermitianMatrix t_map(const DividedDifferenceKernel& kernel, const HermitianMatrix& delta);
HermitianMatrix t_map(const PsdMatrix& a, const HermitianMatrix& delta,
                      const ToleranceConfig& tol = {});

/// Negated second derivative of log at A in direction delta:
///   R_A(delta) = -d^2/dt^2 log(A + t delta) at t = 0.
/// PSD for Hermitian delta; R_A(A) = {A}.
HermitianMatrix r_map(const DividedDifferenceKernel& kernel, const HermitianMatrix& delta);
HermitianMatrix r_map(const PsdMatrix& a, const HermitianMatrix& delta,
                      const ToleranceConfig& tol = {});

/// Semi-infinite operator integral, integral_0^inf f(s) ds, under the
/// substitution s = anchor * t/(1 - t) with fixed-order Gauss-Legendre per
/// panel, doubling the panel count until successive results agree to
/// convergence_tol in the max norm. Throws QuadratureNonConvergence once the
/// node cap is reached.
CMatrix integrate_semi_infinite(const std::function<CMatrix(double)>& integrand,
                                double anchor, int dim, int initial_panels = 4,
                                double convergence_tol = 1e-10, int max_nodes = 1 << 14);

/// Quadrature realization of T_A for strictly positive A:
///   integral_0^inf (A + s)^-1 delta (A + s)^-1 ds
/// via resolvent inversion; independent of the divided-difference path.
HermitianMatrix quadrature_t_map(const PsdMatrix& a, const HermitianMatrix& delta,
                                 int panels = 4);

/// Quadrature realization of R_A for strictly positive A:
///   2 integral_0^inf (A + s)^-1 delta (A + s)^-1 delta (A + s)^-1 ds
HermitianMatrix quadrature_r_map(const PsdMatrix& a, const HermitianMatrix& delta,
                                 int panels = 4);

}  // namespace trekit
