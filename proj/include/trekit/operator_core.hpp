#pragma once

#include <Eigen/Dense>

#include <complex>
#include <memory>

#include "trekit/errors.hpp"

namespace trekit {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

/// Tolerances shared by all spectral computations.
struct ToleranceConfig {
  /// Relative eigenvalue cutoff for support detection: an eigenvalue counts
  /// as support iff lambda > rank_tol * lambda_max.
  double rank_tol = 1e-10;
  /// Relative eigenvalue-gap threshold below which divided differences
  /// switch to their confluent limits.
  double confluence_tol = 1e-7;
  double hermiticity_tol = 1e-12;

  /// Throws ParameterOutOfRange unless every tolerance is in (0, 1).
  void validate() const;
};

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of a
/// Hermitian matrix.
struct SpectralDecomposition {
  RVector eigenvalues;
  CMatrix eigenvectors;

  int dim() const { return static_cast<int>(eigenvalues.size()); }
  double lambda_max() const { return eigenvalues(eigenvalues.size() - 1); }
  double lambda_min() const { return eigenvalues(0); }

  /// U f(lambda) U^dagger
  template <typename F>
  CMatrix apply(F&& f) const {
    RVector mapped(eigenvalues.size());
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
      mapped(i) = f(eigenvalues(i));
    }
    return eigenvectors * mapped.asDiagonal() * eigenvectors.adjoint();
  }

  /// First index of the support block under the relative cutoff
  /// lambda > rank_tol * lambda_max; eigenvalues are ascending so the
  /// support is the suffix [support_begin, dim).
  int support_begin(double rank_tol) const;
};

/// Dense complex square matrix, validated Hermitian on construction and
/// stored in exactly Hermitian form (M + M^dagger)/2.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(CMatrix entries, double hermiticity_tol = 1e-12);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& entries() const { return m_; }
  double trace() const { return m_.trace().real(); }
  double max_abs() const { return m_.size() == 0 ? 0.0 : m_.cwiseAbs().maxCoeff(); }

 protected:
  CMatrix m_;
};

/// Positive semidefinite matrix. Construction eigendecomposes once, rejects
/// eigenvalues below -(dim * 1e-12 * lambda_max), clamps in-band negatives
/// to zero, and caches the decomposition so every matrix function of the
/// same operator flows through a single shared spectrum.
class PsdMatrix : public HermitianMatrix {
 public:
  explicit PsdMatrix(CMatrix entries, double hermiticity_tol = 1e-12);
  explicit PsdMatrix(const HermitianMatrix& h);

  /// Builds directly from a decomposition with nonnegative eigenvalues,
  /// skipping the eigensolver. Eigenvalues must be ascending.
  static PsdMatrix from_spectral(SpectralDecomposition d);

  const SpectralDecomposition& spectrum() const { return *spec_; }

  /// Support rank under the given cutoff.
  int rank(double rank_tol = 1e-10) const;

 private:
  struct TrustedTag {};
  PsdMatrix(TrustedTag, CMatrix entries, SpectralDecomposition d);

  std::shared_ptr<const SpectralDecomposition> spec_;
};

/// Quantum state: PSD with unit trace (within 1e-10).
class DensityMatrix : public PsdMatrix {
 public:
  explicit DensityMatrix(CMatrix entries, double hermiticity_tol = 1e-12);
  explicit DensityMatrix(const PsdMatrix& p);
};

/// Full eigensystem of a Hermitian matrix; throws EigensolverFailure if the
/// solver does not converge.
SpectralDecomposition spectral_decompose(const HermitianMatrix& h);
SpectralDecomposition spectral_decompose(const CMatrix& h);

/// Orthogonal projector onto the span of eigenvectors with
/// lambda > rank_tol * lambda_max; the zero operator maps to zero.
HermitianMatrix support_projector(const PsdMatrix& x, const ToleranceConfig& tol = {});

/// X_+ = (X + |X|)/2: negative eigenvalues zeroed in the eigenbasis.
PsdMatrix positive_part(const HermitianMatrix& x);

/// T(rho, sigma) = 1/2 ||rho - sigma||_1, clamped to [0, 1].
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Matrix logarithm on the support: lambda -> log lambda on support
/// eigenvalues, 0 on kernel eigenvalues.
HermitianMatrix log_on_support(const PsdMatrix& x, const ToleranceConfig& tol = {});

/// Re tr(a b); both arguments Hermitian makes the trace real.
double trace_product(const CMatrix& a, const CMatrix& b);

/// (m + m^dagger)/2
CMatrix hermitize(const CMatrix& m);

}  // namespace trekit
