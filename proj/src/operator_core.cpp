#include "trekit/operator_core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace trekit {

namespace {

// Eigenvalue band below zero tolerated (and clamped) when validating PSD
// inputs; sized to absorb eigensolver noise without admitting genuinely
// indefinite operators.
constexpr double kPsdClampRel = 1e-12;

void check_square(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw DimensionMismatch("matrix must be square with dim >= 1, got " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

}  // namespace

void ToleranceConfig::validate() const {
  auto in_range = [](double v) { return v > 0.0 && v < 1.0; };
  if (!in_range(rank_tol) || !in_range(confluence_tol) || !in_range(hermiticity_tol)) {
    throw ParameterOutOfRange("tolerances must be strictly positive and < 1");
  }
}

int SpectralDecomposition::support_begin(double rank_tol) const {
  const double lmax = lambda_max();
  if (!(lmax > 0.0)) {
    return dim();  // zero (or negative) operator: empty support
  }
  const double cut = rank_tol * lmax;
  int i = 0;
  while (i < dim() && eigenvalues(i) <= cut) ++i;
  return i;
}

HermitianMatrix::HermitianMatrix(CMatrix entries, double hermiticity_tol) {
  check_square(entries);
  const double scale = entries.cwiseAbs().maxCoeff();
  const double dev = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
  if (dev > hermiticity_tol * scale) {
    throw NonHermitianInput("matrix deviates from Hermitian by " + std::to_string(dev));
  }
  m_ = 0.5 * (entries + entries.adjoint());
}

SpectralDecomposition spectral_decompose(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw EigensolverFailure("eigensolver failed to converge on dim " +
                             std::to_string(h.rows()));
  }
  return SpectralDecomposition{solver.eigenvalues(), solver.eigenvectors()};
}

SpectralDecomposition spectral_decompose(const HermitianMatrix& h) {
  return spectral_decompose(h.entries());
}

PsdMatrix::PsdMatrix(TrustedTag, CMatrix entries, SpectralDecomposition d)
    : HermitianMatrix(std::move(entries)),
      spec_(std::make_shared<const SpectralDecomposition>(std::move(d))) {}

PsdMatrix::PsdMatrix(CMatrix entries, double hermiticity_tol)
    : HermitianMatrix(std::move(entries), hermiticity_tol) {
  SpectralDecomposition d = spectral_decompose(m_);
  const double scale = d.eigenvalues.cwiseAbs().maxCoeff();
  const double band = d.dim() * kPsdClampRel * scale;
  if (d.eigenvalues(0) < -band) {
    throw NotPositiveSemidefinite("eigenvalue " + std::to_string(d.eigenvalues(0)) +
                                  " below clamping band " + std::to_string(-band));
  }
  if (d.eigenvalues(0) < 0.0) {
    d.eigenvalues = d.eigenvalues.cwiseMax(0.0);
    m_ = hermitize(d.apply([](double v) { return v; }));
  }
  spec_ = std::make_shared<const SpectralDecomposition>(std::move(d));
}

PsdMatrix::PsdMatrix(const HermitianMatrix& h) : PsdMatrix(h.entries()) {}

PsdMatrix PsdMatrix::from_spectral(SpectralDecomposition d) {
  if (d.eigenvalues.size() > 0 && d.eigenvalues(0) < 0.0) {
    throw NotPositiveSemidefinite("from_spectral requires nonnegative eigenvalues");
  }
  CMatrix m = hermitize(d.apply([](double v) { return v; }));
  return PsdMatrix(TrustedTag{}, std::move(m), std::move(d));
}

int PsdMatrix::rank(double rank_tol) const {
  return spec_->dim() - spec_->support_begin(rank_tol);
}

DensityMatrix::DensityMatrix(CMatrix entries, double hermiticity_tol)
    : PsdMatrix(std::move(entries), hermiticity_tol) {
  if (std::abs(trace() - 1.0) > 1e-10) {
    throw InvalidState("density matrix trace " + std::to_string(trace()) + " != 1");
  }
}

DensityMatrix::DensityMatrix(const PsdMatrix& p) : PsdMatrix(p) {
  if (std::abs(trace() - 1.0) > 1e-10) {
    throw InvalidState("density matrix trace " + std::to_string(trace()) + " != 1");
  }
}

HermitianMatrix support_projector(const PsdMatrix& x, const ToleranceConfig& tol) {
  tol.validate();
  const SpectralDecomposition& d = x.spectrum();
  const int sb = d.support_begin(tol.rank_tol);
  const int n = d.dim();
  if (sb == n) {
    return HermitianMatrix(CMatrix::Zero(n, n));
  }
  const CMatrix us = d.eigenvectors.rightCols(n - sb);
  return HermitianMatrix(hermitize(us * us.adjoint()));
}

PsdMatrix positive_part(const HermitianMatrix& x) {
  SpectralDecomposition d = spectral_decompose(x);
  d.eigenvalues = d.eigenvalues.cwiseMax(0.0);
  return PsdMatrix::from_spectral(std::move(d));
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) {
    throw DimensionMismatch("trace_distance: dims " + std::to_string(rho.dim()) +
                            " vs " + std::to_string(sigma.dim()));
  }
  const SpectralDecomposition d = spectral_decompose(rho.entries() - sigma.entries());
  const double t = 0.5 * d.eigenvalues.cwiseAbs().sum();
  return std::clamp(t, 0.0, 1.0);
}

HermitianMatrix log_on_support(const PsdMatrix& x, const ToleranceConfig& tol) {
  tol.validate();
  const SpectralDecomposition& d = x.spectrum();
  const int sb = d.support_begin(tol.rank_tol);
  RVector mapped = RVector::Zero(d.dim());
  for (int i = sb; i < d.dim(); ++i) {
    mapped(i) = std::log(d.eigenvalues(i));
  }
  return HermitianMatrix(
      hermitize(d.eigenvectors * mapped.asDiagonal() * d.eigenvectors.adjoint()));
}

double trace_product(const CMatrix& a, const CMatrix& b) {
  return a.cwiseProduct(b.transpose()).sum().real();
}

CMatrix hermitize(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace trekit
