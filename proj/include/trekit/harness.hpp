#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "trekit/divergences.hpp"

namespace trekit {

enum class Family { generic_mixed, haar_pure, commuting_diagonal, orthogonal_blocks };
enum class RankProfile { full, deficient, pure };

/// Ensemble description for randomized state generation.
struct EnsembleSpec {
  int dim = 2;
  RankProfile rank_profile = RankProfile::full;
  int deficient_rank = 1;  // k, used when rank_profile == deficient
  Family family = Family::generic_mixed;
  std::uint64_t seed = 0;
  long trials = 1;

  void validate() const;  // throws InvalidSpec
};

/// Per-trial deterministic random stream. The engine state is derived from
/// (seed, stream, trial), so results are identical regardless of execution
/// order or worker count. Gaussian variates use an explicit Box-Muller
/// transform on top of mt19937_64 to keep the stream fully specified.
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t trial);

  std::uint64_t next_u64() { return eng_(); }
  /// Uniform in (0, 1), never exactly 0 or 1.
  double uniform();
  double uniform(double lo, double hi);
  double log_uniform(double lo, double hi);
  double gaussian();
  Complex complex_gaussian();
  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi);

 private:
  std::mt19937_64 eng_;
};

std::uint64_t fnv1a64(std::string_view s);

// ---------------------------------------------------------------------------
// Random operators (Ginibre-based; deterministic in the rng stream)
// ---------------------------------------------------------------------------

/// GG^dagger / tr(GG^dagger) with G a dim x rank complex Gaussian matrix.
DensityMatrix random_mixed_state(TrialRng& rng, int dim, int rank);
/// Haar-distributed pure state (normalized Gaussian vector).
DensityMatrix random_pure_state(TrialRng& rng, int dim);
/// Diagonal state with Dirichlet(1,...,1) weights in the standard basis.
DensityMatrix random_diagonal_state(TrialRng& rng, int dim);
/// Mixed state supported on the diagonal block [lo, hi); entries outside the
/// block are exactly zero.
DensityMatrix random_block_state(TrialRng& rng, int dim, int lo, int hi, int rank);
/// Wishart-type PSD operator of the given rank with trace drawn
/// log-uniformly from [trace_lo, trace_hi].
PsdMatrix random_psd(TrialRng& rng, int dim, int rank, double trace_lo, double trace_hi);
/// PSD with a Haar-random eigenbasis and eigenvalues uniform in [lo, hi];
/// used where a bounded condition number is required.
PsdMatrix random_spectrum_psd(TrialRng& rng, int dim, double lo, double hi);
HermitianMatrix random_hermitian(TrialRng& rng, int dim);

/// States for one trial of the ensemble, deterministic in (spec.seed, trial).
std::vector<DensityMatrix> gen_states(const EnsembleSpec& spec, std::uint64_t trial,
                                      int count);

// ---------------------------------------------------------------------------
// Inequality checks. Margins are RHS - LHS: nonnegative certifies the trial.
// ---------------------------------------------------------------------------

/// |S_a(rho1||sigma) - S_a(rho2||sigma)| <= t - S_a(t||1), t = T(rho1, rho2).
double check_triangle1(double a, const DensityMatrix& rho1, const DensityMatrix& rho2,
                       const DensityMatrix& sigma, const ToleranceConfig& tol = {});

struct Triangle2Margins {
  double tight;   // (1 - S_a(1||t)) - D
  double linear;  // ((1-a)/(-a log a)) t - D
  double chain;   // linear bound minus tight bound
};
/// |S_a(rho||sigma1) - S_a(rho||sigma2)| against both bounds of the second
/// triangle inequality, t = T(sigma1, sigma2).
Triangle2Margins check_triangle2(double a, const DensityMatrix& rho,
                                 const DensityMatrix& sigma1, const DensityMatrix& sigma2,
                                 const ToleranceConfig& tol = {});

struct Rbts2Margins {
  double upper;  // S(A||A+X) - S(A+B||A+B+X)
  double lower;  // S(A+B||A+B+X) - S(A||A+X) - S(b||b+x)
};
Rbts2Margins check_rbts2(const PsdMatrix& a, const PsdMatrix& b, const PsdMatrix& x,
                         const ToleranceConfig& tol = {});

struct RbtsMargins {
  double upper;     // S(X||A+X) - S(X||A+B+X)
  double lower;     // S(X||A+B+X) - S(X||A+X) - S(x||b+x)
  double eq_upper;  // log(1+b) - tr rho (log(rho+A+B) - log(rho+A)), rho = X/tr X
  double eq_lower;  // tr rho (log(rho+A+B) - log(rho+A))
};
RbtsMargins check_rbts(const PsdMatrix& a, const PsdMatrix& b, const PsdMatrix& x,
                       const ToleranceConfig& tol = {});

struct TderivMargins {
  double lower;  // D = tr X T_{A+X}(X) - tr X T_{A+B+X}(X)
  double upper;  // bx/(b+x) - D (bound taken as 0 when b = x = 0)
};
TderivMargins check_tderiv(const PsdMatrix& a, const PsdMatrix& b, const PsdMatrix& x,
                           const ToleranceConfig& tol = {});

// ---------------------------------------------------------------------------
// Suite driver
// ---------------------------------------------------------------------------

/// Aggregated margins of one named check over a trial set.
struct CheckReport {
  std::string check_name;
  long trials = 0;
  long violations = 0;  // margins < -tol (failed trials count as violations)
  double min_margin = 0.0;
  double p1 = 0.0;
  double p50 = 0.0;
  double p99 = 0.0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  std::string config_digest;
  /// (inputs digest, margin) per trial; filled only when requested.
  std::vector<std::pair<std::string, double>> per_trial;

  bool passed() const { return violations == 0; }
};

struct SuiteConfig {
  /// Selectors: triangle1, triangle2, rbts, rbts2, tderiv, aux, all.
  std::vector<std::string> checks{"all"};
  std::vector<int> dims{2, 3, 4, 8};
  std::vector<double> a_values{0.05, 0.5, 0.95};
  long trials = 10000;  // per check family
  std::uint64_t seed = 0;
  double tol = 1e-9;  // violation threshold for inequality margins
  int jobs = 1;
  bool per_trial = false;
  std::string dump_failures_dir;  // empty disables failure dumps
  ToleranceConfig numeric_tol;

  void validate() const;  // throws InvalidSpec
};

/// Runs the selected check families; deterministic for a fixed seed,
/// independent of jobs. Numerical failures inside a trial are recorded as
/// violations of that trial, not fatal to the suite.
std::vector<CheckReport> run_suite(const SuiteConfig& config);

/// Auxiliary-lemma reports (lieb1, lieb2, Lemma f, S0/S1 linearity and the
/// rest of the aux family) for a single ensemble.
std::vector<CheckReport> check_aux_lemmas(const EnsembleSpec& spec,
                                          const ToleranceConfig& tol = {});

/// Equality families: exact block constructions achieving the triangle
/// bounds. Margins reported as -(distance from equality); tol 1e-8.
CheckReport run_triangle1_equality(const std::vector<double>& a_grid,
                                   const std::vector<double>& t_grid, int dim,
                                   const ToleranceConfig& tol = {});
CheckReport run_triangle2_equality(const std::vector<double>& a_grid,
                                   const std::vector<double>& t_grid, int dim,
                                   const ToleranceConfig& tol = {});

struct SweepRow {
  double a;
  double t;
  double bound_tight;
  double bound_linear;
  double achieved;  // equality-family difference |S_a(rho||sigma1) - S_a(rho||sigma2)|
};
/// Bounds of the second triangle inequality over an (a, t) grid, with the
/// achieved equality-family difference per cell.
std::vector<SweepRow> sweep_bounds(const std::vector<double>& a_grid,
                                   const std::vector<double>& t_grid,
                                   const ToleranceConfig& tol = {});

/// Stable JSON rendering. Non-finite values serialize as the strings
/// "inf", "-inf", "nan".
std::string report_to_json(const CheckReport& report);
std::string reports_to_json(const std::vector<CheckReport>& reports);

}  // namespace trekit
