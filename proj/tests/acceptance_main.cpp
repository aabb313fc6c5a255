// Acceptance suite: one line per criterion, exit code = number of failures.
//
//   1. range and extremes of S_a
//   2. closed-form endpoint limits and convergence envelope
//   3. divided-difference engine vs quadrature and finite differences
//   4. gradient lemmas vs finite-difference directional derivatives
//   5. inequality certification at tol 1e-9, 1e4 trials per family
//   6. sharpness of the triangle bounds on the equality families
//   7. S1 Fannes-type bound
//   8. byte-identical reports across runs and worker counts

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "trekit/matrix_io.hpp"

using namespace trekit;
using namespace trekit::testing;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

int g_failures = 0;

void run_criterion(int number, const std::string& name, double budget_seconds,
                   const std::function<void(Outcome&)>& body) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(out);
  } catch (const std::exception& e) {
    out.fail(std::string("exception: ") + e.what());
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (elapsed > budget_seconds) {
    out.fail("runtime " + std::to_string(elapsed) + "s exceeds budget " +
             std::to_string(budget_seconds) + "s");
  }
  std::printf("[%s] criterion %d: %s (%.1fs)%s%s\n", out.pass ? "PASS" : "FAIL", number,
              name.c_str(), elapsed, out.detail.empty() ? "" : " -- ",
              out.detail.c_str());
  std::fflush(stdout);
  if (!out.pass) ++g_failures;
}

DensityMatrix profile_state(TrialRng& rng, int dim, std::uint64_t variant) {
  switch (variant % 3) {
    case 0:
      return random_mixed_state(rng, dim, dim);
    case 1:
      return random_mixed_state(rng, dim, rng.uniform_int(1, std::max(1, dim - 1)));
    default:
      return random_pure_state(rng, dim);
  }
}

const std::vector<double> kAValues = {0.05, 0.5, 0.95};

void criterion_range(Outcome& out) {
  const long trials_per_dim = 10000;
  const long orth_per_dim = 500;
  for (int dim : {2, 3, 4, 8}) {
    for (long t = 0; t < trials_per_dim; ++t) {
      TrialRng rng(1001, fnv1a64("acc_range") ^ dim, static_cast<std::uint64_t>(t));
      const DensityMatrix rho = profile_state(rng, dim, t);
      const DensityMatrix sig = profile_state(rng, dim, t / 3);
      for (double a : kAValues) {
        const double s = tre(a, rho, sig).value;
        if (s < -1e-10 || s > 1.0 + 1e-10) {
          out.fail("range violated: S_a = " + std::to_string(s));
          return;
        }
        const double self = tre(a, rho, rho).value;
        if (std::abs(self) > 1e-12) {
          out.fail("self-distance " + std::to_string(self) + " above 1e-12");
          return;
        }
      }
    }
    for (long t = 0; t < orth_per_dim; ++t) {
      TrialRng rng(1002, fnv1a64("acc_orth") ^ dim, static_cast<std::uint64_t>(t));
      const int h = dim / 2;
      const DensityMatrix rho = random_block_state(rng, dim, 0, h, h);
      const DensityMatrix sig = random_block_state(rng, dim, h, dim, dim - h);
      for (double a : kAValues) {
        const double s = tre(a, rho, sig).value;
        if (std::abs(s - 1.0) > 1e-10) {
          out.fail("orthogonal pair gave S_a = " + std::to_string(s));
          return;
        }
      }
    }
  }
}

// For pairs with supp rho inside supp sigma the gap |S_a - S0| decreases
// strictly along the whole schedule and obeys the derived envelope. Without
// containment the gap follows |D|/(-log a) only once a is small enough, so
// strictness is asserted on the 1e-4 -> 1e-6 tail where the closed-form
// limit governs.
void criterion_limits(Outcome& out) {
  const std::vector<double> to_zero = {1e-2, 1e-4, 1e-6};
  const std::vector<double> to_one = {1.0 - 1e-2, 1.0 - 1e-4, 1.0 - 1e-6};
  for (int dim : {2, 3, 4, 8}) {
    for (long t = 0; t < 100; ++t) {
      TrialRng rng(1003, fnv1a64("acc_limits") ^ dim, static_cast<std::uint64_t>(t));
      const DensityMatrix rho = random_mixed_state(rng, dim, dim);
      const DensityMatrix sig =
          random_mixed_state(rng, dim, (t % 2) ? dim : std::max(1, dim - 1));
      const double s0 = tre_limit(0, rho, sig);
      const double s1 = tre_limit(1, rho, sig);
      const DivergenceResult ord = rel_entropy(rho, sig);

      std::vector<double> gaps0;
      for (double a : to_zero) gaps0.push_back(std::abs(tre(a, rho, sig).value - s0));
      if (ord.support_contained) {
        if (!(gaps0[1] < gaps0[0] && gaps0[2] < gaps0[1])) {
          out.fail("contained pair: gap to S0 not strictly decreasing");
          return;
        }
        for (std::size_t i = 0; i < to_zero.size(); ++i) {
          const double a = to_zero[i];
          const double envelope = (ord.value - std::log1p(-a)) / (-std::log(a));
          if (gaps0[i] > envelope + 1e-12) {
            out.fail("envelope exceeded: gap " + std::to_string(gaps0[i]) + " > " +
                     std::to_string(envelope));
            return;
          }
        }
      } else if (!(gaps0[2] < gaps0[1])) {
        out.fail("tail gap to S0 not decreasing on an uncontained pair");
        return;
      }

      // rho is full rank, so the S1 side is always the contained case
      double prev = std::numeric_limits<double>::infinity();
      for (double a : to_one) {
        const double gap = std::abs(tre(a, rho, sig).value - s1);
        if (!(gap < prev)) {
          out.fail("gap to S1 not strictly decreasing at a = " + std::to_string(a));
          return;
        }
        prev = gap;
      }
    }
  }
}

void criterion_frechet(Outcome& out) {
  for (long t = 0; t < 200; ++t) {
    TrialRng rng(1004, fnv1a64("acc_frechet"), static_cast<std::uint64_t>(t));
    const int dim = 2 + static_cast<int>(t % 5);

    const PsdMatrix a = random_spectrum_psd(rng, dim, 0.02, 1.0);
    const HermitianMatrix delta = unit_direction(rng, dim);
    const double t_err =
        max_abs_diff(t_map(a, delta).entries(), quadrature_t_map(a, delta).entries());
    if (t_err > 1e-8) {
      out.fail("T map vs quadrature: " + std::to_string(t_err));
      return;
    }
    const double r_err =
        max_abs_diff(r_map(a, delta).entries(), quadrature_r_map(a, delta).entries());
    if (r_err > 1e-7) {
      out.fail("R map vs quadrature: " + std::to_string(r_err));
      return;
    }

    const PsdMatrix b = random_spectrum_psd(rng, dim, 0.05, 1.0);
    const HermitianMatrix dir = fd_direction(rng, dim);
    const double h1 = 1e-5;
    const CMatrix fd1 =
        (log_on_support(PsdMatrix(b.entries() + h1 * dir.entries())).entries() -
         log_on_support(PsdMatrix(b.entries() - h1 * dir.entries())).entries()) /
        (2.0 * h1);
    if (max_abs_diff(fd1, t_map(b, dir).entries()) > 1e-6) {
      out.fail("T map vs central difference of log");
      return;
    }
    const double h2 = 1e-4;
    const CMatrix fd2 =
        (log_on_support(PsdMatrix(b.entries() + h2 * dir.entries())).entries() -
         2.0 * log_on_support(b).entries() +
         log_on_support(PsdMatrix(b.entries() - h2 * dir.entries())).entries()) /
        (h2 * h2);
    if (max_abs_diff(fd2, -r_map(b, dir).entries()) > 1e-4) {
      out.fail("R map vs second difference of log");
      return;
    }

    const int rank = 1 + static_cast<int>(t % dim);
    const PsdMatrix rho(random_mixed_state(rng, dim, rank).entries());
    const double proj_err =
        max_abs_diff(t_map(rho, rho).entries(), support_projector(rho).entries());
    if (proj_err > 1e-9) {
      out.fail("T_rho(rho) vs support projector: " + std::to_string(proj_err));
      return;
    }
  }
}

void criterion_gradients(Outcome& out) {
  const double h = 1e-5;
  for (long t = 0; t < 200; ++t) {
    TrialRng rng(1005, fnv1a64("acc_grad"), static_cast<std::uint64_t>(t));
    const int dim = 2 + static_cast<int>(t % 5);
    const PsdMatrix a = random_spectrum_psd(rng, dim, 0.1, 1.0);
    const PsdMatrix b = random_spectrum_psd(rng, dim, 0.1, 1.0);
    const HermitianMatrix d = unit_direction(rng, dim);
    const double at = 0.15 + 0.7 * rng.uniform();

    auto relcheck = [&](const char* label, double analytic, double fd) {
      if (std::abs(analytic - fd) > 1e-6 * std::max(1.0, std::abs(analytic))) {
        out.fail(std::string(label) + ": analytic " + std::to_string(analytic) +
                 " vs fd " + std::to_string(fd));
      }
    };

    relcheck("grad1_rel", trace_product(d.entries(), grad1_rel(a, b).entries()),
             (rel_entropy(PsdMatrix(a.entries() + h * d.entries()), b).value -
              rel_entropy(PsdMatrix(a.entries() - h * d.entries()), b).value) /
                 (2.0 * h));
    relcheck("grad2_rel", trace_product(d.entries(), grad2_rel(a, b).entries()),
             (rel_entropy(a, PsdMatrix(b.entries() + h * d.entries())).value -
              rel_entropy(a, PsdMatrix(b.entries() - h * d.entries())).value) /
                 (2.0 * h));
    relcheck("grad1_tre", trace_product(d.entries(), grad1_tre(at, a, b).entries()),
             (tre(at, PsdMatrix(a.entries() + h * d.entries()), b).value -
              tre(at, PsdMatrix(a.entries() - h * d.entries()), b).value) /
                 (2.0 * h));
    relcheck("grad2_tre", trace_product(d.entries(), grad2_tre(at, a, b).entries()),
             (tre(at, a, PsdMatrix(b.entries() + h * d.entries())).value -
              tre(at, a, PsdMatrix(b.entries() - h * d.entries())).value) /
                 (2.0 * h));
    if (!out.pass) return;
  }
}

void criterion_certification(Outcome& out) {
  SuiteConfig cfg;
  cfg.checks = {"all"};
  cfg.dims = {2, 3, 4, 8};
  cfg.a_values = kAValues;
  cfg.trials = 40000;  // 1e4 per dimension for every check family
  cfg.seed = 20260810;
  cfg.tol = 1e-9;
  cfg.jobs = 2;
  const std::vector<CheckReport> reports = run_suite(cfg);

  const std::set<std::string> required = {
      "triangle1",         "triangle2_tight",     "triangle2_linear",
      "triangle2_chain",   "rbts_upper",          "rbts_lower",
      "rbts_eqform_upper", "rbts_eqform_lower",   "rbts2_upper",
      "rbts2_lower",       "tderiv_lower",        "tderiv_upper",
      "monoboth_s_first",  "monoboth_tre_first",  "monoboth_s_second",
      "monoboth_tre_second", "lieb1",             "lieb2",
      "joint_convexity_tre", "joint_convexity_tmap", "scaling_identity",
      "lemma_f"};
  std::set<std::string> seen;
  for (const CheckReport& r : reports) {
    seen.insert(r.check_name);
    if (r.violations != 0) {
      out.fail(r.check_name + " had " + std::to_string(r.violations) +
               " violations, min margin " + std::to_string(r.min_margin));
    }
  }
  for (const std::string& name : required) {
    if (!seen.count(name)) out.fail("missing report: " + name);
  }
}

void criterion_sharpness(Outcome& out) {
  const std::vector<double> grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  const CheckReport t1 = run_triangle1_equality(grid, grid, 2);
  const CheckReport t2 = run_triangle2_equality(grid, grid, 2);
  if (t1.violations != 0 || t1.min_margin < -1e-8) {
    out.fail("triangle1 equality margin " + std::to_string(t1.min_margin));
  }
  if (t2.violations != 0 || t2.min_margin < -1e-8) {
    out.fail("triangle2 equality margin " + std::to_string(t2.min_margin));
  }
  for (const SweepRow& row : sweep_bounds(grid, grid)) {
    if (std::abs(row.achieved - row.bound_tight) > 1e-8) {
      out.fail("sweep cell (a=" + std::to_string(row.a) + ", t=" + std::to_string(row.t) +
               ") achieved != bound_tight");
      return;
    }
  }
}

void criterion_fannes(Outcome& out) {
  for (long t = 0; t < 1000; ++t) {
    TrialRng rng(1006, fnv1a64("acc_fannes"), static_cast<std::uint64_t>(t));
    const int dim = 2 + static_cast<int>(t % 7);
    const DensityMatrix rho =
        random_mixed_state(rng, dim, rng.uniform_int(1, std::max(1, dim - 1)));
    const DensityMatrix s1 = random_mixed_state(rng, dim, dim);
    const DensityMatrix s2 = random_mixed_state(rng, dim, dim);
    const double lhs = std::abs(tre_limit(1, rho, s1) - tre_limit(1, rho, s2));
    const double rhs = trace_distance(s1, s2);
    if (lhs > rhs + 1e-10) {
      out.fail("Fannes bound violated by " + std::to_string(lhs - rhs));
      return;
    }
  }
}

void criterion_determinism(Outcome& out) {
  const char* bin = std::getenv("TRE_KIT_BIN");
  if (bin == nullptr) {
    out.fail("TRE_KIT_BIN not set; cannot exercise cmd_verify");
    return;
  }
  const fs::path dir = fs::temp_directory_path() / "trekit_acceptance";
  fs::create_directories(dir);
  auto run_verify = [&](const fs::path& report, int jobs) {
    const std::string cmd = std::string("\"") + bin +
                            "\" verify --theorem all --trials 300 --dim 2 --dim 3 --seed 42" +
                            " --jobs " + std::to_string(jobs) + " --report \"" +
                            report.string() + "\" > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  const fs::path r1 = dir / "det1.json";
  const fs::path r2 = dir / "det2.json";
  const fs::path r4 = dir / "det4.json";
  if (run_verify(r1, 1) != 0 || run_verify(r2, 1) != 0 || run_verify(r4, 4) != 0) {
    out.fail("cmd_verify returned nonzero");
    return;
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string b1 = slurp(r1);
  if (b1.empty() || b1 != slurp(r2)) {
    out.fail("reports differ between identical runs");
    return;
  }
  if (b1 != slurp(r4)) {
    out.fail("reports differ between worker counts 1 and 4");
  }
}

}  // namespace

int main() {
  run_criterion(1, "range and extremes of S_a", 60.0, &criterion_range);
  run_criterion(2, "closed-form limits and convergence envelope", 30.0, &criterion_limits);
  run_criterion(3, "divided-difference engine vs quadrature and finite differences", 120.0,
                &criterion_frechet);
  run_criterion(4, "gradient lemmas vs finite differences", 60.0, &criterion_gradients);
  run_criterion(5, "inequality certification, 1e4 trials per family", 240.0,
                &criterion_certification);
  run_criterion(6, "sharpness of the triangle bounds", 30.0, &criterion_sharpness);
  run_criterion(7, "S1 Fannes-type bound", 10.0, &criterion_fannes);
  run_criterion(8, "deterministic reports across runs and workers", 120.0,
                &criterion_determinism);
  return g_failures;
}
