// tre-kit: compute telescopic relative entropies and gradients on matrix
// files, certify the divergence inequalities on randomized ensembles, sweep
// the triangle bounds over (a, t) grids, and report endpoint limits.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "trekit/divergences.hpp"
#include "trekit/harness.hpp"
#include "trekit/matrix_io.hpp"

namespace {

using nlohmann::ordered_json;

ordered_json json_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

ordered_json matrix_json(const trekit::CMatrix& m) {
  ordered_json entries = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back({m(i, j).real(), m(i, j).imag()});
    }
    entries.push_back(std::move(row));
  }
  return ordered_json{{"dim", m.rows()}, {"entries", std::move(entries)}};
}

ordered_json tol_json(const trekit::ToleranceConfig& tol) {
  return ordered_json{{"rank_tol", tol.rank_tol},
                      {"confluence_tol", tol.confluence_tol},
                      {"hermiticity_tol", tol.hermiticity_tol}};
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::string token;
  std::stringstream ss(text);
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &pos);
    } catch (const std::exception&) {
      throw trekit::InvalidSpec("cannot parse grid value: " + token);
    }
    if (pos != token.size()) throw trekit::InvalidSpec("cannot parse grid value: " + token);
    out.push_back(v);
  }
  if (out.empty()) throw trekit::InvalidSpec("grid is empty");
  return out;
}

std::uint64_t seed_or_env(std::optional<std::uint64_t> flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("TRE_KIT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw trekit::InvalidSpec("TRE_KIT_SEED is not an integer");
    }
  }
  return 0;
}

std::string format_sig(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string reports_to_csv(const std::vector<trekit::CheckReport>& reports) {
  std::ostringstream os;
  os << "check_name,trials,violations,min_margin,p1,p50,p99,seed,tol,config_digest\n";
  for (const auto& r : reports) {
    os << r.check_name << ',' << r.trials << ',' << r.violations << ','
       << format_sig(r.min_margin) << ',' << format_sig(r.p1) << ',' << format_sig(r.p50)
       << ',' << format_sig(r.p99) << ',' << r.seed << ',' << format_sig(r.tol) << ','
       << r.config_digest << '\n';
  }
  return os.str();
}

std::string sweep_to_csv(const std::vector<trekit::SweepRow>& rows) {
  std::ostringstream os;
  os << "a,t,bound_tight,bound_linear,achieved\n";
  for (const auto& r : rows) {
    os << format_sig(r.a) << ',' << format_sig(r.t) << ',' << format_sig(r.bound_tight)
       << ',' << format_sig(r.bound_linear) << ',' << format_sig(r.achieved) << '\n';
  }
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw trekit::ParseError("cannot open " + path + " for writing");
  out << text;
}

struct ComputeArgs {
  std::string rho_path;
  std::string sigma_path;
  double a = 0.5;
  bool has_a = false;
  bool ordinary = false;
  int gradient = 0;
  trekit::ToleranceConfig tol;
};

int cmd_compute(const ComputeArgs& args) {
  if (args.ordinary == args.has_a) {
    throw trekit::InvalidSpec("compute requires exactly one of --a or --ordinary");
  }
  const trekit::DensityMatrix rho =
      trekit::read_density_file(args.rho_path, args.tol.hermiticity_tol);
  trekit::DivergenceResult result;
  ordered_json out;
  out["command"] = "compute";
  if (args.ordinary) {
    const trekit::PsdMatrix sigma =
        trekit::read_psd_file(args.sigma_path, args.tol.hermiticity_tol);
    result = trekit::rel_entropy(rho, sigma, args.tol);
    out["a"] = "ordinary";
    if (args.gradient == 1) {
      out["gradient"] = matrix_json(trekit::grad1_rel(rho, sigma, args.tol).entries());
    } else if (args.gradient == 2) {
      out["gradient"] = matrix_json(trekit::grad2_rel(rho, sigma, args.tol).entries());
    }
  } else {
    const trekit::DensityMatrix sigma =
        trekit::read_density_file(args.sigma_path, args.tol.hermiticity_tol);
    result = trekit::tre(args.a, rho, sigma, args.tol);
    out["a"] = args.a;
    if (args.gradient == 1) {
      out["gradient"] = matrix_json(trekit::grad1_tre(args.a, rho, sigma, args.tol).entries());
    } else if (args.gradient == 2) {
      out["gradient"] = matrix_json(trekit::grad2_tre(args.a, rho, sigma, args.tol).entries());
    }
  }
  out["value"] = json_real(result.value);
  out["support_contained"] = result.support_contained;
  out["effective_ranks"] = {result.effective_ranks.first, result.effective_ranks.second};
  out["tol"] = tol_json(args.tol);
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct VerifyArgs {
  std::string theorem = "all";
  long trials = 1000;
  std::vector<int> dims;
  std::optional<std::uint64_t> seed;
  double tol = 1e-9;
  int jobs = 1;
  bool equality_family = false;
  std::optional<double> a;
  std::optional<double> t;
  std::string report_path;
  std::string format = "json";
  std::string dump_dir;
  bool per_trial = false;
  trekit::ToleranceConfig numeric_tol;
};

int cmd_verify(const VerifyArgs& args) {
  std::vector<trekit::CheckReport> reports;
  if (args.equality_family) {
    if (args.theorem != "triangle1" && args.theorem != "triangle2") {
      throw trekit::InvalidSpec("--equality-family applies to triangle1 or triangle2");
    }
    std::vector<double> a_grid = {0.1, 0.3, 0.5, 0.7, 0.9};
    std::vector<double> t_grid = a_grid;
    if (args.a) a_grid = {*args.a};
    if (args.t) t_grid = {*args.t};
    const int dim = args.dims.empty() ? 2 : args.dims.front();
    reports.push_back(args.theorem == "triangle1"
                          ? trekit::run_triangle1_equality(a_grid, t_grid, dim,
                                                           args.numeric_tol)
                          : trekit::run_triangle2_equality(a_grid, t_grid, dim,
                                                           args.numeric_tol));
  } else {
    trekit::SuiteConfig cfg;
    cfg.checks = {args.theorem};
    if (!args.dims.empty()) cfg.dims = args.dims;
    cfg.trials = args.trials;
    cfg.seed = seed_or_env(args.seed);
    cfg.tol = args.tol;
    cfg.jobs = args.jobs;
    cfg.per_trial = args.per_trial;
    cfg.dump_failures_dir = args.dump_dir;
    cfg.numeric_tol = args.numeric_tol;
    reports = trekit::run_suite(cfg);
  }

  const std::string rendered = args.format == "csv" ? reports_to_csv(reports)
                                                    : trekit::reports_to_json(reports);
  if (!args.report_path.empty()) {
    write_text_file(args.report_path, rendered);
  }
  bool pass = true;
  for (const auto& r : reports) {
    pass = pass && r.passed();
    std::cout << (r.passed() ? "pass " : "FAIL ") << r.check_name << ": trials=" << r.trials
              << " violations=" << r.violations << " min_margin=" << format_sig(r.min_margin)
              << "\n";
  }
  return pass ? 0 : 1;
}

int cmd_sweep(const std::string& a_grid_text, const std::string& t_grid_text,
              const std::string& report_path, const trekit::ToleranceConfig& tol) {
  const std::vector<trekit::SweepRow> rows =
      trekit::sweep_bounds(parse_grid(a_grid_text), parse_grid(t_grid_text), tol);
  const std::string csv = sweep_to_csv(rows);
  std::cout << csv;
  if (!report_path.empty()) write_text_file(report_path, csv);
  return 0;
}

int cmd_limits(const std::string& rho_path, const std::string& sigma_path,
               const std::string& schedule_text, const trekit::ToleranceConfig& tol) {
  const trekit::DensityMatrix rho = trekit::read_density_file(rho_path, tol.hermiticity_tol);
  const trekit::DensityMatrix sigma =
      trekit::read_density_file(sigma_path, tol.hermiticity_tol);
  const double s0 = trekit::tre_limit(0, rho, sigma, tol);
  const double s1 = trekit::tre_limit(1, rho, sigma, tol);
  ordered_json out;
  out["command"] = "limits";
  out["s0"] = s0;
  out["s1"] = s1;
  if (!schedule_text.empty()) {
    ordered_json arr = ordered_json::array();
    for (double a : parse_grid(schedule_text)) {
      const double v = trekit::tre(a, rho, sigma, tol).value;
      arr.push_back({{"a", a},
                     {"value", json_real(v)},
                     {"gap_to_s0", json_real(std::abs(v - s0))},
                     {"gap_to_s1", json_real(std::abs(v - s1))}});
    }
    out["schedule"] = std::move(arr);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"telescopic relative entropy toolkit"};
  app.require_subcommand(1);

  ComputeArgs cargs;
  double rank_tol = 1e-10;
  double confluence_tol = 1e-7;

  CLI::App* compute = app.add_subcommand("compute", "divergence of two matrix files");
  compute->add_option("--rho", cargs.rho_path, "first state file")->required();
  compute->add_option("--sigma", cargs.sigma_path, "second argument file")->required();
  CLI::Option* a_opt = compute->add_option("--a", cargs.a, "telescope parameter in (0,1)");
  compute->add_flag("--ordinary", cargs.ordinary, "ordinary relative entropy");
  compute->add_option("--gradient", cargs.gradient, "also print gradient 1|2")
      ->check(CLI::Range(1, 2));

  VerifyArgs vargs;
  CLI::App* verify = app.add_subcommand("verify", "randomized inequality certification");
  verify->add_option("--theorem", vargs.theorem,
                     "triangle1|triangle2|rbts|rbts2|tderiv|aux|all");
  verify->add_option("--trials", vargs.trials, "trials per check family");
  verify->add_option("--dim", vargs.dims, "ensemble dimensions (repeatable)");
  std::uint64_t seed_val = 0;
  CLI::Option* seed_opt =
      verify->add_option("--seed", seed_val, "rng seed (fallback: TRE_KIT_SEED)");
  verify->add_option("--tol", vargs.tol, "violation threshold for inequality margins");
  verify->add_option("--jobs", vargs.jobs, "worker threads");
  verify->add_flag("--equality-family", vargs.equality_family,
                   "exact equality-family margins (triangle1/triangle2)");
  double a_val = 0.0, t_val = 0.0;
  CLI::Option* a_cell = verify->add_option("--a", a_val, "single a for the equality family");
  CLI::Option* t_cell = verify->add_option("--t", t_val, "single t for the equality family");
  verify->add_option("--report", vargs.report_path, "report output path");
  verify->add_option("--format", vargs.format, "report format")
      ->check(CLI::IsMember({"json", "csv"}));
  verify->add_option("--dump-failures", vargs.dump_dir, "directory for offending inputs");
  verify->add_flag("--per-trial", vargs.per_trial, "include per-trial records in reports");

  std::string a_grid_text, t_grid_text, sweep_report;
  CLI::App* sweep = app.add_subcommand("sweep", "triangle2 bounds over an (a,t) grid");
  sweep->add_option("--a-grid", a_grid_text, "comma-separated a values")->required();
  sweep->add_option("--t-grid", t_grid_text, "comma-separated t values")->required();
  sweep->add_option("--report", sweep_report, "also write the CSV here");

  std::string lrho, lsigma, schedule;
  CLI::App* limits = app.add_subcommand("limits", "closed-form endpoint limits");
  limits->add_option("--rho", lrho, "first state file")->required();
  limits->add_option("--sigma", lsigma, "second state file")->required();
  limits->add_option("--a-schedule", schedule, "comma-separated a values approaching 0");

  for (CLI::App* sub : {compute, verify, sweep, limits}) {
    sub->add_option("--rank-tol", rank_tol, "support detection cutoff");
    sub->add_option("--confluence-tol", confluence_tol, "divided-difference gap threshold");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    trekit::ToleranceConfig tol;
    tol.rank_tol = rank_tol;
    tol.confluence_tol = confluence_tol;
    tol.validate();

    if (compute->parsed()) {
      cargs.has_a = a_opt->count() > 0;
      cargs.tol = tol;
      return cmd_compute(cargs);
    }
    if (verify->parsed()) {
      if (seed_opt->count() > 0) vargs.seed = seed_val;
      if (a_cell->count() > 0) vargs.a = a_val;
      if (t_cell->count() > 0) vargs.t = t_val;
      vargs.numeric_tol = tol;
      return cmd_verify(vargs);
    }
    if (sweep->parsed()) {
      return cmd_sweep(a_grid_text, t_grid_text, sweep_report, tol);
    }
    if (limits->parsed()) {
      return cmd_limits(lrho, lsigma, schedule, tol);
    }
    return 2;
  } catch (const trekit::EigensolverFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const trekit::QuadratureNonConvergence& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const trekit::SupportMismatch& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const trekit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
}
