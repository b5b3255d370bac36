// Batch front end: delta / integrate / build / verify / report subcommands
// over the header library, with key = value config files (sections per
// subcommand), deterministic text output, and exit codes
//   0 pass, 2 usage or config error, 3 verification failure,
//   4 numerical truncation (a blow-up guard was hit).

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lagforge/delta.hpp"
#include "lagforge/format.hpp"
#include "lagforge/immersions.hpp"
#include "lagforge/linalg.hpp"
#include "lagforge/profile.hpp"
#include "lagforge/rational.hpp"
#include "lagforge/seeds.hpp"
#include "lagforge/verifier.hpp"

namespace {

using namespace lagforge;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitVerification = 3;
constexpr int kExitTruncation = 4;

struct DeltaOpts {
  int n = 3;
  std::vector<int> parts;
  std::string d;
  double h_norm_sq = 1.0;
  int c = 0;
  bool as_json = false;
};

struct PipelineOpts {
  int c = 0;
  std::string d = "1/4";
  double t0 = 0.0;
  std::optional<double> t_end;
  double step = 1e-3;
  std::optional<double> lambda0;
  std::optional<double> mu0;
  std::optional<double> theta0;
  double error_tol = 1e-10;
  double lambda_floor = 1e-9;
  double magnitude_cap = 1e9;

  std::string seed = "legendrian_torus";
  std::string seed_file;
  int n = 3;
  int branch = 0;
};

struct SampleOpts {
  int t_count = 9;
  int u_count = 5;
};

struct VerifyOpts {
  std::string input;
  std::string report_json;
  std::string report_csv;
  std::vector<std::string> tol_overrides;
  double fd_step = 1e-4;
  double curvature_step = 1e-3;
};

void add_profile_options(CLI::App* cmd, PipelineOpts& o) {
  cmd->add_option("--c", o.c, "ambient holomorphic curvature sign: -1, 0, or +1")
      ->check(CLI::Range(-1, 1))
      ->capture_default_str();
  cmd->add_option("--d", o.d, "warping ratio d as p/q or exact decimal (never 0 or 1/2)")
      ->capture_default_str();
  cmd->add_option("--t0", o.t0, "initial profile time")->capture_default_str();
  cmd->add_option("--t-end", o.t_end, "final profile time (default t0 + 0.5)");
  cmd->add_option("--step", o.step, "profile sample spacing")->capture_default_str();
  cmd->add_option("--lambda0", o.lambda0, "initial lambda (default depends on c and branch)");
  cmd->add_option("--mu0", o.mu0, "initial mu");
  cmd->add_option("--theta0", o.theta0, "initial theta");
  cmd->add_option("--error-tol", o.error_tol, "step-doubling tolerance")->capture_default_str();
  cmd->add_option("--lambda-floor", o.lambda_floor, "truncate when |lambda| falls below this")
      ->capture_default_str();
  cmd->add_option("--magnitude-cap", o.magnitude_cap, "truncate when |lambda| or |mu| exceeds")
      ->capture_default_str();
}

void add_seed_options(CLI::App* cmd, PipelineOpts& o) {
  cmd->add_option("--seed", o.seed,
                  "catalog seed: circle, hyperbolic, flat_line, flat_plane, torus, "
                  "legendrian_torus, perturbed_torus, ads_hyperboloid")
      ->capture_default_str();
  cmd->add_option("--seed-file", o.seed_file, "seed sample file (overrides --seed)");
  cmd->add_option("--n", o.n, "chart dimension n (seed dimension follows)")
      ->check(CLI::Range(2, 16))
      ->capture_default_str();
  cmd->add_option("--branch", o.branch, "c = -1 lift branch: 1, 2, 3, or 0 = auto from q_factor")
      ->check(CLI::Range(0, 3))
      ->capture_default_str();
}

void add_verify_options(CLI::App* cmd, VerifyOpts& o, SampleOpts& s) {
  cmd->add_option("--input", o.input, "verify a chart sample file instead of a fresh build");
  cmd->add_option("--report-json", o.report_json, "write the JSON report here");
  cmd->add_option("--report-csv", o.report_csv, "write the per-point CSV report here");
  cmd->add_option("--tol", o.tol_overrides, "override one tolerance as check=value (repeatable)");
  cmd->add_option("--fd-step", o.fd_step, "first-derivative step")->capture_default_str();
  cmd->add_option("--curvature-step", o.curvature_step, "curvature-derivative step")
      ->capture_default_str();
  cmd->add_option("--t-count", s.t_count, "report grid t samples")->capture_default_str();
  cmd->add_option("--u-count", s.u_count, "report grid samples per seed axis")
      ->capture_default_str();
}

ProfileParams profile_params(const PipelineOpts& o) {
  ProfileParams p;
  p.curvature_c = o.c;
  p.d = parse_rational(o.d);
  p.validate();
  return p;
}

ProfileState initial_state(const PipelineOpts& o, const ProfileParams& p) {
  ProfileState s;
  s.t = o.t0;
  const double dval = p.d_value();
  if (o.c == 0) {
    s.lambda = 1.0;
    s.mu = -0.5;
  } else if (o.c == 1) {
    s.lambda = 1.0;
    s.mu = 0.0;
  } else if (o.branch == 2) {
    s.lambda = std::sqrt(1.5) / std::abs(dval);
    s.mu = 0.5;
  } else if (o.branch == 3) {
    s.mu = 0.5;
    s.lambda = std::sqrt(1.0 - s.mu * s.mu) / std::abs(dval);
  } else {
    s.lambda = 0.5;
    s.mu = 0.5;
  }
  s.theta = 0.0;
  if (o.lambda0) s.lambda = *o.lambda0;
  if (o.mu0) s.mu = *o.mu0;
  if (o.theta0) s.theta = *o.theta0;
  return s;
}

Trajectory run_integration(const PipelineOpts& o, const ProfileParams& p,
                           const ProfileState& s0) {
  IntegrateOptions io;
  io.step = o.step;
  io.error_tolerance = o.error_tol;
  io.lambda_floor = o.lambda_floor;
  io.magnitude_cap = o.magnitude_cap;
  return integrate(p, s0, o.t_end ? *o.t_end : o.t0 + 0.5, io);
}

void reject_degenerate_minimal(int n, const Rational& d) {
  if (n == 2 && d == Rational(-1))
    throw std::invalid_argument(
        "n = 2 with d = -1 gives the degenerate minimal case; this construction requires "
        "d != -1 when n = 2.");
}

SeedMap resolve_seed(const PipelineOpts& o) {
  if (!o.seed_file.empty()) {
    std::ifstream in(o.seed_file);
    if (!in) throw std::runtime_error("cannot open seed file '" + o.seed_file + "'");
    return read_seed_samples(in);
  }
  return catalog_seed(o.seed, o.n);
}

SeedMap certified_seed(const PipelineOpts& o) {
  SeedMap seed = resolve_seed(o);
  if (!seed.certified) {
    const SeedCertificate cert = certify_seed(seed);
    if (!cert.certified())
      throw std::runtime_error(
          "seed '" + seed.id + "' failed certification: lagrangian " +
          fmt17(cert.lagrangian_residual) + ", minimality " + fmt17(cert.minimality_residual) +
          (cert.constraint_residual ? ", constraint " + fmt17(*cert.constraint_residual) : "") +
          (cert.horizontality_residual
               ? ", horizontality " + fmt17(*cert.horizontality_residual)
               : "") +
          ", metric eigenvalues in [" + fmt17(cert.min_metric_eigenvalue) + ", " +
          fmt17(cert.max_metric_eigenvalue) + "]");
    seed.certified = true;
  }
  return seed;
}

ImmersionChart build_pipeline(const PipelineOpts& o) {
  const ProfileParams p = profile_params(o);
  reject_degenerate_minimal(o.n, p.d);
  const Trajectory traj = run_integration(o, p, initial_state(o, p));
  SeedMap seed = certified_seed(o);
  if (o.c == 0) return build_flat(traj, std::move(seed));
  if (o.c == 1) return build_cpn_lift(traj, std::move(seed));
  ChnLiftOptions copts;
  copts.branch = o.branch;
  std::shared_ptr<const WPotential> w;
  if (seed.target == SeedTarget::flat)
    w = std::make_shared<const WPotential>(solve_w(seed, seed.box_lo, 0.0));
  return build_chn_lift(traj, std::move(seed), copts, std::move(w));
}

std::map<std::string, double> tolerances_with_overrides(const std::vector<std::string>& items) {
  auto tol = default_tolerances();
  for (const std::string& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--tol expects check=value, got '" + item + "'");
    const std::string name = item.substr(0, eq);
    if (tol.find(name) == tol.end())
      throw std::invalid_argument("--tol: unknown check '" + name + "'");
    tol[name] = parse_double(item.substr(eq + 1));
  }
  return tol;
}

int cmd_delta(const DeltaOpts& o) {
  Partition part{o.n, o.parts};
  part.validate();
  const Rational a = a_coefficient(part);
  const double rhs = delta_bound_rhs(part, o.h_norm_sq, o.c);
  std::optional<SpecialCaseTag> tag;
  if (!o.d.empty()) tag = classify_special_d(o.n, parse_rational(o.d));

  if (o.as_json) {
    nlohmann::json j;
    j["n"] = o.n;
    j["parts"] = o.parts;
    j["a"] = to_string(a);
    j["a_decimal"] = to_double(a);
    j["bound_rhs"] = rhs;
    j["h_norm_sq"] = o.h_norm_sq;
    j["c"] = o.c;
    if (tag) {
      nlohmann::json sp;
      sp["case_one"] = tag->case_one_m.has_value();
      if (tag->case_one_m) sp["case_one_m"] = *tag->case_one_m;
      sp["case_two"] = tag->case_two;
      j["special"] = sp;
    }
    std::cout << j.dump() << "\n";
    return kExitOk;
  }

  std::cout << "a = " << to_string(a) << " (" << fmt17(to_double(a)) << ")\n";
  std::cout << "bound rhs = " << fmt17(rhs) << " at |H|^2 = " << fmt17(o.h_norm_sq)
            << ", c = " << o.c << "\n";
  if (tag) {
    std::cout << "special case one (d = 1/(2+m), m | n-1): "
              << (tag->case_one_m ? "yes, m = " + std::to_string(*tag->case_one_m) : "no")
              << "\n";
    std::cout << "special case two (d = 1/(n-1), n >= 5): " << (tag->case_two ? "yes" : "no");
    if (tag->case_two) std::cout << " [equality family not certified]";
    std::cout << "\n";
  }
  return kExitOk;
}

double closed_form_deviation(const Trajectory& traj) {
  const ProfileParams& p = traj.params();
  if (p.curvature_c != 0)
    throw std::invalid_argument("--closed-form requires a flat profile (c = 0)");
  const ProfileState s0 = traj.nodes().front().y;
  double worst = 0.0;
  if (p.d == Rational(1)) {
    if (s0.mu == 0.0)
      throw std::invalid_argument("--closed-form at d = 1 requires mu0 != 0 (k2 = lambda/mu)");
    const double k2 = s0.lambda / s0.mu;
    const double offset =
        s0.theta - closed_form_flat(p.d, k2, s0.lambda).mu_theta[0].second;
    for (const auto& node : traj.nodes()) {
      const auto cf = closed_form_flat(p.d, k2, node.y.lambda).mu_theta[0];
      worst = std::max(worst, std::abs(node.y.mu - cf.first));
      worst = std::max(worst, std::abs(node.y.theta - (cf.second + offset)));
    }
    return worst;
  }
  const double k = std::sqrt(conserved_flat(p.d, s0));
  std::array<std::optional<double>, 2> offsets;
  for (const auto& node : traj.nodes()) {
    const auto cf = closed_form_flat(p.d, k, node.y.lambda).mu_theta;
    const std::size_t pick =
        std::abs(node.y.mu - cf[0].first) <= std::abs(node.y.mu - cf[1].first) ? 0 : 1;
    if (!offsets[pick]) offsets[pick] = node.y.theta - cf[pick].second;
    worst = std::max(worst, std::abs(node.y.mu - cf[pick].first));
    worst = std::max(worst, std::abs(node.y.theta - (cf[pick].second + *offsets[pick])));
  }
  return worst;
}

int cmd_integrate(const PipelineOpts& o, const std::string& output, bool closed_form) {
  const ProfileParams p = profile_params(o);
  const Trajectory traj = run_integration(o, p, initial_state(o, p));

  std::ofstream file;
  const bool to_stdout = output.empty() || output == "-";
  if (!to_stdout) {
    file.open(output);
    if (!file) throw std::runtime_error("cannot open output file '" + output + "'");
  }
  write_trajectory_csv(to_stdout ? std::cout : file, traj);

  if (closed_form)
    std::cerr << "closed-form max deviation: " << fmt17(closed_form_deviation(traj)) << "\n";
  if (traj.truncated()) {
    std::cerr << "truncated: " << to_string(traj.truncation()) << " at t = "
              << fmt17(traj.t_end()) << "\n";
    return kExitTruncation;
  }
  return kExitOk;
}

int cmd_build(const PipelineOpts& o, const SampleOpts& s, const std::string& output) {
  const ImmersionChart chart = build_pipeline(o);
  std::ofstream file;
  const bool to_stdout = output.empty() || output == "-";
  if (!to_stdout) {
    file.open(output);
    if (!file) throw std::runtime_error("cannot open output file '" + output + "'");
  }
  write_chart_samples(to_stdout ? std::cout : file, chart,
                      chart_axes(chart, s.t_count, s.u_count));
  std::cerr << "built " << chart.builder << " chart, n = " << chart.chart_dim << ", d = "
            << to_string(chart.d) << ", seed = " << chart.seed_id
            << (chart.branch ? ", branch " + std::to_string(chart.branch) : "") << ", t in ["
            << fmt17(chart.t_lo) << ", " << fmt17(chart.t_hi) << "]\n";
  if (chart.domain_truncated || (chart.profile && chart.profile->truncated())) {
    std::cerr << "truncated: "
              << (chart.domain_truncated
                      ? "integrand magnitude cap"
                      : std::string(to_string(chart.profile->truncation())))
              << "\n";
    return kExitTruncation;
  }
  return kExitOk;
}

int run_verification(const PipelineOpts& o, const VerifyOpts& v, const SampleOpts& s,
                     bool human_summary, const std::string& plot_prefix) {
  ImmersionChart chart;
  if (!v.input.empty()) {
    std::ifstream in(v.input);
    if (!in) throw std::runtime_error("cannot open chart file '" + v.input + "'");
    chart = read_chart_samples(in);
    reject_degenerate_minimal(chart.chart_dim, chart.d);
  } else {
    chart = build_pipeline(o);
  }

  ReportOptions ropts;
  ropts.t_count = s.t_count;
  ropts.u_count = s.u_count;
  ropts.fd_step = v.fd_step;
  ropts.curvature_step = v.curvature_step;
  const VerificationReport report = run_report(chart, ropts);
  const auto tol = tolerances_with_overrides(v.tol_overrides);
  const auto failures = report_failures(report, tol);

  if (!v.report_json.empty()) {
    std::ofstream out(v.report_json);
    if (!out) throw std::runtime_error("cannot open report file '" + v.report_json + "'");
    out << report_to_json(report).dump(2) << "\n";
  }
  if (!v.report_csv.empty()) {
    std::ofstream out(v.report_csv);
    if (!out) throw std::runtime_error("cannot open report file '" + v.report_csv + "'");
    write_report_csv(out, report);
  }
  if (!plot_prefix.empty()) {
    if (chart.profile) {
      std::ofstream out(plot_prefix + ".phase.csv");
      if (!out)
        throw std::runtime_error("cannot open plot file '" + plot_prefix + ".phase.csv'");
      write_trajectory_csv(out, *chart.profile);
    }
    std::ofstream out(plot_prefix + ".residuals.csv");
    if (!out)
      throw std::runtime_error("cannot open plot file '" + plot_prefix + ".residuals.csv'");
    write_report_csv(out, report);
  }

  if (human_summary) {
    std::cout << "chart: " << report.builder << ", n = " << report.chart_dim << ", c = "
              << report.curvature_c << ", d = " << to_string(report.d);
    if (report.branch) std::cout << ", branch " << report.branch;
    std::cout << ", seed = " << report.seed_id << ", " << report.points.size()
              << " grid points\n";
  }
  for (const auto& name : report.check_names) {
    const CheckStat& stat = report.checks.at(name);
    if (!stat.applicable) continue;
    const auto it = tol.find(name);
    const double bound = it == tol.end() ? 0.0 : it->second;
    std::string status = "pass";
    if (!stat.error.empty() || stat.samples == 0 || stat.max > bound) status = "FAIL";
    std::cout << status << "  " << name;
    if (stat.samples > 0) std::cout << "  max " << fmt17(stat.max) << "  tol " << fmt17(bound);
    if (!stat.error.empty()) std::cout << "  error: " << stat.error;
    std::cout << "\n";
  }
  for (const auto& note : report.notes) std::cout << "note: " << note << "\n";

  if (!failures.empty()) {
    std::cerr << failures.size() << " check(s) failed\n";
    return kExitVerification;
  }
  if (report.domain_truncated || (chart.profile && chart.profile->truncated()))
    return kExitTruncation;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Warped-product Lagrangian chart construction and verification"};
  app.set_config("--config", "", "key = value config file with one section per subcommand");
  app.require_subcommand(1);

  DeltaOpts delta_opts;
  auto* delta_cmd = app.add_subcommand(
      "delta", "Mean-curvature coefficient and curvature bound for a dimension partition");
  delta_cmd->add_option("--n", delta_opts.n, "total dimension n")->required();
  delta_cmd->add_option("--parts", delta_opts.parts, "partition parts, comma-separated")
      ->required()
      ->delimiter(',');
  delta_cmd->add_option("--d", delta_opts.d, "warping ratio to classify against special cases");
  delta_cmd->add_option("--hnorm", delta_opts.h_norm_sq, "|H|^2 for the bound right-hand side")
      ->capture_default_str();
  delta_cmd->add_option("--c", delta_opts.c, "curvature sign")->check(CLI::Range(-1, 1))
      ->capture_default_str();
  delta_cmd->add_flag("--json", delta_opts.as_json, "machine-readable output");

  PipelineOpts integrate_opts;
  std::string integrate_output;
  bool integrate_closed_form = false;
  auto* integrate_cmd =
      app.add_subcommand("integrate", "Integrate the profile equations and write trajectory CSV");
  add_profile_options(integrate_cmd, integrate_opts);
  integrate_cmd->add_option("--output", integrate_output, "CSV path (default stdout)");
  integrate_cmd->add_flag("--closed-form", integrate_closed_form,
                          "cross-check flat trajectories against the closed-form relations");

  PipelineOpts build_opts;
  SampleOpts build_samples;
  std::string build_output = "chart.csv";
  auto* build_cmd =
      app.add_subcommand("build", "Build an immersion chart and write its sample file");
  add_profile_options(build_cmd, build_opts);
  add_seed_options(build_cmd, build_opts);
  build_cmd->add_option("--output", build_output, "chart sample path")->capture_default_str();
  build_cmd->add_option("--t-count", build_samples.t_count, "t samples in the file")
      ->capture_default_str();
  build_cmd->add_option("--u-count", build_samples.u_count, "samples per seed axis")
      ->capture_default_str();

  PipelineOpts verify_opts;
  SampleOpts verify_samples;
  VerifyOpts verify_io;
  auto* verify_cmd = app.add_subcommand(
      "verify", "Run every applicable geometric check on a built or loaded chart");
  add_profile_options(verify_cmd, verify_opts);
  add_seed_options(verify_cmd, verify_opts);
  add_verify_options(verify_cmd, verify_io, verify_samples);

  PipelineOpts report_opts;
  SampleOpts report_samples;
  VerifyOpts report_io;
  std::string plot_prefix;
  auto* report_cmd = app.add_subcommand(
      "report", "Verify and render a human-readable summary, optionally with plot data");
  add_profile_options(report_cmd, report_opts);
  add_seed_options(report_cmd, report_opts);
  add_verify_options(report_cmd, report_io, report_samples);
  report_cmd->add_option("--plot-data", plot_prefix,
                         "write <prefix>.phase.csv and <prefix>.residuals.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (delta_cmd->parsed()) return cmd_delta(delta_opts);
    if (integrate_cmd->parsed())
      return cmd_integrate(integrate_opts, integrate_output, integrate_closed_form);
    if (build_cmd->parsed()) return cmd_build(build_opts, build_samples, build_output);
    if (verify_cmd->parsed())
      return run_verification(verify_opts, verify_io, verify_samples, false, "");
    if (report_cmd->parsed())
      return run_verification(report_opts, report_io, report_samples, true, plot_prefix);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  std::cerr << "error: no subcommand\n";
  return kExitUsage;
}
