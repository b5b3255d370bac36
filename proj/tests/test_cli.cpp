#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

using Catch::Matchers::ContainsSubstring;

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

const fs::path& scratch_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("lagforge-cli-" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out_path = scratch_dir() / ("stdout-" + std::to_string(counter) + ".txt");
  const fs::path err_path = scratch_dir() / ("stderr-" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd = std::string("\"") + LAGFORGE_CLI_PATH + "\" " + args + " > \"" +
                          out_path.string() + "\" 2> \"" + err_path.string() + "\"";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  if (raw != -1 && WIFEXITED(raw)) r.code = WEXITSTATUS(raw);
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

fs::path scratch_file(const std::string& name) { return scratch_dir() / name; }

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string field;
  while (in >> field) fields.push_back(field);
  return fields;
}

// Flips the sign of the largest immersion component anywhere in the file, so
// the corrupted value dominates every interpolation window it touches.
std::string flip_largest_component(const std::string& text, std::size_t coord_fields) {
  std::vector<std::string> lines = split_lines(text);
  std::size_t best_line = 0;
  std::size_t best_field = 0;
  double best_mag = -1.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_fields(lines[i]);
    for (std::size_t f = coord_fields; f < fields.size(); ++f) {
      const double mag = std::abs(std::stod(fields[f]));
      if (mag > best_mag) {
        best_mag = mag;
        best_line = i;
        best_field = f;
      }
    }
  }
  REQUIRE(best_mag > 0.1);
  auto fields = split_fields(lines[best_line]);
  std::string& token = fields[best_field];
  token = token.front() == '-' ? token.substr(1) : "-" + token;
  std::string rebuilt;
  for (std::size_t f = 0; f < fields.size(); ++f) {
    if (f > 0) rebuilt += ' ';
    rebuilt += fields[f];
  }
  lines[best_line] = rebuilt;
  std::string joined;
  for (const auto& line : lines) joined += line + "\n";
  return joined;
}

double parse_after(const std::string& text, const std::string& label) {
  const auto pos = text.find(label);
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + label.size()));
}

}  // namespace

TEST_CASE("delta prints the coefficient, bound, and special-case classification") {
  const RunResult plain = run_cli("delta --n 3 --parts 2");
  CHECK(plain.code == 0);
  CHECK_THAT(plain.out, ContainsSubstring("a = 3/2 (1.5)"));
  CHECK_THAT(plain.out, ContainsSubstring("bound rhs = "));
  CHECK_THAT(plain.out, !ContainsSubstring("special case"));

  const RunResult integral = run_cli("delta --n 4 --parts 3");
  CHECK(integral.code == 0);
  CHECK_THAT(integral.out, ContainsSubstring("a = 3 (3)"));

  const RunResult tagged = run_cli("delta --n 5 --parts 2,2 --d 1/4");
  CHECK(tagged.code == 0);
  CHECK_THAT(tagged.out,
             ContainsSubstring("special case one (d = 1/(2+m), m | n-1): yes, m = 2"));
  CHECK_THAT(tagged.out, ContainsSubstring("special case two (d = 1/(n-1), n >= 5): yes"));
  CHECK_THAT(tagged.out, ContainsSubstring("[equality family not certified]"));

  const RunResult untagged = run_cli("delta --n 7 --parts 2,2 --d 1/3");
  CHECK(untagged.code == 0);
  CHECK_THAT(untagged.out, ContainsSubstring("special case one (d = 1/(2+m), m | n-1): no"));
  CHECK_THAT(untagged.out, ContainsSubstring("special case two (d = 1/(n-1), n >= 5): no"));
}

TEST_CASE("delta emits machine-readable JSON") {
  const RunResult tagged = run_cli("delta --n 5 --parts 2,2 --d 1/4 --json");
  REQUIRE(tagged.code == 0);
  const auto j = nlohmann::json::parse(tagged.out);
  CHECK(j["n"] == 5);
  CHECK(j["parts"] == nlohmann::json::array({2, 2}));
  CHECK(j["a"] == "25/4");
  CHECK(j["a_decimal"].get<double>() == Catch::Approx(6.25));
  CHECK(j["h_norm_sq"].get<double>() == Catch::Approx(1.0));
  CHECK(j["c"] == 0);
  CHECK(j.contains("bound_rhs"));
  REQUIRE(j.contains("special"));
  CHECK(j["special"]["case_one"] == true);
  CHECK(j["special"]["case_one_m"] == 2);
  CHECK(j["special"]["case_two"] == true);

  const RunResult plain = run_cli("delta --n 3 --parts 2 --json");
  REQUIRE(plain.code == 0);
  const auto p = nlohmann::json::parse(plain.out);
  CHECK(p["a"] == "3/2");
  CHECK(!p.contains("special"));
}

TEST_CASE("delta rejects malformed partitions with usage errors") {
  const RunResult too_big = run_cli("delta --n 3 --parts 3");
  CHECK(too_big.code == 2);
  CHECK_THAT(too_big.err, ContainsSubstring("error:"));
  CHECK_THAT(too_big.err, ContainsSubstring("<= n-1"));

  const RunResult too_small = run_cli("delta --n 3 --parts 1");
  CHECK(too_small.code == 2);
  CHECK_THAT(too_small.err, ContainsSubstring("error:"));

  const RunResult missing = run_cli("delta --n 3");
  CHECK(missing.code == 2);
  CHECK(!missing.err.empty());
}

TEST_CASE("integrate writes a deterministic trajectory and checks closed forms") {
  const fs::path first = scratch_file("traj-a.csv");
  const fs::path second = scratch_file("traj-b.csv");
  const std::string flags =
      "integrate --c 0 --d 1 --lambda0 1 --mu0 1 --t0 1 --t-end 2 --closed-form --output ";

  const RunResult a = run_cli(flags + "\"" + first.string() + "\"");
  REQUIRE(a.code == 0);
  CHECK(a.out.empty());
  CHECK_THAT(a.err, ContainsSubstring("closed-form max deviation: "));
  CHECK(parse_after(a.err, "closed-form max deviation: ") <= 1e-8);

  const auto lines = split_lines(slurp(first));
  REQUIRE(lines.size() == 1002);
  CHECK(lines.front() == "t,lambda,mu,theta,q_factor,conserved");

  const RunResult b = run_cli(flags + "\"" + second.string() + "\"");
  REQUIRE(b.code == 0);
  CHECK(slurp(first) == slurp(second));

  const RunResult single = run_cli("integrate --c 0 --t0 0.3 --t-end 0.3");
  REQUIRE(single.code == 0);
  CHECK(split_lines(single.out).size() == 2);
}

TEST_CASE("integrate signals truncation with exit code 4") {
  const fs::path out = scratch_file("traj-truncated.csv");
  const RunResult r = run_cli(
      "integrate --c 0 --d 1/4 --lambda0 1 --mu0 -0.1 --lambda-floor 0.5 --t-end 50 --output \"" +
      out.string() + "\"");
  CHECK(r.code == 4);
  CHECK_THAT(r.err, ContainsSubstring("truncated: lambda_floor at t = "));
  CHECK(split_lines(slurp(out)).size() > 2);
}

TEST_CASE("closed-form cross-check demands a flat profile") {
  const RunResult curved = run_cli("integrate --c 1 --closed-form");
  CHECK(curved.code == 2);
  CHECK_THAT(curved.err, ContainsSubstring("requires a flat profile"));

  const RunResult pole = run_cli("integrate --c 0 --d 1/2");
  CHECK(pole.code == 2);
  CHECK_THAT(pole.err, ContainsSubstring("error:"));
}

TEST_CASE("build writes a chart sample file with a JSON header") {
  const fs::path out = scratch_file("chart-cpn.csv");
  const RunResult r =
      run_cli("build --c 1 --d 0.25 --seed torus --n 3 --output \"" + out.string() + "\"");
  REQUIRE(r.code == 0);
  CHECK_THAT(r.err, ContainsSubstring("built cpn_lift chart"));
  CHECK_THAT(r.err, ContainsSubstring("n = 3, d = 1/4"));
  CHECK_THAT(r.err, ContainsSubstring("seed = legendrian_torus(3)"));

  const auto lines = split_lines(slurp(out));
  REQUIRE(lines.size() == 1 + 9 * 5 * 5);
  const auto meta = nlohmann::json::parse(lines.front());
  CHECK(meta["builder"] == "cpn_lift");
  CHECK(meta["d"] == "1/4");
  CHECK(meta["c"] == 1);
  CHECK(meta["branch"] == 0);
  CHECK(meta["seed"] == "legendrian_torus(3)");
  CHECK(meta["n"] == 3);
  CHECK(meta["m"] == 4);
  CHECK(split_fields(lines[1]).size() == 3 + 2 * 4);
}

TEST_CASE("build rejects mismatched seeds and the degenerate minimal configuration") {
  const RunResult mismatch = run_cli("build --c -1 --branch 1 --seed torus --n 3 --output \"" +
                                     scratch_file("never-a.csv").string() + "\"");
  CHECK(mismatch.code == 2);
  CHECK_THAT(mismatch.err, ContainsSubstring("requires an anti-de-Sitter (ads) seed"));

  const RunResult degenerate = run_cli("build --c 0 --d -1 --n 2 --seed circle --output \"" +
                                       scratch_file("never-b.csv").string() + "\"");
  CHECK(degenerate.code == 2);
  CHECK_THAT(degenerate.err,
             ContainsSubstring("n = 2 with d = -1 gives the degenerate minimal case; "
                               "this construction requires d != -1 when n = 2."));
}

TEST_CASE("build propagates profile truncation") {
  const fs::path out = scratch_file("chart-truncated.csv");
  const RunResult r = run_cli(
      "build --c 0 --d 1/4 --seed torus --n 3 --t-end 3 --magnitude-cap 2 --output \"" +
      out.string() + "\"");
  CHECK(r.code == 4);
  CHECK_THAT(r.err, ContainsSubstring("truncated:"));
  const auto lines = split_lines(slurp(out));
  REQUIRE(lines.size() > 1);
  CHECK(nlohmann::json::parse(lines.front())["builder"] == "flat");
}

TEST_CASE("verify passes a freshly built spherical chart") {
  const RunResult r = run_cli("verify --c 1 --d 0.25 --seed torus --n 3");
  REQUIRE(r.code == 0);
  CHECK_THAT(r.out, ContainsSubstring("pass  constraint"));
  CHECK_THAT(r.out, ContainsSubstring("pass  horizontality"));
  CHECK_THAT(r.out, ContainsSubstring("pass  lagrangian"));
  CHECK_THAT(r.out, ContainsSubstring("pass  eq1_d"));
  CHECK_THAT(r.out, ContainsSubstring("pass  gauss"));
  CHECK_THAT(r.out, !ContainsSubstring("FAIL"));
  CHECK(r.err.empty());
}

TEST_CASE("verify honors tolerance overrides") {
  const RunResult forced = run_cli(
      "verify --c 0 --d 1/4 --seed torus --n 3 --t-count 5 --u-count 3 --tol eq1_d=1e-12");
  CHECK(forced.code == 3);
  CHECK_THAT(forced.err, ContainsSubstring("1 check(s) failed"));
  CHECK_THAT(forced.out, ContainsSubstring("FAIL  eq1_d"));

  const RunResult unknown = run_cli("verify --c 0 --n 3 --tol nope=1");
  CHECK(unknown.code == 2);
  CHECK_THAT(unknown.err, ContainsSubstring("--tol: unknown check 'nope'"));

  const RunResult malformed = run_cli("verify --c 0 --n 3 --tol eq1_d:1");
  CHECK(malformed.code == 2);
  CHECK_THAT(malformed.err, ContainsSubstring("--tol expects check=value"));
}

TEST_CASE("verify checks sampled chart files and flags corrupted data") {
  const fs::path chart = scratch_file("chart-flat.csv");
  const RunResult built = run_cli(
      "build --c 0 --d 1/4 --seed torus --n 3 --t-count 33 --u-count 17 --output \"" +
      chart.string() + "\"");
  REQUIRE(built.code == 0);

  const std::string loose_tols =
      " --tol lagrangian=1e-2 --tol warped_block=1e-2 --tol warped_seed_drift=1e-2";
  const RunResult clean = run_cli("verify --input \"" + chart.string() + "\"" + loose_tols);
  REQUIRE(clean.code == 0);
  CHECK_THAT(clean.out, ContainsSubstring("pass  lagrangian"));
  CHECK_THAT(clean.out, ContainsSubstring("pass  warped_block"));
  CHECK_THAT(clean.out, ContainsSubstring("pass  warped_seed_drift"));
  CHECK_THAT(clean.out, !ContainsSubstring("constraint"));
  CHECK_THAT(clean.out, !ContainsSubstring("eq1_lambda"));
  CHECK_THAT(clean.out, !ContainsSubstring("FAIL"));

  const fs::path corrupted = scratch_file("chart-flat-corrupted.csv");
  std::ofstream(corrupted) << flip_largest_component(slurp(chart), 3);
  const RunResult bad = run_cli("verify --input \"" + corrupted.string() + "\"" + loose_tols);
  CHECK(bad.code == 3);
  CHECK_THAT(bad.out, ContainsSubstring("FAIL  lagrangian"));
  CHECK_THAT(bad.err, ContainsSubstring("check(s) failed"));

  const RunResult missing = run_cli("verify --input \"" +
                                    scratch_file("chart-missing.csv").string() + "\"");
  CHECK(missing.code == 2);
  CHECK_THAT(missing.err, ContainsSubstring("cannot open chart file"));
}

TEST_CASE("verify reports seed certification failures") {
  const RunResult r =
      run_cli("verify --c 0 --d 1/4 --seed perturbed_torus --n 3 --t-count 5 --u-count 3");
  CHECK(r.code == 2);
  CHECK_THAT(r.err, ContainsSubstring("failed certification"));
}

TEST_CASE("report writes matching JSON, CSV, and plot artifacts") {
  const fs::path json_path = scratch_file("report.json");
  const fs::path csv_path = scratch_file("report.csv");
  const fs::path plot_prefix = scratch_file("plots");
  const std::string flags = "report --c 0 --d 1/4 --seed torus --n 3 --t-count 5 --u-count 3";

  const RunResult r = run_cli(flags + " --report-json \"" + json_path.string() +
                              "\" --report-csv \"" + csv_path.string() + "\" --plot-data \"" +
                              plot_prefix.string() + "\"");
  REQUIRE(r.code == 0);
  CHECK_THAT(r.out, ContainsSubstring(
                        "chart: flat, n = 3, c = 0, d = 1/4, seed = legendrian_torus(3)"));
  CHECK_THAT(r.out, ContainsSubstring("45 grid points"));
  CHECK_THAT(r.out, !ContainsSubstring("FAIL"));

  const auto j = nlohmann::json::parse(slurp(json_path));
  CHECK(j["chart"]["builder"] == "flat");
  CHECK(j["chart"]["d"] == "1/4");
  CHECK(j["points"] == 45);
  CHECK(j["checks"]["lagrangian"]["applicable"] == true);
  CHECK(j["checks"]["constraint"]["applicable"] == false);

  const std::string csv = slurp(csv_path);
  CHECK_THAT(split_lines(csv).front(),
             ContainsSubstring("t,u2,u3,constraint,lagrangian,horizontality"));
  CHECK(split_lines(csv).size() == 1 + 45);

  CHECK(slurp(plot_prefix.string() + ".residuals.csv") == csv);
  const auto phase = split_lines(slurp(plot_prefix.string() + ".phase.csv"));
  REQUIRE(!phase.empty());
  CHECK(phase.front() == "t,lambda,mu,theta,q_factor,conserved");

  const fs::path json_again = scratch_file("report-again.json");
  const RunResult rerun = run_cli(flags + " --report-json \"" + json_again.string() + "\"");
  REQUIRE(rerun.code == 0);
  CHECK(slurp(json_path) == slurp(json_again));
}

TEST_CASE("config files supply defaults that command-line flags override") {
  const fs::path cfg = scratch_file("delta.ini");
  std::ofstream(cfg) << "[delta]\nn = 3\n";

  const RunResult from_config = run_cli("--config \"" + cfg.string() + "\" delta --parts 2");
  CHECK(from_config.code == 0);
  CHECK_THAT(from_config.out, ContainsSubstring("a = 3/2"));

  const RunResult overridden =
      run_cli("--config \"" + cfg.string() + "\" delta --n 4 --parts 3");
  CHECK(overridden.code == 0);
  CHECK_THAT(overridden.out, ContainsSubstring("a = 3 (3)"));
}

TEST_CASE("usage errors and help exit with documented codes") {
  const RunResult bare = run_cli("");
  CHECK(bare.code == 2);

  const RunResult unknown = run_cli("bogus --n 3");
  CHECK(unknown.code == 2);

  const RunResult help = run_cli("--help");
  CHECK(help.code == 0);
  CHECK_THAT(help.out, ContainsSubstring("delta"));
  CHECK_THAT(help.out, ContainsSubstring("integrate"));
  CHECK_THAT(help.out, ContainsSubstring("verify"));
}
