#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "adass/config.hpp"
#include "adass/csv.hpp"
#include "adass/experiments.hpp"
#include "adass/synthetic.hpp"

using namespace adass;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("adass_test_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(fields);
  }
  return rows;
}

// Drops the named column so timing does not break comparisons.
std::vector<std::vector<std::string>> without(std::vector<std::vector<std::string>> rows, const std::string& col) {
  if (rows.empty()) return rows;
  const auto it = std::find(rows[0].begin(), rows[0].end(), col);
  if (it == rows[0].end()) return rows;
  const auto k = static_cast<std::size_t>(it - rows[0].begin());
  for (auto& r : rows) {
    if (k < r.size()) r.erase(r.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return rows;
}

Config small_train() {
  return Config::parse("dataset = logistic-separable\nn = 120\nd = 4\nepochs = 12\nalpha_sel = 0.9\nperiod = 3\n");
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(ADASS_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
  const Config cfg = Config::parse("# comment\n  a = 1 \nb=inf\nlist = 0.1, 0.2,0.3\nflag=yes\n\n");
  CHECK(cfg.get_size("a", 0) == 1);
  CHECK(std::isinf(cfg.get_double("b", 0.0)));
  CHECK(cfg.get_doubles("list", {}) == std::vector<double>{0.1, 0.2, 0.3});
  CHECK(cfg.get_bool("flag", false));
  CHECK(cfg.get_string("missing", "x") == "x");
  CHECK(Config::parse(cfg.to_string()).values() == cfg.values());

  CHECK_THROWS_AS(Config::parse("a=1\na=2\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("a=x").get_double("a", 0.0), ConfigError);
  CHECK_THROWS_AS(Config::parse("a=-1").get_size("a", 0), ConfigError);
  CHECK_THROWS_AS(Config::parse("a=maybe").get_bool("a", false), ConfigError);
  CHECK_THROWS_AS(Config::parse("a=1").require_known({"b"}), ConfigError);
  try {
    Config::parse("a=1\nbad line\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find('2') != std::string::npos);
  }
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-300) == "1e-300");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(kInfinity) == "inf");
  CHECK(format_double(-kInfinity) == "-inf");
}

TEST_CASE("usage errors exit with 2") {
  std::ostringstream log;
  const fs::path out = scratch("usage");
  CHECK(cmd_adass_train(Config::parse("epochz=3"), out, log) == kExitUsage);
  CHECK(log.str().find("epochz") != std::string::npos);

  log.str("");
  CHECK(cmd_lsq_criteria(Config::parse("dists=cauchy"), out, log) == kExitUsage);
  CHECK(log.str().find("uniform") != std::string::npos);
  CHECK(log.str().find("binomial") != std::string::npos);

  log.str("");
  CHECK(cmd_probe("nonsense", Config{}, out, log) == kExitUsage);
  CHECK(log.str().find("negative-example") != std::string::npos);

  CHECK(cmd_adass_train(Config::parse("alpha_sel=1.5"), out, log) == kExitUsage);
  CHECK(cmd_adass_train(Config::parse("period=2.5"), out, log) == kExitUsage);
  CHECK(cmd_lsq_criteria(Config::parse("ratios=0"), out, log) == kExitUsage);
}

TEST_CASE("least-squares criteria command") {
  const fs::path out = scratch("lsq");
  std::ostringstream log;
  const Config cfg = Config::parse("dists=gaussian\nn=200\nd=5\nnum_seeds=3\nratios=1.0\n");
  CHECK(cmd_lsq_criteria(cfg, out, log) == kExitOk);
  const auto rows = read_csv(out / "criteria_gaussian.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"criterion", "ratio", "mean_gap", "std_gap", "n_seeds"});
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(std::stod(rows[k][2]) == 0.0);
  CHECK(fs::exists(out / "resolved.cfg"));
}

TEST_CASE("training command") {
  SUBCASE("resolved config reproduces the run") {
    const fs::path a = scratch("train_a"), b = scratch("train_b");
    std::ostringstream log;
    REQUIRE(cmd_adass_train(small_train(), a, log) == kExitOk);
    const Config again = Config::load(a / "resolved.cfg");
    REQUIRE(cmd_adass_train(again, b, log) == kExitOk);
    CHECK(without(read_csv(a / "trace.csv"), "wall_ms") == without(read_csv(b / "trace.csv"), "wall_ms"));
    CHECK(without(read_csv(a / "summary.csv"), "wall_ms") == without(read_csv(b / "summary.csv"), "wall_ms"));
    CHECK(slurp(a / "resolved.cfg") == slurp(b / "resolved.cfg"));
  }

  SUBCASE("trace layout") {
    const fs::path out = scratch("train_layout");
    std::ostringstream log;
    REQUIRE(cmd_adass_train(small_train(), out, log) == kExitOk);
    const auto rows = read_csv(out / "trace.csv");
    REQUIRE(rows.size() == 13);
    CHECK(rows[0] == std::vector<std::string>{"epoch", "full_loss", "subset_loss", "ratio", "zeta1", "zeta2",
                                              "rho_partial", "samples_visited", "wall_ms"});
    for (std::size_t t = 1; t < rows.size(); ++t) {
      CHECK(rows[t][0] == std::to_string(t));
      CHECK(rows[t][4].empty());
    }
    CHECK(log.str().find("trace:") != std::string::npos);
  }

  SUBCASE("full selection matches the baseline row for row") {
    const fs::path out = scratch("train_compare");
    Config cfg = small_train();
    cfg.set("alpha_sel", "1");
    cfg.set("compare", "true");
    std::ostringstream log;
    REQUIRE(cmd_adass_train(cfg, out, log) == kExitOk);
    CHECK(without(read_csv(out / "trace.csv"), "wall_ms") == without(read_csv(out / "baseline.csv"), "wall_ms"));
  }

  SUBCASE("a period sweep writes one trace per period") {
    const fs::path out = scratch("train_sweep");
    Config cfg = small_train();
    cfg.set("period", "1,3,5");
    std::ostringstream log;
    REQUIRE(cmd_adass_train(cfg, out, log) == kExitOk);
    for (const char* p : {"trace_p1.csv", "trace_p3.csv", "trace_p5.csv"}) CHECK(fs::exists(out / p));
    CHECK(read_csv(out / "summary.csv").size() == 4);
  }

  SUBCASE("divergence exits with 3 and names the epoch") {
    const fs::path out = scratch("train_diverge");
    fs::create_directories(out);
    write_csv_dataset(out / "ls.csv", generate_synthetic(FeatureDist::Gaussian, 100, 4, 0.1, 1).data);
    Config cfg = Config::parse("model=least-squares\neta=10\ndecay=1\nepochs=50\n");
    cfg.set("dataset", (out / "ls.csv").string());
    std::ostringstream log;
    CHECK(cmd_adass_train(cfg, out, log) == kExitDiverged);
    CHECK(log.str().find("epoch") != std::string::npos);
  }
}

TEST_CASE("probe command") {
  const fs::path out = scratch("probe_neg");
  std::ostringstream log;
  CHECK(cmd_probe("negative-example", Config{}, out, log) == kExitOk);
  CHECK(log.str().find("1,0,1,0") != std::string::npos);
  CHECK(log.str().find("divergent (period-2)") != std::string::npos);
  CHECK(log.str().find("converged (fixed point)") != std::string::npos);
  const auto rows = read_csv(out / "negative_example.csv");
  CHECK(rows.size() == 101);
}

TEST_CASE("command-line binary") {
  const fs::path dir = scratch("binary");
  fs::create_directories(dir);
  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << small_train().to_string();

  CHECK(run_cli("adass-train --config " + cfg.string() + " --out " + (dir / "a").string(), dir / "a.log") == 0);
  CHECK(run_cli("adass-train --config " + cfg.string() + " --out " + (dir / "b").string(), dir / "b.log") == 0);
  CHECK(without(read_csv(dir / "a" / "trace.csv"), "wall_ms") == without(read_csv(dir / "b" / "trace.csv"), "wall_ms"));

  CHECK(run_cli("adass-train --config " + cfg.string() + " --seed 9 --out " + (dir / "c").string(), dir / "c.log") == 0);
  CHECK(Config::load(dir / "c" / "resolved.cfg").get_u64("seed", 0) == 9);
  CHECK(without(read_csv(dir / "a" / "trace.csv"), "wall_ms") != without(read_csv(dir / "c" / "trace.csv"), "wall_ms"));

  CHECK(run_cli("probe nonsense --out " + (dir / "d").string(), dir / "d.log") == 2);
  CHECK(run_cli("frobnicate", dir / "e.log") == 2);
  CHECK(run_cli("adass-train --config /does/not/exist", dir / "f.log") == 2);
  CHECK(run_cli("probe negative-example --out " + (dir / "g").string(), dir / "g.log") == 0);
  CHECK(slurp(dir / "g.log").find("divergent (period-2)") != std::string::npos);
}
