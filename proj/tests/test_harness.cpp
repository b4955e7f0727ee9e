#include <doctest.h>

#include <stdexcept>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "lrgame/errors.hpp"
#include "lrgame/harness.hpp"

using namespace lrgame;
namespace fs = std::filesystem;

namespace {

std::string config_error(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lrgame_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(LRGAME_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("minimal config gets defaults") {
    const ExperimentConfig c = parse_config("kind = simulate\nL = 16\nhorizon = 10\nseed = 3\n");
    CHECK(c.kind == ExperimentKind::simulate);
    CHECK(c.L == 16);
    CHECK(c.horizon == 10.0);
    CHECK(c.seed == 3u);
    CHECK(c.boundary == Boundary::torus);
    CHECK(c.C == 1.0);
    CHECK(c.gamma == 9.0);
    CHECK_FALSE(c.symmetric);
    CHECK_FALSE(c.coin_on_miss);
    CHECK(c.replicas == 1);
    CHECK(c.thresholds == std::vector<double>{10.0, 20.0, 50.0});
    CHECK(c.ladder == std::vector<int>{8, 16, 32});
  }
  SUBCASE("comments, spacing and lists") {
    const ExperimentConfig c = parse_config(
        "# fixation run\n  kind=fixation  \nL = 8 # side\nhorizon = 2.5\nseed = 1\nthresholds = 5, 7.5\n"
        "symmetric = true\nboundary = pinned\n");
    CHECK(c.thresholds == std::vector<double>{5.0, 7.5});
    CHECK(c.symmetric);
    CHECK(c.boundary == Boundary::pinned);
  }
  SUBCASE("gamma below 3 is rejected") {
    const std::string msg = config_error("kind = simulate\nL = 4\nhorizon = 1\nseed = 1\ngamma = 2\n");
    CHECK(msg.find("gamma") != std::string::npos);
    CHECK(msg.find("line 5") != std::string::npos);
  }
  SUBCASE("duplicate keys name the key") {
    const std::string msg = config_error("kind = simulate\nL = 4\nL = 5\nhorizon = 1\nseed = 1\n");
    CHECK(msg.find("duplicate key 'L'") != std::string::npos);
    CHECK(msg.find("line 3") != std::string::npos);
  }
  SUBCASE("other errors") {
    CHECK(config_error("kind = simulate\nL = 4\nhorizon = 1\n").find("missing required key 'seed'") != std::string::npos);
    CHECK(config_error("kind = simulate\nL = 4\nhorizon = 1\nseed = 1\nfoo = 2\n").find("unknown key 'foo'") !=
          std::string::npos);
    CHECK_FALSE(config_error("kind = dance\nL = 4\nhorizon = 1\nseed = 1\n").empty());
    CHECK_FALSE(config_error("kind = simulate\nL = four\nhorizon = 1\nseed = 1\n").empty());
    CHECK_FALSE(config_error("kind = simulate\nL = 4\nhorizon = -1\nseed = 1\n").empty());
    CHECK_FALSE(config_error("kind = simulate\nL = 4\nhorizon = 1\nseed = 1\nC = -1\n").empty());
    CHECK_FALSE(config_error("kind = simulate\nL = 4 horizon = 1\n").empty());
    CHECK_FALSE(config_error("kind = simulate\nL = 4\nhorizon = 1\nseed = 1\nsymmetric = maybe\n").empty());
  }
  SUBCASE("kind names round-trip") {
    for (auto k : {ExperimentKind::graph_stats, ExperimentKind::simulate, ExperimentKind::fixation,
                   ExperimentKind::mixing, ExperimentKind::nash_check, ExperimentKind::oracle_check}) {
      CHECK(parse_kind(to_string(k)) == k);
    }
  }
}

TEST_CASE("graph-stats writes the manifest and one CSV") {
  const fs::path out = scratch("graph_stats");
  ExperimentConfig c = parse_config("kind = graph-stats\nL = 8\nhorizon = 1\nseed = 4\nreplicas = 3\n");
  REQUIRE(run_experiment(c, {out, true}) == kExitOk);
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(out)) files.push_back(e.path().filename().string());
  std::sort(files.begin(), files.end());
  CHECK(files == std::vector<std::string>{"graph_stats.csv", "manifest.json"});
  const auto m = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(m["status"] == "ok");
  CHECK(m["config"]["L"] == 8);
  CHECK(m["replica_seeds"].size() == 3u);
  fs::remove_all(out);
}

TEST_CASE("oracle-check passes on 3x3 and 4x4 windows") {
  const fs::path out = scratch("oracle");
  ExperimentConfig c = parse_config("kind = oracle-check\nL = 3\nhorizon = 1\nseed = 9\n");
  CHECK(run_experiment(c, {out, true}) == kExitOk);
  const std::string csv = slurp(out / "oracle.csv");
  CHECK(csv.find("fail") == std::string::npos);
  CHECK(csv.find("reward-energy,3x3,1000,0,pass") != std::string::npos);
  fs::remove_all(out);
}

TEST_CASE("same config twice gives byte-identical CSVs") {
  const char* text = "kind = fixation\nL = 8\nhorizon = 20\nseed = 5\nreplicas = 2\nsymmetric = true\nthreads = 2\n";
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  REQUIRE(run_experiment(parse_config(text), {a, true}) == kExitOk);
  REQUIRE(run_experiment(parse_config(text), {b, true}) == kExitOk);
  int compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.path().extension() != ".csv") continue;
    const fs::path other = b / fs::relative(e.path(), a);
    CHECK(slurp(e.path()) == slurp(other));
    ++compared;
  }
  CHECK(compared == 5);  // bounds.csv + 2 x (energy.csv, sites.csv)
  auto ma = nlohmann::json::parse(slurp(a / "manifest.json"));
  auto mb = nlohmann::json::parse(slurp(b / "manifest.json"));
  ma.erase("timestamp");
  mb.erase("timestamp");
  CHECK(ma == mb);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("simulate and mixing outputs") {
  const fs::path sim = scratch("simulate");
  REQUIRE(run_experiment(parse_config("kind = simulate\nL = 6\nhorizon = 5\nseed = 2\n"), {sim, true}) == kExitOk);
  CHECK(fs::exists(sim / "trajectory.csv"));
  CHECK(fs::exists(sim / "final_state.txt"));
  CHECK(fs::exists(sim / "memory.txt"));
  fs::remove_all(sim);

  const fs::path mix = scratch("mixing");
  REQUIRE(run_experiment(parse_config("kind = mixing\nL = 8\nhorizon = 5\nseed = 2\nreplicas = 20\nladder = 8, 12\n"
                                      "tv_time = 1\n"),
                         {mix, true}) == kExitOk);
  const std::string tv = slurp(mix / "tv.csv");
  CHECK(tv.rfind("L,t,pair_id,estimate,half_width,replicas\n", 0) == 0);
  CHECK(tv.find("8,1,identical,0,0,20") != std::string::npos);
  CHECK(slurp(mix / "front.csv").rfind("L,replica,front_time_or_NA\n", 0) == 0);
  CHECK(slurp(mix / "violations.csv").rfind("L,seed,subbox_a,subbox_b,x1,x2,y1,y2\n", 0) == 0);
  fs::remove_all(mix);
}

TEST_CASE("nash-check output") {
  const fs::path out = scratch("nash");
  REQUIRE(run_experiment(parse_config("kind = nash-check\nL = 8\nhorizon = 30\nseed = 2\nreplicas = 2\nagents = 3\n"),
                         {out, true}) == kExitOk);
  const std::string csv = slurp(out / "nash.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  fs::remove_all(out);
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };
  const std::string good = write("good.cfg", "kind = graph-stats\nL = 4\nhorizon = 1\nseed = 1\n");
  const std::string bad = write("bad.cfg", "kind = graph-stats\nL = 4\nhorizon = 1\nseed = 1\ngamma = 2\n");
  CHECK(run_cli("graph-stats --config " + good + " --out " + (dir / "o1").string() + " --quiet") == 0);
  CHECK(run_cli("graph-stats --config " + bad + " --out " + (dir / "o2").string()) == 2);
  CHECK(run_cli("simulate --config " + good + " --out " + (dir / "o3").string()) == 2);  // kind mismatch
  CHECK(run_cli("graph-stats --config " + (dir / "missing.cfg").string()) == 4);
  CHECK(run_cli("graph-stats") == 2);
  CHECK(run_cli("graph-stats --config " + good + " --out /proc/lrgame_cannot_write") == 4);
  CHECK(run_cli("graph-stats --config " + good + " --seed 7 --replicas 2 --out " + (dir / "o4").string()) == 0);
  const auto m = nlohmann::json::parse(slurp(dir / "o4" / "manifest.json"));
  CHECK(m["config"]["seed"] == 7);
  CHECK(m["config"]["replicas"] == 2);
  fs::remove_all(dir);
}
