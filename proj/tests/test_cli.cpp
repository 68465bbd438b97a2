#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kBin = ZENO_LAB_BIN;
const fs::path kScratch = ZENO_LAB_SCRATCH;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args, const std::string& tag) {
  fs::create_directories(kScratch);
  const fs::path out_file = kScratch / (tag + ".stdout");
  const fs::path err_file = kScratch / (tag + ".stderr");
  const std::string cmd = "\"" + kBin + "\" " + args + " >\"" + out_file.string() + "\" 2>\"" +
                          err_file.string() + "\"";
  const int rc = std::system(cmd.c_str());
  CliResult res;
  if (WIFEXITED(rc)) res.code = WEXITSTATUS(rc);
  res.out = slurp(out_file);
  res.err = slurp(err_file);
  return res;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = kScratch / name;
  fs::remove_all(dir);
  return dir;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::vector<std::string> csv_rows(const std::string& csv) {
  std::vector<std::string> rows;
  for (const std::string& line : split(csv, '\n'))
    if (!line.empty()) rows.push_back(line);
  return rows;
}

}  // namespace

TEST_CASE("list-presets names every experiment") {
  const CliResult res = run_cli("list-presets", "list");
  REQUIRE(res.code == 0);
  for (const char* name : {"free-decay", "zeno", "direct", "indirect", "nogo-check",
                           "semidirect-check", "wavezone-check", "intertwine-check", "sweep"})
    REQUIRE(res.out.find(name) != std::string::npos);

  const CliResult js = run_cli("list-presets --json", "list_json");
  REQUIRE(js.code == 0);
  const auto parsed = nlohmann::json::parse(js.out);
  REQUIRE(parsed.is_array());
  REQUIRE(parsed.size() == 9);
  REQUIRE(parsed[0].contains("config"));
}

TEST_CASE("preset zeno runs, passes and writes the expected artifacts") {
  const fs::path dir = fresh_dir("zeno_out");
  const CliResult res = run_cli("preset zeno --out \"" + dir.string() + "\"", "zeno");
  REQUIRE(res.code == 0);
  REQUIRE(res.out.find("result: PASS") != std::string::npos);

  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  REQUIRE(summary.at("pass").get<bool>());
  REQUIRE(summary.at("experiment").get<std::string>() == "zeno");

  const std::vector<std::string> rows = csv_rows(slurp(dir / "survival.csv"));
  REQUIRE(rows.size() == 12);  // header + t=0 + 10 measurements
  const std::vector<std::string> last = split(rows.back(), ',');
  REQUIRE(last.size() == 3);
  REQUIRE(std::stod(last[0]) == Catch::Approx(1.0));
  REQUIRE(std::stod(last[1]) == Catch::Approx(std::pow(std::cos(0.1), 20)).margin(1e-9));

  REQUIRE(slurp(dir / "plot.svg").rfind("<svg", 0) == 0);
}

TEST_CASE("run executes a config file") {
  const fs::path dir = fresh_dir("run_out");
  const fs::path cfg_path = kScratch / "small_zeno.json";
  fs::create_directories(kScratch);
  {
    std::ofstream cfg(cfg_path);
    cfg << R"({"experiment":"zeno","model":{"type":"two_level","omega":1.0},)"
        << R"("run":{"total_time":1.0,"n_measurements":5}})";
  }
  const CliResult res =
      run_cli("run \"" + cfg_path.string() + "\" --out \"" + dir.string() + "\"", "run");
  REQUIRE(res.code == 0);
  REQUIRE(fs::exists(dir / "summary.json"));
}

TEST_CASE("config errors exit 2 and write nothing") {
  const fs::path dir = fresh_dir("bad_out");
  const fs::path bad_path = kScratch / "missing_experiment.json";
  fs::create_directories(kScratch);
  {
    std::ofstream cfg(bad_path);
    cfg << R"({"model":{"type":"two_level","omega":1.0}})";
  }
  const CliResult res =
      run_cli("run \"" + bad_path.string() + "\" --out \"" + dir.string() + "\"", "bad");
  REQUIRE(res.code == 2);
  REQUIRE(res.err.find("/experiment") != std::string::npos);
  REQUIRE_FALSE(fs::exists(dir));

  const fs::path junk_path = kScratch / "junk.json";
  {
    std::ofstream cfg(junk_path);
    cfg << "{not json";
  }
  const CliResult junk =
      run_cli("run \"" + junk_path.string() + "\" --out \"" + dir.string() + "\"", "junk");
  REQUIRE(junk.code == 2);
  REQUIRE(junk.err.find("parse error") != std::string::npos);
  REQUIRE_FALSE(fs::exists(dir));

  REQUIRE(run_cli("befuddle", "unknown_cmd").code == 2);
  REQUIRE(run_cli("preset zeno --frobnicate", "unknown_opt").code == 2);
  REQUIRE(run_cli("preset nope --out \"" + dir.string() + "\"", "unknown_preset").code == 2);
  REQUIRE(run_cli("run", "run_noarg").code == 2);
}

TEST_CASE("overrides reshape the preset config") {
  const fs::path dir = fresh_dir("override_out");
  const CliResult res = run_cli(
      "preset zeno run.n_measurements=20 --out \"" + dir.string() + "\"", "override");
  REQUIRE(res.code == 0);
  REQUIRE(csv_rows(slurp(dir / "survival.csv")).size() == 22);

  const CliResult printed =
      run_cli("preset zeno run.n_measurements=40 model.omega=2.5 --print-config", "print_cfg");
  REQUIRE(printed.code == 0);
  const auto cfg = nlohmann::json::parse(printed.out);
  REQUIRE(cfg.at("run").at("n_measurements").get<int>() == 40);
  REQUIRE(cfg.at("model").at("omega").get<double>() == 2.5);

  REQUIRE(run_cli("preset zeno n_measurements", "bad_override").code == 2);
}

TEST_CASE("reruns are byte-identical") {
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  REQUIRE(run_cli("preset zeno --out \"" + a.string() + "\"", "det1").code == 0);
  REQUIRE(run_cli("preset zeno --out \"" + b.string() + "\"", "det2").code == 0);
  for (const char* name : {"summary.json", "survival.csv", "plot.svg"}) {
    const std::string fa = slurp(a / name);
    REQUIRE_FALSE(fa.empty());
    REQUIRE(fa == slurp(b / name));
  }
}

TEST_CASE("failed checks exit 1 but still write the summary") {
  const fs::path dir = fresh_dir("fail_out");
  const CliResult res = run_cli(
      "preset free-decay run.gamma_tol=1e-9 --out \"" + dir.string() + "\"", "fail");
  REQUIRE(res.code == 1);
  REQUIRE(res.out.find("result: FAIL") != std::string::npos);
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  REQUIRE(summary.at("pass").get<bool>() == false);
}

TEST_CASE("the ZENO_LAB_OUT environment variable supplies the output directory") {
  const fs::path dir = fresh_dir("env_out");
  setenv("ZENO_LAB_OUT", dir.string().c_str(), 1);
  const CliResult res = run_cli("preset zeno", "env");
  unsetenv("ZENO_LAB_OUT");
  REQUIRE(res.code == 0);
  REQUIRE(fs::exists(dir / "summary.json"));
}

TEST_CASE("jobs flag is accepted") {
  const fs::path dir = fresh_dir("jobs_out");
  REQUIRE(run_cli("preset zeno --jobs 2 --out \"" + dir.string() + "\"", "jobs").code == 0);
  REQUIRE(run_cli("preset zeno --jobs=0", "jobs0").code == 2);
}
