// zeno-lab: run survival-probability experiments from JSON configs.
//
//   zeno-lab run <config.json> [--out DIR] [--jobs N]
//   zeno-lab preset <name> [key.path=value ...] [--out DIR] [--jobs N] [--print-config]
//   zeno-lab list-presets [--json]
//
// Exit codes: 0 all checks pass, 1 a check failed (summary.json still
// written), 2 config/usage error (nothing written), 3 numeric failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "zenolab/experiments.hpp"
#include "zenolab/io.hpp"

namespace {

constexpr const char* kUsage =
    "usage:\n"
    "  zeno-lab run <config.json> [--out DIR] [--jobs N]\n"
    "  zeno-lab preset <name> [key.path=value ...] [--out DIR] [--jobs N] [--print-config]\n"
    "  zeno-lab list-presets [--json]\n"
    "\n"
    "Output directory: --out, else config /output/directory, else $ZENO_LAB_OUT, else ./out\n";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string out_dir;
  int jobs = 1;
  bool print_config = false;
  bool json = false;
  std::vector<std::string> positional;
};

Options parse_options(int argc, char** argv, int first) {
  Options opt;
  for (int i = first; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--out") {
      if (++i >= argc) throw UsageError("--out needs a directory argument");
      opt.out_dir = argv[i];
    } else if (arg.rfind("--out=", 0) == 0) {
      opt.out_dir = arg.substr(6);
    } else if (arg == "--jobs") {
      if (++i >= argc) throw UsageError("--jobs needs a count argument");
      opt.jobs = std::atoi(argv[i]);
    } else if (arg.rfind("--jobs=", 0) == 0) {
      opt.jobs = std::atoi(arg.c_str() + 7);
    } else if (arg == "--print-config") {
      opt.print_config = true;
    } else if (arg == "--json") {
      opt.json = true;
    } else if (arg == "--help" || arg == "-h") {
      std::cout << kUsage;
      std::exit(0);
    } else if (!arg.empty() && arg[0] == '-') {
      throw UsageError("unknown option: " + arg);
    } else {
      opt.positional.push_back(arg);
    }
  }
  if (opt.jobs < 1) throw UsageError("--jobs must be >= 1");
  return opt;
}

// key.path=value with the value parsed as JSON when possible, else kept as a
// string: detector.scale=20, model.kernel.shape=gaussian, run.scales=[0,5]
void apply_override(zenolab::ordered_json& cfg, const std::string& spec) {
  const std::size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw UsageError("override must look like key.path=value (got '" + spec + "')");
  const std::string path = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);
  zenolab::ordered_json value;
  try {
    value = zenolab::ordered_json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  zenolab::ordered_json* node = &cfg;
  std::istringstream comps(path);
  std::string comp;
  std::vector<std::string> parts;
  while (std::getline(comps, comp, '.')) {
    if (comp.empty()) throw UsageError("override path has an empty component: '" + path + "'");
    parts.push_back(comp);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &((*node)[parts[i]]);
  (*node)[parts.back()] = value;
}

std::string resolve_out_dir(const Options& opt, const zenolab::ordered_json& cfg) {
  if (!opt.out_dir.empty()) return opt.out_dir;
  if (cfg.contains("output") && cfg.at("output").is_object() &&
      cfg.at("output").contains("directory") && cfg.at("output").at("directory").is_string())
    return cfg.at("output").at("directory").get<std::string>();
  if (const char* env = std::getenv("ZENO_LAB_OUT"); env && *env) return env;
  return "out";
}

int execute(const zenolab::ordered_json& cfg, const Options& opt) {
  const zenolab::ExperimentResult res = zenolab::run_experiment_config(cfg, opt.jobs);
  const std::string out_dir = resolve_out_dir(opt, cfg);
  std::vector<std::string> written;
  for (const auto& [name, content] : res.artifacts) {
    const std::string path = out_dir + "/" + name;
    zenolab::write_text_file(path, content);
    written.push_back(path);
  }
  std::cout << "experiment: " << res.summary.at("experiment").get<std::string>() << "\n";
  for (const auto& check : res.summary.at("checks")) {
    std::cout << "check " << check.at("name").get<std::string>() << ": "
              << (check.at("pass").get<bool>() ? "PASS" : "FAIL") << " (value "
              << check.at("value").dump() << " " << check.at("relation").get<std::string>() << " "
              << check.at("bound").dump() << ")\n";
  }
  std::cout << "artifacts:";
  for (const std::string& p : written) std::cout << " " << p;
  std::cout << "\nresult: " << (res.pass ? "PASS" : "FAIL") << "\n";
  return res.pass ? 0 : 1;
}

int run_command(const Options& opt) {
  if (opt.positional.size() != 1)
    throw UsageError("run expects exactly one config file argument");
  std::ifstream in(opt.positional[0]);
  if (!in) throw zenolab::config_error("cannot open config file: " + opt.positional[0]);
  zenolab::ordered_json cfg;
  try {
    cfg = zenolab::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw zenolab::config_error("config parse error in " + opt.positional[0] + ": " + e.what());
  }
  return execute(cfg, opt);
}

int preset_command(const Options& opt) {
  if (opt.positional.empty()) throw UsageError("preset expects a preset name");
  zenolab::ordered_json cfg = zenolab::preset_config(opt.positional[0]);
  for (std::size_t i = 1; i < opt.positional.size(); ++i) apply_override(cfg, opt.positional[i]);
  if (opt.print_config) {
    std::cout << cfg.dump(2) << "\n";
    return 0;
  }
  return execute(cfg, opt);
}

int list_presets_command(const Options& opt) {
  if (opt.json) {
    zenolab::ordered_json arr = zenolab::ordered_json::array();
    for (const zenolab::PresetInfo& p : zenolab::preset_infos())
      arr.push_back({{"name", p.name},
                     {"description", p.description},
                     {"config", zenolab::preset_config(p.name)}});
    std::cout << arr.dump(2) << "\n";
  } else {
    for (const zenolab::PresetInfo& p : zenolab::preset_infos())
      std::cout << p.name << " - " << p.description << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    if (argc < 2) {
      std::cerr << kUsage;
      return 2;
    }
    const std::string command = argv[1];
    const Options opt = parse_options(argc, argv, 2);
    if (command == "run") return run_command(opt);
    if (command == "preset") return preset_command(opt);
    if (command == "list-presets") return list_presets_command(opt);
    if (command == "--help" || command == "-h" || command == "help") {
      std::cout << kUsage;
      return 0;
    }
    throw UsageError("unknown command: " + command);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << kUsage;
    return 2;
  } catch (const zenolab::config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const zenolab::contract_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const zenolab::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
