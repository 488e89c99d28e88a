// ergcount: build and verify the constructions from the command line.
//
//   ergcount base --seed 7 --out base.json
//   ergcount levelk --config level2.json
//   ergcount render --config base.json --out layout.svg
//
// Exit status: 0 when every claim passes, 1 when some claim fails, 2 for bad
// input (config, schema), 3 when a budget is exceeded.

#include "ergcount/harness.hpp"

#include "CLI11.hpp"

#include <iostream>

using namespace ergcount;

namespace {

struct Options {
  std::string config, out, save, load, negative;
  std::optional<uint64_t> seed;
  bool estimate_only = false;
  bool quiet = false;
};

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_atomic(o.out, text);
  }
}

RunConfig load_config(const std::string& command, const Options& o) {
  json j = json::object();
  if (!o.config.empty()) {
    try {
      j = json::parse(read_file(o.config));
    } catch (const json::parse_error& e) {
      throw ConfigError(o.config + ": " + e.what());
    }
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (j.contains("command") && j["command"] != command) {
    throw ConfigError("config is for '" + j["command"].get<std::string>() + "', not '" + command + "'");
  }
  j["command"] = command;
  if (o.seed) j["seed"] = *o.seed;
  if (o.estimate_only) j["estimate_only"] = true;
  if (!o.negative.empty()) j["negative_control"] = o.negative;
  return RunConfig::from_json(j);
}

// verify a stored system instead of building one
VerificationReport verify_loaded(const RunConfig& cfg, const std::string& path) {
  json doc = json::parse(read_file(path));
  if (cfg.command == "base") return verify_base(load_base(doc), cfg.sampling);
  if (cfg.command == "levelk") return verify_level_k(load_level(doc), cfg.sampling);
  throw ConfigError("--load works with base and levelk");
}

void save_system(const RunConfig& cfg, const std::string& path) {
  json doc;
  if (cfg.command == "base" || cfg.command == "render") {
    doc = save_base(build_base(BaseParams::from_json(cfg.params)));
  } else if (cfg.command == "levelk") {
    LevelParams p = LevelParams::from_json(cfg.params);
    p.max_shapes = std::min(p.max_shapes, cfg.budgets.max_shapes);
    doc = save_level(build_level_k(p));
  } else {
    throw ConfigError("--save works with base, levelk and render");
  }
  write_atomic(path, doc.dump() + "\n");
}

int execute(const std::string& command, const Options& o) {
  RunConfig cfg = load_config(command, o);
  if (cfg.estimate_only) {
    RunResult r = run(cfg);
    emit(o, wrap_document("estimate", {{"config", cfg.to_json()}, {"estimate", r.estimate}}).dump(2) + "\n");
    return 0;
  }
  if (!o.save.empty()) save_system(cfg, o.save);
  VerificationReport rep;
  if (!o.load.empty()) {
    rep = verify_loaded(cfg, o.load);
  } else {
    RunResult r = run(cfg);
    if (r.artifact) {
      emit(o, *r.artifact);
      return 0;
    }
    rep = std::move(r.report);
  }
  emit(o, report_document(cfg, rep).dump(2) + "\n");
  if (!o.quiet) {
    std::cerr << command << ": " << rep.claims().size() << " claims (" << rep.count(ClaimKind::Exact) << " exact, "
              << rep.count(ClaimKind::Sampled) << " sampled), " << rep.failures() << " failed\n";
    size_t shown = 0;
    for (const Claim& c : rep.claims()) {
      if (!c.pass && shown++ < 10) std::cerr << "  FAIL " << c.id << " [" << c.anchor << "]\n";
    }
  }
  return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact constructions for the counting-function counterexample"};
  app.require_subcommand(1);
  Options o;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"base", "build and verify a base system"},
      {"levelk", "build and verify a level-k system"},
      {"pblock", "build a p-block and check its statistics"},
      {"blowup", "p-block plus the blow-up certificate"},
      {"analog", "continuous and sequence analogs"},
      {"oracle-suite", "closed-form counting against brute force"},
      {"render", "draw the layout of a base system (text or svg)"},
  };
  for (auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "sampling seed (overrides the config)");
    sub->add_option("--out", o.out, "write the report here instead of stdout");
    sub->add_flag("--estimate-only", o.estimate_only, "print the size estimate and stop");
    sub->add_flag("-q,--quiet", o.quiet, "no summary on stderr");
    if (name == "base" || name == "levelk" || name == "render") {
      sub->add_option("--save", o.save, "also write the built system here");
    }
    if (name == "base" || name == "levelk") sub->add_option("--load", o.load, "verify a saved system");
    if (name == "base") {
      sub->add_option("--negative-control", o.negative, "corrupt the system first")
          ->check(CLI::IsMember({"shift_support", "halve_f"}));
    }
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return execute(command, o);
  } catch (const BudgetError& e) {
    std::cerr << "budget exceeded: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "bad JSON: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
