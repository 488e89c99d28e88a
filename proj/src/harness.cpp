#include "ergcount/harness.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace ergcount {

// ---- persistence --------------------------------------------------------

json save_base(const BaseSystem& sys) { return wrap_document("base_system", base_to_json(sys)); }

namespace {

std::vector<IntervalSet> sets_from(const json& arr, const char* what) {
  if (!arr.is_array()) throw SchemaError(std::string(what) + " must be a list");
  std::vector<IntervalSet> out;
  for (const json& e : arr) out.emplace_back(edge_from_json(e));
  return out;
}

}  // namespace

BaseSystem load_base(const json& doc) {
  const json p = open_document(doc, "base_system");
  BaseParams params;
  std::vector<IntervalSet> B, G;
  StepFunction f;
  try {
    params = BaseParams::from_json(p.at("params"));
    params.validate();
    B = sets_from(p.at("B"), "B");
    G = sets_from(p.at("Gamma"), "Gamma");
    std::vector<Scaled> vals;
    for (const json& v : p.at("f").at("values")) vals.push_back(parse_scaled(v.get<std::string>()));
    f = StepFunction(edge_from_json(p.at("f").at("map")), vals);
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(std::string("malformed base system: ") + e.what());
  }
  if (B.size() != static_cast<size_t>(params.M) || G.size() != B.size()) throw SchemaError("expected M sets B_l and Gamma_l");
  for (size_t a = 0; a < B.size(); ++a) {
    for (size_t b = a + 1; b < B.size(); ++b) {
      if (!B[a].disjoint_from(B[b])) {
        throw SchemaError("B_" + std::to_string(a + 1) + " and B_" + std::to_string(b + 1) + " overlap");
      }
    }
    if (!G[a].subset_of(B[a])) throw SchemaError("Gamma_" + std::to_string(a + 1) + " is not inside B_" + std::to_string(a + 1));
  }
  // label 0 is the background
  for (size_t i = 1; i < f.values().size(); ++i) {
    if (f.values()[i].sign() <= 0) throw SchemaError("f takes a nonpositive value");
  }
  if (!f.support().subset_of(B[0])) throw SchemaError("f is not carried by B_1");

  BaseSystem sys = build_base(params);
  bool same = sys.J0 == p.value("J0", uint64_t(0)) && sys.J == p.value("J", uint64_t(0)) &&
              sys.h == parse_scaled(p.at("h").get<std::string>()) && same_labelling(sys.f.map(), f.map()) &&
              sys.f.values() == f.values();
  for (size_t l = 0; same && l < B.size(); ++l) same = sys.B[l].equals(B[l]) && sys.Gamma[l].equals(G[l]);
  if (!same) throw SchemaError("stored sets differ from what the stored parameters build");
  return sys;
}

json save_level(const LevelSystem& sys) { return wrap_document("level_system", level_to_json(sys)); }

LevelSystem load_level(const json& doc) {
  const json p = open_document(doc, "level_system");
  LevelParams params;
  try {
    params = LevelParams::from_json(p.at("params"));
    params.validate();
  } catch (const std::exception& e) {
    throw SchemaError(std::string("malformed level system: ") + e.what());
  }
  LevelSystem sys = build_level_k(params);
  if (level_to_json(sys) != p) throw SchemaError("stored level system differs from what its parameters build");
  return sys;
}

// ---- rendering ----------------------------------------------------------

namespace {

enum class Stroke { Dashed, Dotted, Solid, None };

Stroke stroke_for(int M, int l) {
  if (l == M) return Stroke::Dashed;
  if (l == M - 1) return Stroke::Dotted;
  if (l == 1) return Stroke::None;
  return Stroke::Solid;
}

char glyph(Stroke s) {
  switch (s) {
    case Stroke::Dashed: return '-';
    case Stroke::Dotted: return '.';
    case Stroke::Solid: return '=';
    case Stroke::None: return '_';
  }
  return ' ';
}

const char* dash(Stroke s) {
  switch (s) {
    case Stroke::Dashed: return " stroke-dasharray=\"8,4\"";
    case Stroke::Dotted: return " stroke-dasharray=\"2,3\"";
    default: return "";
  }
}

struct Row {
  int l;
  Scaled rel;    // measure relative to I
  long cols;     // floor(width * rel)
  Scaled cell;   // length of one component, relative to I
};

struct Block {
  long offset;  // position of the f cell inside the block, in columns
};

struct Layout {
  int M = 0;
  std::vector<Row> rows;  // B_M first
  Interval cell;          // the enlarged component I'
  Scaled h;
  Int blocks;             // h-blocks inside I'
  std::vector<Block> shown;
  long block_cols = 0;
};

Layout layout_of(const BaseSystem& sys, int width, int max_blocks) {
  Layout L;
  L.M = sys.params.M;
  for (int l = L.M; l >= 1; --l) {
    const IntervalSet& b = sys.B_rel.at(static_cast<size_t>(l - 1));
    Row r{l, b.measure(), 0, Scaled()};
    r.cols = (r.rel * Scaled(width)).floor().get_si();
    auto first = first_components(b.edge(), 1);
    if (!first.empty()) r.cell = first[0].b - first[0].a;
    L.rows.push_back(r);
  }
  auto c = first_components(sys.B_at(1).edge(), 1);
  if (c.empty()) return L;
  L.cell = c[0];
  L.h = sys.h;
  Scaled block = sys.h.times2exp(-static_cast<int64_t>(sys.J));
  L.blocks = ((L.cell.b - L.cell.a) / block).floor();
  long n = std::min<long>(max_blocks, L.blocks.get_si());
  L.block_cols = std::max(4L, width / std::max(1L, n));
  IntervalSet window = IntervalSet::of({{L.cell.a, L.cell.a + block * Scaled(n)}});
  auto hits = first_components((sys.f.support() & window).edge(), static_cast<size_t>(n));
  for (const Interval& iv : hits) {
    Scaled rel = (iv.a - L.cell.a) / block;
    Scaled inside = rel - Scaled(rel.floor());
    L.shown.push_back({(inside * Scaled(L.block_cols)).floor().get_si()});
  }
  return L;
}

std::string text_layout(const Layout& L, int width) {
  std::ostringstream out;
  out << "I rescaled to [0,1), M = " << L.M << "\n";
  for (const Row& r : L.rows) {
    std::string bar(static_cast<size_t>(r.cols), glyph(stroke_for(L.M, r.l)));
    bar.resize(static_cast<size_t>(width), ' ');
    out << "B_" << r.l << (r.l < 10 ? " " : "") << " |" << bar << "| " << scaled_str(r.rel);
    if (!r.cell.is_zero()) out << "  cells of " << scaled_brief(r.cell);
    out << "\n";
  }
  if (L.shown.empty()) return out.str();
  out << "\nI' = [" << scaled_brief(L.cell.a) << ", " << scaled_brief(L.cell.b) << "), h = " << scaled_brief(L.h) << ", "
      << L.blocks.get_str() << " blocks, first " << L.shown.size() << " shown\n";
  std::string line, mark;
  for (const Block& b : L.shown) {
    std::string seg(static_cast<size_t>(L.block_cols), '_');
    std::string m(static_cast<size_t>(L.block_cols), ' ');
    m[static_cast<size_t>(b.offset)] = '|';
    line += "+" + seg;
    mark += " " + m;
  }
  out << mark << "\n" << line << "+\n";
  out << "| marks the cell where f = h\n";
  return out.str();
}

std::string svg_layout(const Layout& L, int width) {
  const int px = 4 * width, row_h = 24, left = 60;
  const int panel_top = 20 + row_h * static_cast<int>(L.rows.size()) + 30;
  const int H = L.shown.empty() ? panel_top - 10 : panel_top + 70;
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << left + px + 120 << "\" height=\"" << H
      << "\" font-family=\"monospace\" font-size=\"12\">\n";
  int y = 20;
  for (const Row& r : L.rows) {
    Stroke s = stroke_for(L.M, r.l);
    out << "<text x=\"4\" y=\"" << y + 4 << "\">B_" << r.l << "</text>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + px << "\" y2=\"" << y
        << "\" stroke=\"#ccc\" stroke-width=\"1\"/>\n";
    if (r.cols > 0) {
      // B_1 is the unmarked remainder: a thin grey bar
      const char* colour = s == Stroke::None ? "#888" : "black";
      out << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + 4 * r.cols << "\" y2=\"" << y
          << "\" stroke=\"" << colour << "\" stroke-width=\"" << (s == Stroke::None ? 1 : 3) << "\"" << dash(s) << "/>\n";
    }
    out << "<text x=\"" << left + px + 8 << "\" y=\"" << y + 4 << "\">" << scaled_str(r.rel) << "</text>\n";
    y += row_h;
  }
  if (!L.shown.empty()) {
    int top = panel_top;
    out << "<text x=\"4\" y=\"" << top << "\">I' (first " << L.shown.size() << " of " << L.blocks.get_str()
        << " blocks)</text>\n";
    int x = left, bw = 4 * static_cast<int>(L.block_cols);
    for (const Block& b : L.shown) {
      out << "<rect x=\"" << x << "\" y=\"" << top + 20 << "\" width=\"" << bw
          << "\" height=\"20\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
      int fx = x + 4 * static_cast<int>(b.offset);
      out << "<line x1=\"" << fx << "\" y1=\"" << top + 14 << "\" x2=\"" << fx << "\" y2=\"" << top + 46
          << "\" stroke=\"black\" stroke-width=\"3\"/>\n";
      x += bw;
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace

std::string render_layout(const BaseSystem& sys, const RenderOptions& opt) {
  if (opt.width < 8) throw std::invalid_argument("render width must be at least 8");
  if (sys.B.empty() || sys.B_rel.empty()) {
    if (opt.format == RenderFormat::Svg) return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"0\" height=\"0\"></svg>\n";
    return "";
  }
  Layout L = layout_of(sys, opt.width, 8);
  return opt.format == RenderFormat::Svg ? svg_layout(L, opt.width) : text_layout(L, opt.width);
}

// ---- oracle -------------------------------------------------------------

namespace {

IntervalSet random_cells(std::mt19937_64& rng, int res, int pieces) {
  std::vector<std::pair<Scaled, Scaled>> ivs;
  for (int i = 0; i < pieces; ++i) {
    long a = static_cast<long>(rng() % (1u << res));
    long len = 1 + static_cast<long>(rng() % 8);
    ivs.emplace_back(Scaled(Rat(a), -res), Scaled(Rat(a + len), -res));
  }
  return IntervalSet::of(ivs);
}

StepFunction random_step(std::mt19937_64& rng, int res) {
  int levels = 1 + static_cast<int>(rng() % 3);
  std::vector<std::pair<Scaled, IntervalSet>> lv;
  IntervalSet used;
  for (int i = 0; i < levels; ++i) {
    IntervalSet s = random_cells(rng, res, 1 + static_cast<int>(rng() % 6)) - used;
    used = used | s;
    Rat q(static_cast<long>(1 + rng() % 30), 7);
    q.canonicalize();
    Scaled v = (rng() % 2) ? Scaled(static_cast<long>(1 + rng() % 16)) : Scaled(q);
    if (!s.is_empty()) lv.emplace_back(v, s);
  }
  return StepFunction::from_levels(lv);
}

}  // namespace

VerificationReport oracle_suite(const OraclePolicy& pol) {
  if (pol.instances < 0 || pol.max_J < 1 || pol.max_work < 1) throw std::invalid_argument("bad oracle policy");
  VerificationReport rep("oracle-suite");
  std::mt19937_64 rng(pol.seed);
  const int top_bits = std::max(1, static_cast<int>(std::log2(static_cast<double>(pol.max_work))));
  Int work_total = 0;
  for (int i = 0; i < pol.instances; ++i) {
    int res = 3 + static_cast<int>(rng() % 8);
    StepFunction f = random_step(rng, res);
    uint64_t J = 1 + rng() % static_cast<uint64_t>(pol.max_J);
    bool wrap = rng() % 4 != 0;
    Rat xq(static_cast<long>(rng() % 997), 997);
    xq.canonicalize();
    Scaled x(xq);
    Scaled vmax;
    for (const Scaled& v : f.values()) vmax = std::max(vmax, v);
    if (vmax.is_zero()) vmax = Scaled(1);
    // mostly small ranges, a few near the cap
    double u = std::uniform_real_distribution<double>(0, 1)(rng);
    int bits = static_cast<int>(top_bits * std::pow(u, 6));
    long work = std::min(pol.max_work, (1L << bits) + static_cast<long>(rng() % (1UL << bits)));
    Scaled n = Scaled(Int(work)) / vmax;
    if (rng() % 3) n = Scaled(std::max(Int(1), n.floor()));
    if (n * vmax > Scaled(pol.max_work)) n = Scaled(Int(pol.max_work)) / vmax;
    OrbitSpec orbit{J, wrap};
    Int fast = count_N(f, orbit, x, n);
    Int slow = brute_force_N(f, orbit, x, n, Int(pol.max_work) + 1);
    work_total += (n * vmax).ceil();
    rep.check("oracle." + std::to_string(i), "counting.oracle", ClaimKind::Exact, Scaled(fast), "==", Scaled(slow),
              {{"J", J}, {"wrap", wrap}, {"x", scaled_str(x)}, {"n", scaled_str(n)}, {"max_f", scaled_str(vmax)}});
  }
  rep.meta() = {{"seed", pol.seed}, {"instances", pol.instances}, {"max_J", pol.max_J}, {"max_work", pol.max_work},
                {"brute_force_steps", work_total.get_str()}};
  return rep;
}

// ---- runs ---------------------------------------------------------------

namespace {

const std::set<std::string> kCommands{"base", "levelk", "pblock", "blowup", "analog", "oracle-suite", "render"};

uint64_t u64_of(const json& j, const char* what) {
  if (j.is_number_unsigned()) return j.get<uint64_t>();
  if (j.is_number_integer() && j.get<long>() >= 0) return static_cast<uint64_t>(j.get<long>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    size_t used = 0;
    uint64_t v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == s.size() && !s.empty() && s[0] != '-') return v;
  }
  throw ConfigError(std::string(what) + " must be an unsigned 64-bit integer");
}

void only_keys(const json& j, const std::set<std::string>& keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto& [k, v] : j.items()) {
    if (!keys.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  only_keys(j, {"command", "seed", "estimate_only", "negative_control", "budgets", "sampling", "params"}, "config");
  RunConfig c;
  if (!j.contains("command") || !j["command"].is_string()) throw ConfigError("config needs a command");
  c.command = j["command"].get<std::string>();
  if (!kCommands.count(c.command)) throw ConfigError("unknown command '" + c.command + "'");
  if (j.contains("seed")) c.seed = u64_of(j["seed"], "seed");
  try {
    c.estimate_only = j.value("estimate_only", false);
    c.negative_control = j.value("negative_control", std::string());
    if (j.contains("budgets")) {
      const json& b = j["budgets"];
      only_keys(b, {"max_shapes", "max_J_bits", "oracle_cap"}, "budgets");
      c.budgets.max_shapes = b.value("max_shapes", c.budgets.max_shapes);
      c.budgets.max_J_bits = b.value("max_J_bits", c.budgets.max_J_bits);
      c.budgets.oracle_cap = b.value("oracle_cap", c.budgets.oracle_cap);
    }
    if (j.contains("sampling")) {
      const json& s = j["sampling"];
      only_keys(s, {"endpoint_cap", "random_points", "window_samples"}, "sampling");
      c.sampling.endpoint_cap = s.value("endpoint_cap", c.sampling.endpoint_cap);
      c.sampling.random_points = s.value("random_points", c.sampling.random_points);
      c.sampling.window_samples = s.value("window_samples", c.sampling.window_samples);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  if (!c.negative_control.empty() && c.negative_control != "shift_support" && c.negative_control != "halve_f") {
    throw ConfigError("unknown negative control '" + c.negative_control + "'");
  }
  if (!c.negative_control.empty() && c.command != "base") throw ConfigError("negative controls apply to base runs");
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw ConfigError("params must be an object");
    c.params = j["params"];
  }
  c.sampling.seed = c.seed;
  return c;
}

json RunConfig::to_json() const {
  json j = {{"command", command},
            {"seed", seed},
            {"estimate_only", estimate_only},
            {"budgets",
             {{"max_shapes", budgets.max_shapes}, {"max_J_bits", budgets.max_J_bits}, {"oracle_cap", budgets.oracle_cap}}},
            {"sampling",
             {{"endpoint_cap", sampling.endpoint_cap},
              {"random_points", sampling.random_points},
              {"window_samples", sampling.window_samples}}},
            {"params", params}};
  if (!negative_control.empty()) j["negative_control"] = negative_control;
  return j;
}

json report_document(const RunConfig& cfg, const VerificationReport& rep) {
  return wrap_document("report", {{"config", cfg.to_json()}, {"report", rep.to_json()}});
}

namespace {

template <class F>
auto parse_params(F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad params: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("bad params: ") + e.what());
  }
}

BaseParams base_params(const RunConfig& cfg) {
  return parse_params([&] {
    only_keys(cfg.params, {"M", "nu", "N1", "S", "I", "J", "ratio_constant", "format", "width"}, "params");
    BaseParams p = BaseParams::from_json(cfg.params);
    p.validate();
    return p;
  });
}

json base_estimate(const BaseParams& p) {
  std::vector<Int> N = schedule(p.nu, p.N1, p.M);
  uint64_t J0 = min_J0(p.I.R, p.M, p.nu, N.back());
  json sched = json::array();
  for (auto& v : N) sched.push_back(v.get_str());
  return {{"schedule", sched}, {"J0", J0}, {"J", p.J ? *p.J : J0}};
}

BaseSystem checked_base(const RunConfig& cfg, const BaseParams& p) {
  json est = base_estimate(p);
  uint64_t J = est["J"].get<uint64_t>();
  if (J > cfg.budgets.max_J_bits) {
    throw BudgetError("base system needs J = " + std::to_string(J) + " bits, budget is " +
                      std::to_string(cfg.budgets.max_J_bits) + "; estimate " + est.dump());
  }
  return build_base(p);
}

LevelParams level_params(const RunConfig& cfg) {
  return parse_params([&] {
    only_keys(cfg.params, {"M", "k", "Ks", "I0", "J", "flatten_shapes", "max_shapes"}, "params");
    LevelParams p = LevelParams::from_json(cfg.params);
    p.max_shapes = std::min(p.max_shapes, cfg.budgets.max_shapes);
    p.validate();
    return p;
  });
}

json level_estimate(const LevelParams& p) {
  SizeEstimate e = estimate_level(p);
  return {{"shapes", e.shapes.get_str()}, {"J_bits", e.J_bits.get_str()}, {"K_e", e.K_e.get_str()}};
}

PBlockParams pblock_params(const RunConfig& cfg) {
  return parse_params([&] {
    only_keys(cfg.params, {"p", "relaxed", "witnesses", "max_shapes", "stats_max_k"}, "params");
    PBlockParams p = PBlockParams::from_json(cfg.params);
    p.seed = cfg.seed;
    p.max_shapes = std::min(p.max_shapes, cfg.budgets.max_shapes);
    p.resolve();
    return p;
  });
}

json pblock_estimate(const PBlockParams& p) {
  json e = {{"honest", honest_estimate(p.p)}};
  if (p.relaxed) {
    LevelParams lp;
    lp.M = p.M;
    lp.k = p.k;
    lp.Ks = p.Ks;
    e["relaxed"] = level_estimate(lp);
    e["relaxed"]["params"] = p.to_json();
  }
  return e;
}

}  // namespace

RunResult run(const RunConfig& cfg) {
  RunResult out;
  const std::string& cmd = cfg.command;
  if (cmd == "base" || cmd == "render") {
    BaseParams p = base_params(cfg);
    if (cfg.estimate_only) {
      out.estimate = base_estimate(p);
      return out;
    }
    BaseSystem sys = checked_base(cfg, p);
    if (cmd == "render") {
      RenderOptions ro;
      std::string fmt = cfg.params.value("format", std::string("text"));
      if (fmt != "text" && fmt != "svg") throw ConfigError("render format must be text or svg");
      ro.format = fmt == "svg" ? RenderFormat::Svg : RenderFormat::Text;
      ro.width = cfg.params.value("width", 64);
      out.artifact = render_layout(sys, ro);
      out.report = VerificationReport("render");
      out.report.meta() = {{"params", p.to_json()}, {"format", fmt}, {"bytes", out.artifact->size()}};
      return out;
    }
    if (cfg.negative_control == "shift_support") {
      BaseParams q = p;
      q.S = (p.S + 1) % (Int(1) << p.M);
      sys.f = build_base(q).f;
    } else if (cfg.negative_control == "halve_f") {
      sys.f = sys.f.scaled(Scaled(Rat(1, 2)));
    }
    out.report = verify_base(sys, cfg.sampling);
    if (!cfg.negative_control.empty()) out.report.meta()["negative_control"] = cfg.negative_control;
    return out;
  }
  if (cmd == "levelk") {
    LevelParams p = level_params(cfg);
    if (cfg.estimate_only) {
      out.estimate = level_estimate(p);
      return out;
    }
    out.report = verify_level_k(build_level_k(p), cfg.sampling);
    return out;
  }
  if (cmd == "pblock" || cmd == "blowup") {
    PBlockParams p = pblock_params(cfg);
    if (cfg.estimate_only) {
      out.estimate = pblock_estimate(p);
      return out;
    }
    PBlock b = build_pblock(p);
    out.report = verify_pblock(b);
    if (cmd == "pblock") {
      unsigned max_k = cfg.params.value("stats_max_k", 16u);
      out.report.merge(statistics_suite({p.p}, max_k), "stats.");
    } else {
      blowup_certificate(b, out.report);
    }
    return out;
  }
  if (cmd == "analog") {
    AnalogPolicy a = parse_params([&] {
      only_keys(cfg.params, {"sets", "points", "sequences", "grid_bits", "weak_sets"}, "params");
      AnalogPolicy a;
      a.seed = cfg.seed;
      a.sets = cfg.params.value("sets", a.sets);
      a.points = cfg.params.value("points", a.points);
      a.sequences = cfg.params.value("sequences", a.sequences);
      a.grid_bits = cfg.params.value("grid_bits", a.grid_bits);
      a.weak_sets = cfg.params.value("weak_sets", a.weak_sets);
      return a;
    });
    if (cfg.estimate_only) {
      out.estimate = {{"indicator_pairs", a.sets * a.points}, {"sequences", a.sequences}, {"grid_points", 1L << a.grid_bits}};
      return out;
    }
    out.report = analog_suite(a);
    return out;
  }
  // oracle-suite
  OraclePolicy o = parse_params([&] {
    only_keys(cfg.params, {"instances", "max_J", "max_work"}, "params");
    OraclePolicy o;
    o.seed = cfg.seed;
    o.instances = cfg.params.value("instances", o.instances);
    o.max_J = cfg.params.value("max_J", o.max_J);
    o.max_work = std::min(cfg.params.value("max_work", o.max_work), cfg.budgets.oracle_cap);
    return o;
  });
  if (cfg.estimate_only) {
    out.estimate = {{"instances", o.instances}, {"max_work", o.max_work}};
    return out;
  }
  out.report = oracle_suite(o);
  return out;
}

}  // namespace ergcount
