#include "ergcount/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace ergcount {

json int_to_json(const Int& v) { return v.get_str(); }

Int int_from_json(const json& j) {
  if (j.is_number_integer()) return Int(j.get<long>());
  return Int(j.get<std::string>());
}

json edge_to_json(Edge e) {
  Store& st = store();
  std::unordered_map<NodeId, size_t> index;
  json nodes = json::array();
  // iterative post-order so deep chains do not blow the stack
  std::vector<std::pair<NodeId, bool>> stack{{e.node, false}};
  while (!stack.empty()) {
    auto [id, expanded] = stack.back();
    stack.pop_back();
    if (index.count(id)) continue;
    const Node& n = st.node(id);
    if (n.kind == Kind::Split && !expanded) {
      stack.push_back({id, true});
      stack.push_back({n.hi.node, false});
      stack.push_back({n.lo.node, false});
      continue;
    }
    json j;
    if (n.kind == Kind::Term) {
      j = {{"t", n.label}};
    } else if (n.kind == Kind::Split) {
      j = {{"s", {index.at(n.lo.node), n.lo.skip, index.at(n.hi.node), n.hi.skip}}};
    } else {
      json segs = json::array();
      for (const Seg& s : st.segs(id)) segs.push_back({scaled_str(s.start), s.label});
      j = {{"l", segs}};
    }
    index[id] = nodes.size();
    nodes.push_back(std::move(j));
  }
  return {{"nodes", std::move(nodes)}, {"root", {index.at(e.node), e.skip}}};
}

namespace {

Edge with_skip(const Edge& e, uint64_t extra) {
  if (store().is_term(e)) return Edge{e.node, 0};
  return Edge{e.node, e.skip + extra};
}

}  // namespace

Edge edge_from_json(const json& j) {
  Store& st = store();
  std::vector<Edge> built;
  try {
    for (const json& n : j.at("nodes")) {
      if (n.contains("t")) {
        built.push_back(st.term(n["t"].get<Label>()));
      } else if (n.contains("s")) {
        const json& s = n["s"];
        size_t a = s.at(0).get<size_t>(), b = s.at(2).get<size_t>();
        if (a >= built.size() || b >= built.size()) throw SchemaError("split refers forward");
        Edge lo = with_skip(built[a], s.at(1).get<uint64_t>());
        Edge hi = with_skip(built[b], s.at(3).get<uint64_t>());
        built.push_back(st.split(lo, hi));
      } else if (n.contains("l")) {
        std::vector<Seg> segs;
        for (const json& s : n["l"]) segs.push_back(Seg{parse_scaled(s.at(0).get<std::string>()), s.at(1).get<Label>()});
        if (segs.empty() || !segs.front().start.is_zero()) throw SchemaError("leaf must start at 0");
        for (size_t i = 1; i < segs.size(); ++i) {
          if (!(segs[i - 1].start < segs[i].start) || !(segs[i].start < Scaled(1))) throw SchemaError("leaf cuts out of order");
        }
        built.push_back(st.leaf(std::move(segs)));
      } else {
        throw SchemaError("unknown node kind");
      }
    }
    const json& r = j.at("root");
    size_t ri = r.at(0).get<size_t>();
    if (ri >= built.size()) throw SchemaError("bad root");
    return with_skip(built[ri], r.at(1).get<uint64_t>());
  } catch (const json::exception& ex) {
    throw SchemaError(std::string("malformed pattern: ") + ex.what());
  }
}

json wrap_document(const std::string& kind, json payload) {
  return {{"schema_version", kSchemaVersion}, {"kind", kind}, {"payload", std::move(payload)}};
}

json open_document(const json& doc, const std::string& kind) {
  if (!doc.is_object() || !doc.contains("schema_version")) throw SchemaError("not an ergcount document");
  const json& v = doc["schema_version"];
  if (!v.is_number_integer() || v.get<long>() != kSchemaVersion) {
    throw SchemaError("schema version " + v.dump() + " is not supported (expected " + std::to_string(kSchemaVersion) + ")");
  }
  std::string k = doc.value("kind", "");
  if (k != kind) throw SchemaError("document holds a " + k + ", expected a " + kind);
  if (!doc.contains("payload")) throw SchemaError("document has no payload");
  return doc["payload"];
}

void write_atomic(const std::string& path, const std::string& text) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ergcount
