#pragma once

#include "ergcount/dyset.hpp"
#include "ergcount/report.hpp"

namespace ergcount {

constexpr int kSchemaVersion = 1;

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// node list in dependency order plus a root reference; shared subpatterns are
// written once
json edge_to_json(Edge e);
Edge edge_from_json(const json& j);

json int_to_json(const Int& v);
Int int_from_json(const json& j);

// {"schema_version", "kind", "payload"}
json wrap_document(const std::string& kind, json payload);
// payload of a document of the given kind; SchemaError on version or kind mismatch
json open_document(const json& doc, const std::string& kind);

// write to path.tmp, then rename over path
void write_atomic(const std::string& path, const std::string& text);
std::string read_file(const std::string& path);

}  // namespace ergcount
