#include "gnids/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gnids/error.hpp"

namespace gnids {

std::string checksum_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_envelope(const std::string& path, std::string_view kind, nlohmann::json body) {
  nlohmann::json doc = std::move(body);
  doc["format_version"] = kModelFormatVersion;
  doc["kind"] = std::string(kind);
  doc["checksum"] = checksum_hex(doc.dump());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << doc.dump() << '\n';
  if (!out) throw Error("failed writing " + path);
}

nlohmann::json read_envelope(const std::string& path, std::string_view kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ChecksumError(path + ": corrupted model file (" + e.what() + ")");
  }
  if (!doc.is_object() || !doc.contains("format_version") || !doc.contains("checksum")) {
    throw ChecksumError(path + ": missing envelope fields");
  }
  if (!doc["format_version"].is_number_integer() ||
      doc["format_version"].get<long long>() != kModelFormatVersion) {
    throw VersionError(path + ": format version " + doc["format_version"].dump() +
                       ", expected " + std::to_string(kModelFormatVersion));
  }
  const nlohmann::json stored = doc["checksum"];
  doc.erase("checksum");
  if (!stored.is_string() || stored.get<std::string>() != checksum_hex(doc.dump())) {
    throw ChecksumError(path + ": checksum mismatch");
  }
  if (doc.value("kind", std::string()) != kind) {
    throw UsageError(path + ": holds a '" + doc.value("kind", std::string()) +
                     "' model, expected '" + std::string(kind) + "'");
  }
  return doc;
}

nlohmann::json tensor_to_json(const Tensor& t) {
  return {{"shape", t.shape()}, {"data", std::vector<double>(t.data().begin(), t.data().end())}};
}

Tensor tensor_from_json(const nlohmann::json& j) {
  return Tensor(j.at("shape").get<std::vector<std::size_t>>(),
                j.at("data").get<std::vector<double>>());
}

nlohmann::json params_to_json(const ParameterStore& store) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : store) {
    nlohmann::json e = tensor_to_json(p.value);
    e["name"] = p.name;
    arr.push_back(std::move(e));
  }
  return arr;
}

void params_from_json(const nlohmann::json& j, ParameterStore& store) {
  if (!j.is_array() || j.size() != store.size()) {
    throw SchemaError("parameter list does not match the model layout");
  }
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto name = j[i].at("name").get<std::string>();
    if (name != store[i].name) {
      throw SchemaError("parameter " + std::to_string(i) + " is '" + name + "', expected '" +
                        store[i].name + "'");
    }
    Tensor t = tensor_from_json(j[i]);
    if (t.shape() != store[i].value.shape()) {
      throw ShapeError("parameter " + name + " has shape " + t.shape_string() + ", expected " +
                       store[i].value.shape_string());
    }
    store[i].value = std::move(t);
  }
}

}  // namespace gnids
