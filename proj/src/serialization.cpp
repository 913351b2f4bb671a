#include "mgsp/serialization.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mgsp {

namespace {

using nlohmann::json;

void putU32(std::ostream& out, std::uint32_t v) {
  const std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                             static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t getU32(std::istream& in, const std::string& path) {
  std::uint8_t b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw IoError(path + ": truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void putF64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  std::uint8_t b[8];
  for (int k = 0; k < 8; ++k) b[k] = static_cast<std::uint8_t>(bits >> (8 * k));
  out.write(reinterpret_cast<const char*>(b), 8);
}

double getF64(std::istream& in, const std::string& path) {
  std::uint8_t b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw IoError(path + ": truncated payload");
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void writeBlock(const std::string& path, const char* magic, Index m, Index n,
                const double* data, Index count) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(magic, 4);
  putU32(out, static_cast<std::uint32_t>(m));
  putU32(out, static_cast<std::uint32_t>(n));
  for (Index k = 0; k < count; ++k) putF64(out, data[k]);
  if (!out) throw IoError("failed writing " + path);
}

std::string orderingName(Ordering o) {
  return o == Ordering::bySpectralValue ? "spectral-value" : "coefficient-energy";
}

Ordering orderingFrom(const std::string& s) {
  if (s == "spectral-value") return Ordering::bySpectralValue;
  if (s == "coefficient-energy") return Ordering::byCoefficientEnergy;
  throw IoError("unknown ordering '" + s + "'");
}

std::string directionName(Direction d) {
  switch (d) {
    case Direction::layerWise: return "layer";
    case Direction::entityWise: return "entity";
    case Direction::blockWise: break;
  }
  return "block";
}

Direction directionFrom(const std::string& s) {
  if (s == "layer") return Direction::layerWise;
  if (s == "entity") return Direction::entityWise;
  if (s == "block") return Direction::blockWise;
  throw IoError("unknown direction '" + s + "'");
}

}  // namespace

void writeTensorFile(const std::string& path, const Tensor4<double>& t) {
  if (!t.isMlgShaped()) throw ShapeError("tensor files hold MLG-shaped tensors only");
  writeBlock(path, "MLG4", t.layers(), t.entities(), t.vec().data(), t.size());
}

Tensor4<double> readTensorFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "MLG4", 4) != 0)
    throw IoError(path + ": not a tensor file (bad magic)");
  const Index m = getU32(in, path), n = getU32(in, path);
  Tensor4<double> t(m, n);
  for (Index k = 0; k < t.size(); ++k) t.vec()[k] = getF64(in, path);
  return t;
}

void writeSignalFile(const std::string& path, const Eigen::MatrixXd& s) {
  std::vector<double> rowMajor(static_cast<std::size_t>(s.size()));
  for (Index r = 0; r < s.rows(); ++r)
    for (Index c = 0; c < s.cols(); ++c)
      rowMajor[static_cast<std::size_t>(r * s.cols() + c)] = s(r, c);
  writeBlock(path, "MLGS", s.rows(), s.cols(), rowMajor.data(), s.size());
}

Eigen::MatrixXd readSignalFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "MLGS", 4) != 0)
    throw IoError(path + ": not a signal file (bad magic)");
  const Index m = getU32(in, path), n = getU32(in, path);
  Eigen::MatrixXd s(m, n);
  for (Index r = 0; r < m; ++r)
    for (Index c = 0; c < n; ++c) s(r, c) = getF64(in, path);
  return s;
}

MultilayerGraph<double> readEdgeList(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  Index m = 0, n = 0;
  bool haveHeader = false;
  Tensor4<double> t;
  Index lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    if (!haveHeader) {
      if (!(ls >> m >> n)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        throw IoError(path + ":" + std::to_string(lineNo) + ": expected 'M N' header");
      }
      if (m <= 0 || n <= 0)
        throw IoError(path + ": layer/entity counts must be positive");
      t = Tensor4<double>(m, n);
      haveHeader = true;
      continue;
    }
    Index a = 0, i = 0, b = 0, j = 0;
    double w = 0;
    if (!(ls >> a >> i >> b >> j >> w)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw IoError(path + ":" + std::to_string(lineNo) +
                    ": expected 'layer entity layer entity weight'");
    }
    if (a < 1 || a > m || b < 1 || b > m || i < 1 || i > n || j < 1 || j > n)
      throw IoError(path + ":" + std::to_string(lineNo) + ": vertex out of range");
    t(a - 1, i - 1, b - 1, j - 1) = w;
    t(b - 1, j - 1, a - 1, i - 1) = w;
  }
  if (!haveHeader) throw IoError(path + ": missing 'M N' header");
  return MultilayerGraph<double>::adjacency(std::move(t));
}

void writeEdgeList(const std::string& path, const MultilayerGraph<double>& g) {
  if (g.representation() != Representation::adjacency)
    throw InvalidGraphError("edge lists store adjacency graphs only");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  const auto& t = g.tensor();
  const Index m = t.layers(), n = t.entities();
  out << m << " " << n << "\n";
  for (Index a = 0; a < m; ++a)
    for (Index i = 0; i < n; ++i)
      for (Index b = 0; b < m; ++b)
        for (Index j = 0; j < n; ++j) {
          if (a * n + i > b * n + j) continue;  // one line per undirected edge
          const double w = t(a, i, b, j);
          if (w == 0.0) continue;
          out << a + 1 << " " << i + 1 << " " << b + 1 << " " << j + 1 << " "
              << formatDouble(w) << "\n";
        }
  if (!out) throw IoError("failed writing " + path);
}

MultilayerGraph<double> readGraphFile(const std::string& path, Representation rep) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open " + path);
  char magic[4] = {0, 0, 0, 0};
  probe.read(magic, 4);
  probe.close();
  if (std::memcmp(magic, "MLG4", 4) == 0) {
    Tensor4<double> t = readTensorFile(path);
    return rep == Representation::adjacency
               ? MultilayerGraph<double>::adjacency(std::move(t))
               : MultilayerGraph<double>::laplacian(std::move(t));
  }
  return readEdgeList(path);
}

void writeCompressed(const std::string& path, const CompressedPayload& payload) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  json header;
  header["layers"] = payload.layers;
  header["entities"] = payload.entities;
  header["basis"] = payload.basisKind;
  header["ordering"] = orderingName(payload.plan.ordering);
  header["direction"] = directionName(payload.plan.direction);
  header["keepLayers"] = payload.plan.keepLayers;
  header["keepEntities"] = payload.plan.keepEntities;
  header["keepCount"] = payload.plan.keepCount;
  header["rowPerm"] = payload.plan.rowPerm;
  header["colPerm"] = payload.plan.colPerm;
  out << header.dump() << "\n";
  for (const auto& c : payload.kept)
    out << c.row << "," << c.col << "," << formatDouble(c.value) << "\n";
  if (!out) throw IoError("failed writing " + path);
}

CompressedPayload readCompressed(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty payload");
  CompressedPayload p;
  try {
    const json header = json::parse(line);
    p.layers = header.at("layers").get<Index>();
    p.entities = header.at("entities").get<Index>();
    p.basisKind = header.at("basis").get<std::string>();
    p.plan.ordering = orderingFrom(header.at("ordering").get<std::string>());
    p.plan.direction = directionFrom(header.at("direction").get<std::string>());
    p.plan.keepLayers = header.at("keepLayers").get<Index>();
    p.plan.keepEntities = header.at("keepEntities").get<Index>();
    p.plan.keepCount = header.at("keepCount").get<Index>();
    p.plan.rowPerm = header.at("rowPerm").get<std::vector<Index>>();
    p.plan.colPerm = header.at("colPerm").get<std::vector<Index>>();
  } catch (const json::exception& e) {
    throw IoError(path + ": bad payload header: " + e.what());
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    SampleResult<double>::Coefficient c;
    char c1 = 0, c2 = 0;
    std::istringstream ls(line);
    if (!(ls >> c.row >> c1 >> c.col >> c2 >> c.value) || c1 != ',' || c2 != ',')
      throw IoError(path + ": bad coefficient row '" + line + "'");
    p.kept.push_back(c);
  }
  return p;
}

void writeJsonFile(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path);
}

nlohmann::json readJsonFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

namespace {

bool typeMatches(const json& doc, const std::string& type) {
  if (type == "object") return doc.is_object();
  if (type == "array") return doc.is_array();
  if (type == "string") return doc.is_string();
  if (type == "integer") return doc.is_number_integer();
  if (type == "number") return doc.is_number();
  if (type == "boolean") return doc.is_boolean();
  if (type == "null") return doc.is_null();
  return false;
}

void validateNode(const json& doc, const json& schema, const std::string& where,
                  std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    const auto type = schema["type"].get<std::string>();
    if (!typeMatches(doc, type)) {
      errors.push_back(where + ": expected " + type);
      return;
    }
  }
  if (schema.contains("required")) {
    for (const auto& key : schema["required"]) {
      if (!doc.is_object() || !doc.contains(key.get<std::string>()))
        errors.push_back(where + ": missing required key '" + key.get<std::string>() + "'");
    }
  }
  if (schema.contains("properties") && doc.is_object()) {
    for (const auto& [key, sub] : schema["properties"].items())
      if (doc.contains(key)) validateNode(doc[key], sub, where + "/" + key, errors);
  }
  if (schema.contains("items") && doc.is_array()) {
    Index k = 0;
    for (const auto& item : doc) {
      validateNode(item, schema["items"], where + "/" + std::to_string(k), errors);
      ++k;
    }
  }
}

}  // namespace

std::vector<std::string> validateAgainstSchema(const nlohmann::json& doc,
                                               const nlohmann::json& schema) {
  std::vector<std::string> errors;
  validateNode(doc, schema, "$", errors);
  return errors;
}

std::string formatDouble(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace mgsp
