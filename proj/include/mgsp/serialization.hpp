#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "mgsp/mlg.hpp"
#include "mgsp/sampling.hpp"
#include "mgsp/tensor.hpp"

namespace mgsp {

// --- binary tensor/signal dumps -----------------------------------------
// Tensor file: magic "MLG4", uint32 layers, uint32 entities, then
// layers*entities*layers*entities float64 values row-major over (a,i,b,j).
// Signal file: magic "MLGS", uint32 layers, uint32 entities, float64 values
// row-major.  Both little-endian.

void writeTensorFile(const std::string& path, const Tensor4<double>& t);
Tensor4<double> readTensorFile(const std::string& path);

void writeSignalFile(const std::string& path, const Eigen::MatrixXd& s);
Eigen::MatrixXd readSignalFile(const std::string& path);

// --- plain-text edge list ------------------------------------------------
// First non-comment line: "M N".  Each following line is one undirected edge
// "layer entity layer entity weight" with 1-based vertex coordinates; the
// mirrored entry is filled in automatically.  '#' starts a comment.

MultilayerGraph<double> readEdgeList(const std::string& path);
void writeEdgeList(const std::string& path, const MultilayerGraph<double>& g);

/// Graph file dispatch: MLG4 magic -> binary tensor (representation chosen
/// by `rep`), anything else -> edge list (always adjacency).
MultilayerGraph<double> readGraphFile(const std::string& path,
                                      Representation rep = Representation::adjacency);

// --- compressed spectral payload ----------------------------------------
// One JSON header line (shape, kind, plan) followed by CSV rows
// "row,col,value" for each kept coefficient in plan scan order.

struct CompressedPayload {
  Index layers = 0;
  Index entities = 0;
  std::string basisKind;  // "hosvd" | "cp" | "gft2"
  SamplingPlan plan;
  std::vector<SampleResult<double>::Coefficient> kept;
};

void writeCompressed(const std::string& path, const CompressedPayload& payload);
CompressedPayload readCompressed(const std::string& path);

// --- manifests ------------------------------------------------------------

/// Serializes with sorted keys and a trailing newline so byte output is
/// reproducible.
void writeJsonFile(const std::string& path, const nlohmann::json& j);
nlohmann::json readJsonFile(const std::string& path);

/// Minimal JSON-schema checker covering the subset the manifest schema uses:
/// "type", "required", "properties", "items".  Returns human-readable
/// violations, empty when the document conforms.
std::vector<std::string> validateAgainstSchema(const nlohmann::json& doc,
                                               const nlohmann::json& schema);

std::string formatDouble(double v);  // shortest round-trip decimal form

}  // namespace mgsp
