// mgsp: multilayer-graph signal processing pipelines over images and cubes.
//
// Exit codes: 0 success, 2 I/O or parse failure, 3 invalid parameters,
// 4 invalid graph input.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "mgsp/convolution.hpp"
#include "mgsp/pipelines.hpp"
#include "mgsp/serialization.hpp"
#include "mgsp/spectra.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t resolveSeed(const CLI::App& cmd, std::uint64_t flagValue) {
  if (cmd.count("--seed") > 0) return flagValue;
  if (const char* env = std::getenv("MLG_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw CLI::ValidationError("MLG_SEED", "MLG_SEED must be an unsigned integer");
    }
  }
  return 42;
}

void ensureOutDir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw mgsp::IoError("cannot create output directory " + out);
}

void writeManifest(const std::string& outDir, const std::string& command,
                   const std::string& input, std::uint64_t seed, json parameters,
                   std::vector<std::string> outputs, json extra = json::object()) {
  json m;
  m["command"] = command;
  m["input"] = input;
  m["seed"] = seed;
  m["parameters"] = std::move(parameters);
  outputs.push_back("manifest.json");
  std::sort(outputs.begin(), outputs.end());
  m["outputs"] = outputs;
  for (auto& [k, v] : extra.items()) m[k] = v;
  mgsp::writeJsonFile((fs::path(outDir) / "manifest.json").string(), m);
}

std::string fractionTag(double f) {
  std::string t = mgsp::formatDouble(f);
  for (auto& c : t)
    if (c == '.') c = 'p';
  return t;
}

std::string lowerCopy(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

mgsp::ThresholdPolicy parseThreshold(const std::string& spec) {
  mgsp::ThresholdPolicy policy;
  const auto colon = spec.find(':');
  const std::string kind = lowerCopy(colon == std::string::npos ? spec : spec.substr(0, colon));
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "otsu") {
    policy.kind = mgsp::ThresholdPolicy::Kind::otsu;
    return policy;
  }
  if (kind == "percentile")
    policy.kind = mgsp::ThresholdPolicy::Kind::percentile;
  else if (kind == "fixed")
    policy.kind = mgsp::ThresholdPolicy::Kind::fixedValue;
  else
    throw CLI::ValidationError("--threshold", "expected percentile[:P], fixed:V or otsu");
  if (!arg.empty()) {
    try {
      policy.value = std::stod(arg);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--threshold", "bad numeric argument '" + arg + "'");
    }
  } else if (policy.kind == mgsp::ThresholdPolicy::Kind::fixedValue) {
    throw CLI::ValidationError("--threshold", "fixed threshold needs a value");
  }
  return policy;
}

void writeMatrixCsv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw mgsp::IoError("cannot write " + path);
  for (Eigen::Index y = 0; y < m.rows(); ++y) {
    for (Eigen::Index x = 0; x < m.cols(); ++x) {
      if (x) out << ",";
      out << mgsp::formatDouble(m(y, x));
    }
    out << "\n";
  }
  if (!out) throw mgsp::IoError("failed writing " + path);
}

// --- compress ---------------------------------------------------------------

struct CompressConfig {
  std::string input, out = "out";
  std::vector<std::string> methods{"mln-eig", "mln-hosvd", "gft", "gft2"};
  std::vector<double> fractions{0.25, 0.5, 0.75, 1.0};
  std::string ordering = "coefficient-energy";
  std::string direction = "block";
  mgsp::Index blockLayers = 0;
  int cpMaxIter = 100;
  double cpTol = 1e-8;
  int jobs = 1;
  std::uint64_t seed = 42;
  bool writeImages = true;
};

int cmdCompress(const CompressConfig& cfg, std::uint64_t seed) {
  const mgsp::RgbImage img = mgsp::loadRgbImage(cfg.input);
  mgsp::CompressionOptions opts;
  opts.fractions = cfg.fractions;
  opts.blockLayers = cfg.blockLayers;
  opts.cpMaxIter = cfg.cpMaxIter;
  opts.cpTol = cfg.cpTol;
  opts.jobs = cfg.jobs;
  if (cfg.ordering == "coefficient-energy")
    opts.ordering = mgsp::Ordering::byCoefficientEnergy;
  else if (cfg.ordering == "spectral-value")
    opts.ordering = mgsp::Ordering::bySpectralValue;
  else
    throw CLI::ValidationError("--ordering", "expected coefficient-energy or spectral-value");
  if (cfg.direction == "block")
    opts.direction = mgsp::Direction::blockWise;
  else if (cfg.direction == "layer")
    opts.direction = mgsp::Direction::layerWise;
  else if (cfg.direction == "entity")
    opts.direction = mgsp::Direction::entityWise;
  else
    throw CLI::ValidationError("--direction", "expected block, layer or entity");

  const mgsp::CompressionReport report = mgsp::compressRgb(img, cfg.methods, opts);

  ensureOutDir(cfg.out);
  std::vector<std::string> outputs;
  {
    const std::string path = (fs::path(cfg.out) / "curves.csv").string();
    std::ofstream out(path);
    if (!out) throw mgsp::IoError("cannot write " + path);
    out << "fraction,method,mse,psnr\n";
    for (const auto& e : report.entries)
      out << mgsp::formatDouble(e.fraction) << "," << e.method << ","
          << mgsp::formatDouble(e.mse) << "," << mgsp::formatDouble(e.psnr) << "\n";
    outputs.push_back("curves.csv");
  }
  if (cfg.writeImages) {
    for (const auto& rec : report.recovered) {
      const std::string name =
          "recovered-" + lowerCopy(rec.method) + "-f" + fractionTag(rec.fraction) + ".png";
      mgsp::savePng((fs::path(cfg.out) / name).string(), rec.image);
      outputs.push_back(name);
    }
  }
  for (const auto& p : report.payloads) {
    const std::string name =
        "payload-" + lowerCopy(p.method) + "-f" + fractionTag(p.fraction) + ".mgsc";
    mgsp::CompressedPayload payload;
    payload.layers = 3;
    payload.entities = img.height() * img.width();
    payload.basisKind = p.basisKind;
    payload.plan = p.plan;
    payload.kept = p.kept;
    mgsp::writeCompressed((fs::path(cfg.out) / name).string(), payload);
    outputs.push_back(name);
  }

  json params;
  params["methods"] = cfg.methods;
  params["fractions"] = cfg.fractions;
  params["ordering"] = cfg.ordering;
  params["direction"] = cfg.direction;
  params["blockLayers"] = cfg.blockLayers;
  params["cpMaxIter"] = cfg.cpMaxIter;
  params["cpTol"] = cfg.cpTol;
  params["jobs"] = cfg.jobs;
  json extra = json::object();
  if (report.cpResidual >= 0) {
    extra["residuals"] =
        json{{"cp", report.cpResidual}, {"cpIterations", report.cpIterations}};
  }
  writeManifest(cfg.out, "compress", cfg.input, seed, params, outputs, extra);
  return 0;
}

// --- edges -------------------------------------------------------------------

struct EdgesConfig {
  std::string input, out = "out";
  mgsp::Index k = 3;
  std::string kernel = "c1";
  std::string threshold = "percentile:95";
  std::uint64_t seed = 42;
};

int cmdEdges(const EdgesConfig& cfg, std::uint64_t seed) {
  if (cfg.k < 3 || cfg.k % 2 == 0)
    throw CLI::ValidationError("--window", "window size must be odd and >= 3");
  if (cfg.kernel != "c1" && cfg.kernel != "c2")
    throw CLI::ValidationError("--kernel", "expected c1 or c2");
  const mgsp::ThresholdPolicy policy = parseThreshold(cfg.threshold);
  const mgsp::RgbImage img = mgsp::loadRgbImage(cfg.input);
  mgsp::WindowSpec spec;
  spec.k = cfg.k;

  const mgsp::EdgePanel panel = mgsp::edgeDetectPipeline(img, spec, policy);

  ensureOutDir(cfg.out);
  std::vector<std::string> outputs;
  const auto writeMap = [&](const char* name, const Eigen::MatrixXi& map) {
    const std::string file = std::string("edges-") + name + ".png";
    mgsp::savePngMask((fs::path(cfg.out) / file).string(), map);
    outputs.push_back(file);
  };
  writeMap("mlg-c1", panel.mlgC1);
  writeMap("mlg-c2", panel.mlgC2);
  writeMap("gsp", panel.gsp);
  writeMap("sobel", panel.sobel);
  writeMap("prewitt", panel.prewitt);
  {
    const std::string name = "difference-" + cfg.kernel + ".csv";
    writeMatrixCsv((fs::path(cfg.out) / name).string(),
                   cfg.kernel == "c2" ? panel.diffC2 : panel.diffC1);
    outputs.push_back(name);
  }

  json params;
  params["window"] = cfg.k;
  params["kernel"] = cfg.kernel;
  params["threshold"] = cfg.threshold;
  writeManifest(cfg.out, "edges", cfg.input, seed, params, outputs);
  return 0;
}

// --- segment ------------------------------------------------------------------

struct SegmentConfig {
  std::string input, out = "out", truth;
  int layers = 10;
  mgsp::Index superpixels = 100;
  int classes = 0;
  int knn = 8;
  std::uint64_t seed = 42;
};

int cmdSegment(const SegmentConfig& cfg, std::uint64_t seed) {
  const mgsp::ImageCube cube = mgsp::loadCube(cfg.input);
  mgsp::SegmentationOptions opts;
  opts.layers = cfg.layers;
  opts.superpixels = cfg.superpixels;
  opts.classes = cfg.classes;
  opts.seed = seed;
  opts.graph.knn = cfg.knn;

  const mgsp::HsiSegmentation seg = mgsp::segmentHsi(cube, opts);

  ensureOutDir(cfg.out);
  std::vector<std::string> outputs;
  const auto writeSeg = [&](const mgsp::SegmentationResult& r, const char* name) {
    const std::string png = std::string("labels-") + name + ".png";
    const std::string csv = std::string("labels-") + name + ".csv";
    const std::string bnd = std::string("boundary-") + name + ".png";
    mgsp::savePngLabels((fs::path(cfg.out) / png).string(), r.labelMap);
    mgsp::saveLabelsCsv((fs::path(cfg.out) / csv).string(), r.labelMap);
    mgsp::savePngMask((fs::path(cfg.out) / bnd).string(), r.boundaries);
    outputs.push_back(png);
    outputs.push_back(csv);
    outputs.push_back(bnd);
  };
  writeSeg(seg.mgsp, "mgsp");
  writeSeg(seg.gsp, "gsp");
  writeSeg(seg.kmeansOnly, "kmeans");

  json extra = json::object();
  extra["spectralRank"] = seg.spectralRank;
  if (!cfg.truth.empty()) {
    const Eigen::MatrixXi truth = mgsp::loadLabelsCsv(cfg.truth);
    const std::string path = (fs::path(cfg.out) / "accuracy.csv").string();
    std::ofstream out(path);
    if (!out) throw mgsp::IoError("cannot write " + path);
    out << "method,boundary_accuracy\n";
    json acc = json::object();
    for (const auto* r : {&seg.kmeansOnly, &seg.gsp, &seg.mgsp}) {
      const double a = mgsp::boundaryAccuracy(r->labelMap, truth);
      out << r->method << "," << mgsp::formatDouble(a) << "\n";
      acc[r->method] = a;
    }
    outputs.push_back("accuracy.csv");
    extra["accuracy"] = acc;
  }

  json params;
  params["layers"] = cfg.layers;
  params["superpixels"] = cfg.superpixels;
  params["classes"] = cfg.classes;
  params["knn"] = cfg.knn;
  if (!cfg.truth.empty()) params["truth"] = cfg.truth;
  writeManifest(cfg.out, "segment", cfg.input, seed, params, outputs, extra);
  return 0;
}

// --- spectra-dump ---------------------------------------------------------------

struct SpectraConfig {
  std::string input, out = "out";
  std::string rep = "adjacency";
  int cpMaxIter = 100;
  double cpTol = 1e-8;
  std::uint64_t seed = 42;
};

int cmdSpectraDump(const SpectraConfig& cfg, std::uint64_t seed) {
  if (cfg.rep != "adjacency" && cfg.rep != "laplacian")
    throw CLI::ValidationError("--rep", "expected adjacency or laplacian");
  const auto g = mgsp::readGraphFile(cfg.input, cfg.rep == "laplacian"
                                                    ? mgsp::Representation::laplacian
                                                    : mgsp::Representation::adjacency);
  const auto h = mgsp::hosvd(g.tensor());
  const auto cp = mgsp::orthogonalCp(g.tensor(), cfg.cpMaxIter, cfg.cpTol);
  const auto fe = mgsp::flattenedEigen(g.tensor());

  ensureOutDir(cfg.out);
  const std::string path = (fs::path(cfg.out) / "spectra.csv").string();
  std::ofstream out(path);
  if (!out) throw mgsp::IoError("cannot write " + path);
  const auto writeMatrix = [&out](const char* name, const Eigen::MatrixXd& m) {
    out << "# " << name << " " << m.rows() << " " << m.cols() << "\n";
    for (Eigen::Index y = 0; y < m.rows(); ++y) {
      for (Eigen::Index x = 0; x < m.cols(); ++x) {
        if (x) out << ",";
        out << mgsp::formatDouble(m(y, x));
      }
      out << "\n";
    }
  };
  writeMatrix("layer_basis", h.basis.layerBasis);
  writeMatrix("entity_basis", h.basis.entityBasis);
  writeMatrix("layer_values", h.basis.layerValues.transpose());
  writeMatrix("entity_values", h.basis.entityValues.transpose());
  writeMatrix("core_flattened", mgsp::flatten(h.core));
  writeMatrix("eigenvalues", fe.values.transpose());
  writeMatrix("cp_weights", cp.weights);
  out << "# cp_residual 1 2\n"
      << mgsp::formatDouble(cp.residual) << "," << cp.iterations << "\n";
  if (!out) throw mgsp::IoError("failed writing " + path);

  json params;
  params["rep"] = cfg.rep;
  params["cpMaxIter"] = cfg.cpMaxIter;
  params["cpTol"] = cfg.cpTol;
  const auto gram = [](const Eigen::MatrixXd& u) {
    return (u.transpose() * u -
            Eigen::MatrixXd::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
  };
  json extra = json::object();
  extra["residuals"] = json{{"cp", cp.residual}, {"cpIterations", cp.iterations}};
  extra["orthonormality"] =
      std::max(gram(h.basis.layerBasis), gram(h.basis.entityBasis));
  writeManifest(cfg.out, "spectra-dump", cfg.input, seed, params, {"spectra.csv"}, extra);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multilayer-graph signal processing toolkit"};
  app.require_subcommand(1);

  CompressConfig cc;
  auto* compress = app.add_subcommand("compress", "spectral-sampling image compression");
  compress->add_option("--in,--input", cc.input, "PNG or PPM image")->required();
  compress->add_option("--out", cc.out, "output directory");
  compress->add_option("--methods", cc.methods, "mln-eig, mln-hosvd, gft, gft2")->delimiter(',');
  compress->add_option("--fractions", cc.fractions, "kept-coefficient fractions in (0,1]")
      ->delimiter(',');
  compress->add_option("--ordering", cc.ordering, "coefficient-energy | spectral-value");
  compress->add_option("--direction", cc.direction, "block | layer | entity");
  compress->add_option("--block-layers", cc.blockLayers, "layer rows kept block-wise (0 = all)");
  compress->add_option("--cp-max-iter", cc.cpMaxIter, "orthogonal-CP iteration cap");
  compress->add_option("--cp-tol", cc.cpTol, "orthogonal-CP residual tolerance");
  compress->add_option("--jobs", cc.jobs, "parallel workers across fractions");
  compress->add_option("--seed", cc.seed, "RNG seed (overrides MLG_SEED)");
  compress->add_flag("!--no-images", cc.writeImages, "skip recovered PNGs");

  EdgesConfig ec;
  auto* edges = app.add_subcommand("edges", "convolutional edge detection panel");
  edges->add_option("--in,--input", ec.input, "PNG or PPM image")->required();
  edges->add_option("--out", ec.out, "output directory");
  edges->add_option("--k,--window", ec.k, "odd window side length");
  edges->add_option("--kernel", ec.kernel, "difference CSV kernel: c1 | c2");
  edges->add_option("--threshold", ec.threshold, "percentile[:P] | fixed:V | otsu");
  edges->add_option("--seed", ec.seed, "RNG seed (overrides MLG_SEED)");

  SegmentConfig sc;
  auto* segment = app.add_subcommand("segment", "unsupervised cube segmentation");
  segment->add_option("--in,--input", sc.input, "ENVI .hdr or cube CSV")->required();
  segment->add_option("--out", sc.out, "output directory");
  segment->add_option("--truth", sc.truth, "ground-truth label CSV (optional)");
  segment->add_option("--M,--layers", sc.layers, "band clusters");
  segment->add_option("--N,--superpixels", sc.superpixels, "superpixel count");
  segment->add_option("--Q,--classes", sc.classes, "segment count")->required();
  segment->add_option("--knn", sc.knn, "intralayer neighbors kept");
  segment->add_option("--seed", sc.seed, "RNG seed (overrides MLG_SEED)");

  SpectraConfig pc;
  auto* spectra = app.add_subcommand("spectra-dump", "bases, core and CP weights of a graph");
  spectra->add_option("--in,--input", pc.input, "MLG4 tensor or edge-list file")->required();
  spectra->add_option("--out", pc.out, "output directory");
  spectra->add_option("--rep", pc.rep, "tensor representation: adjacency | laplacian");
  spectra->add_option("--cp-max-iter", pc.cpMaxIter, "orthogonal-CP iteration cap");
  spectra->add_option("--cp-tol", pc.cpTol, "orthogonal-CP residual tolerance");
  spectra->add_option("--seed", pc.seed, "RNG seed (overrides MLG_SEED)");

  try {
    app.parse(argc, argv);
    if (compress->parsed()) return cmdCompress(cc, resolveSeed(*compress, cc.seed));
    if (edges->parsed()) return cmdEdges(ec, resolveSeed(*edges, ec.seed));
    if (segment->parsed()) return cmdSegment(sc, resolveSeed(*segment, sc.seed));
    if (spectra->parsed()) return cmdSpectraDump(pc, resolveSeed(*spectra, pc.seed));
    return 3;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 3;
  } catch (const mgsp::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mgsp::InvalidGraphError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const mgsp::ShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
