#include <sys/wait.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "mgsp/image.hpp"
#include "mgsp/mlg.hpp"
#include "mgsp/serialization.hpp"

namespace fs = std::filesystem;
using mgsp::testing::TempDir;
using mgsp::testing::readFileBytes;
using mgsp::testing::writeText;

namespace {

const std::string kCli = MGSP_CLI_PATH;

// Runs the CLI through the shell, muting its streams; returns the exit code.
int runCli(const std::string& args, const std::string& envPrefix = "") {
  const std::string cmd = envPrefix + kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::vector<std::string> readLines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "cannot open ", path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> splitCsvLine(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

// Parses one "# name rows cols" block out of spectra.csv.
std::vector<std::vector<double>> spectraBlock(const std::string& path,
                                              const std::string& name) {
  const auto lines = readLines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::stringstream header(lines[i]);
    std::string hash, got;
    long rows = 0, cols = 0;
    if (!(header >> hash >> got >> rows >> cols) || hash != "#" || got != name)
      continue;
    std::vector<std::vector<double>> block;
    for (long r = 0; r < rows; ++r) {
      std::vector<double> row;
      for (const auto& cell : splitCsvLine(lines.at(i + 1 + r)))
        row.push_back(std::stod(cell));
      REQUIRE(static_cast<long>(row.size()) == cols);
      block.push_back(std::move(row));
    }
    return block;
  }
  FAIL("block not found in ", path, ": ", name);
  return {};
}

mgsp::RgbImage uniformImage(int h, int w, double value) {
  mgsp::RgbImage img;
  img.r = Eigen::MatrixXd::Constant(h, w, value);
  img.g = img.r;
  img.b = img.r;
  return img;
}

mgsp::RgbImage stepImage(int h, int w, int splitCol) {
  mgsp::RgbImage img = uniformImage(h, w, 0.0);
  for (int x = splitCol; x < w; ++x) {
    img.r.col(x).setOnes();
    img.g.col(x).setOnes();
    img.b.col(x).setOnes();
  }
  return img;
}

mgsp::RgbImage smoothIcon(int n) {
  mgsp::RgbImage img;
  img.r.resize(n, n);
  img.g.resize(n, n);
  img.b.resize(n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double t = double(x + y) / double(2 * n - 2);
      img.r(y, x) = 0.2 + 0.6 * t;
      img.g(y, x) = 0.3 + 0.4 * t;
      img.b(y, x) = 0.8 - 0.5 * t;
    }
  return img;
}

}  // namespace

TEST_CASE("cli: help succeeds, malformed invocations are parameter errors") {
  CHECK(runCli("--help") == 0);
  CHECK(runCli("compress --help") == 0);
  CHECK(runCli("") == 3);
  CHECK(runCli("frobnicate") == 3);
  CHECK(runCli("edges --no-such-flag 1") == 3);
}

TEST_CASE("cli: spectra-dump emits verifiable spectra and a valid manifest") {
  TempDir dir;
  mgsp::writeTensorFile(dir.file("cycle.mlg4"), mgsp::testing::fourCycleAdjacency());

  const std::string out1 = dir.file("s1");
  REQUIRE(runCli("spectra-dump --in " + dir.file("cycle.mlg4") + " --out " + out1) == 0);

  // The two-layer/two-entity cycle has flattened spectrum {2, 0, 0, -2}.
  const auto ev = spectraBlock(out1 + "/spectra.csv", "eigenvalues");
  REQUIRE(ev.size() == 1);
  REQUIRE(ev[0].size() == 4);
  std::vector<double> values = ev[0];
  std::sort(values.begin(), values.end());
  const double want[4] = {-2.0, 0.0, 0.0, 2.0};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(values[i] - want[i]) <= 1e-9);
  CHECK(spectraBlock(out1 + "/spectra.csv", "layer_basis").size() == 2);
  CHECK(spectraBlock(out1 + "/spectra.csv", "entity_basis").size() == 2);
  CHECK(spectraBlock(out1 + "/spectra.csv", "cp_residual")[0][0] >= 0.0);

  const nlohmann::json manifest = mgsp::readJsonFile(out1 + "/manifest.json");
  const nlohmann::json schema = mgsp::readJsonFile(
      std::string(MGSP_SOURCE_DIR) + "/schemas/manifest.schema.json");
  CHECK(mgsp::validateAgainstSchema(manifest, schema).empty());
  CHECK(manifest.at("command") == "spectra-dump");
  CHECK(manifest.at("seed").get<std::uint64_t>() == 42);
  CHECK(manifest.at("orthonormality").get<double>() <= 1e-9);

  // Re-running the identical command reproduces every byte.
  const std::string out2 = dir.file("s2");
  REQUIRE(runCli("spectra-dump --in " + dir.file("cycle.mlg4") + " --out " + out2) == 0);
  CHECK(readFileBytes(out1 + "/spectra.csv") == readFileBytes(out2 + "/spectra.csv"));
  CHECK(readFileBytes(out1 + "/manifest.json") == readFileBytes(out2 + "/manifest.json"));

  // The same graph supplied as an edge list yields the same spectra.
  mgsp::writeEdgeList(dir.file("cycle.edges"),
                      mgsp::MultilayerGraph<double>::adjacency(mgsp::testing::fourCycleAdjacency()));
  const std::string out3 = dir.file("s3");
  REQUIRE(runCli("spectra-dump --in " + dir.file("cycle.edges") + " --out " + out3) == 0);
  CHECK(readFileBytes(out1 + "/spectra.csv") == readFileBytes(out3 + "/spectra.csv"));
}

TEST_CASE("cli: spectra-dump invalid inputs map to the documented exit codes") {
  TempDir dir;
  CHECK(runCli("spectra-dump --in " + dir.file("missing.mlg4") + " --out " + dir.file("o")) == 2);

  mgsp::Tensor4d lopsided(2, 2);
  lopsided(0, 0, 1, 0) = 1.0;  // no mirrored entry
  mgsp::writeTensorFile(dir.file("lopsided.mlg4"), lopsided);
  CHECK(runCli("spectra-dump --in " + dir.file("lopsided.mlg4") + " --out " + dir.file("a")) == 4);

  mgsp::writeTensorFile(dir.file("cycle.mlg4"), mgsp::testing::fourCycleAdjacency());
  CHECK(runCli("spectra-dump --in " + dir.file("cycle.mlg4") + " --rep hessian --out " +
               dir.file("r")) == 3);
}

TEST_CASE("cli: compress writes curves, payloads and recovered images") {
  TempDir dir;
  mgsp::savePpm(dir.file("icon.ppm"), smoothIcon(8));

  const std::string cmd = "compress --in " + dir.file("icon.ppm") +
                          " --methods mln-hosvd,gft --fractions 1.0,0.5 --out ";
  const std::string out1 = dir.file("c1");
  REQUIRE(runCli(cmd + out1) == 0);

  const auto lines = readLines(out1 + "/curves.csv");
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "fraction,method,mse,psnr");
  int perfectRows = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = splitCsvLine(lines[i]);
    REQUIRE(cells.size() == 4);
    if (std::stod(cells[0]) == 1.0) {
      CHECK(std::stod(cells[2]) <= 1e-12);  // full-rate rows reconstruct exactly
      ++perfectRows;
    }
  }
  CHECK(perfectRows == 2);

  CHECK(fs::exists(out1 + "/recovered-mln-hosvd-f0p5.png"));
  CHECK(fs::exists(out1 + "/recovered-gft-f1.png"));
  CHECK(fs::exists(out1 + "/payload-mln-hosvd-f0p5.mgsc"));
  CHECK(!fs::exists(out1 + "/payload-gft-f0p5.mgsc"));  // GFT keeps no multilayer payload

  const nlohmann::json manifest = mgsp::readJsonFile(out1 + "/manifest.json");
  const nlohmann::json schema = mgsp::readJsonFile(
      std::string(MGSP_SOURCE_DIR) + "/schemas/manifest.schema.json");
  CHECK(mgsp::validateAgainstSchema(manifest, schema).empty());

  const std::string out2 = dir.file("c2");
  REQUIRE(runCli(cmd + out2) == 0);
  CHECK(readFileBytes(out1 + "/curves.csv") == readFileBytes(out2 + "/curves.csv"));
  CHECK(readFileBytes(out1 + "/manifest.json") == readFileBytes(out2 + "/manifest.json"));
  CHECK(readFileBytes(out1 + "/payload-mln-hosvd-f0p5.mgsc") ==
        readFileBytes(out2 + "/payload-mln-hosvd-f0p5.mgsc"));
  CHECK(readFileBytes(out1 + "/recovered-mln-hosvd-f0p5.png") ==
        readFileBytes(out2 + "/recovered-mln-hosvd-f0p5.png"));

  const std::string out3 = dir.file("c3");
  REQUIRE(runCli("compress --in " + dir.file("icon.ppm") +
                 " --methods gft2 --fractions 0.5 --no-images --out " + out3) == 0);
  CHECK(!fs::exists(out3 + "/recovered-gft2-f0p5.png"));
  CHECK(fs::exists(out3 + "/payload-gft2-f0p5.mgsc"));

  CHECK(runCli("compress --in " + dir.file("icon.ppm") + " --fractions 1.5 --out " +
               dir.file("x1")) == 3);
  CHECK(runCli("compress --in " + dir.file("icon.ppm") + " --methods dct --out " +
               dir.file("x2")) == 3);
  CHECK(runCli("compress --in " + dir.file("ghost.ppm") + " --out " + dir.file("x3")) == 2);
}

TEST_CASE("cli: edges panel localizes a vertical step and honors parameters") {
  TempDir dir;
  mgsp::savePpm(dir.file("step.ppm"), stepImage(12, 12, 6));

  const std::string out1 = dir.file("e1");
  REQUIRE(runCli("edges --in " + dir.file("step.ppm") +
                 " --threshold percentile:80 --kernel c2 --k 3 --out " + out1) == 0);

  for (const std::string name : {"mlg-c1", "mlg-c2", "gsp", "sobel", "prewitt"})
    CHECK(fs::exists(out1 + "/edges-" + name + ".png"));
  CHECK(fs::exists(out1 + "/difference-c2.csv"));

  const nlohmann::json manifest = mgsp::readJsonFile(out1 + "/manifest.json");
  CHECK(manifest.at("parameters").at("kernel") == "c2");
  CHECK(manifest.at("parameters").at("window") == 3);

  // Multilayer maps fire only next to the 5|6 step.
  for (const std::string name : {"mlg-c1", "mlg-c2"}) {
    const mgsp::RgbImage map = mgsp::loadRgbImage(out1 + "/edges-" + name + ".png");
    int flagged = 0;
    for (int y = 0; y < 12; ++y)
      for (int x = 0; x < 12; ++x)
        if (map.r(y, x) > 0.5) {
          ++flagged;
          CHECK(x >= 5);
          CHECK(x <= 6);
        }
    CHECK(flagged > 0);
  }

  // A constant image yields empty maps under the default policy.
  mgsp::savePpm(dir.file("flat.ppm"), uniformImage(12, 12, 0.5));
  const std::string out2 = dir.file("e2");
  REQUIRE(runCli("edges --in " + dir.file("flat.ppm") + " --out " + out2) == 0);
  for (const std::string name : {"mlg-c1", "mlg-c2", "gsp", "sobel", "prewitt"}) {
    const mgsp::RgbImage map = mgsp::loadRgbImage(out2 + "/edges-" + name + ".png");
    CHECK(map.r.maxCoeff() == 0.0);
  }

  CHECK(runCli("edges --in " + dir.file("step.ppm") + " --k 4 --out " + dir.file("x1")) == 3);
  CHECK(runCli("edges --in " + dir.file("step.ppm") + " --threshold fixed --out " +
               dir.file("x2")) == 3);
  mgsp::savePpm(dir.file("tiny.ppm"), uniformImage(2, 2, 0.5));
  CHECK(runCli("edges --in " + dir.file("tiny.ppm") + " --out " + dir.file("x3")) == 3);
}

TEST_CASE("cli: segment recovers a planted two-region cube and is reproducible") {
  TempDir dir;
  mgsp::ImageCube cube;
  const double left[4] = {0.2, 0.4, 0.6, 0.8};
  const double right[4] = {0.9, 0.6, 0.3, 0.1};
  for (int band = 0; band < 4; ++band) {
    Eigen::MatrixXd plane(16, 16);
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) plane(y, x) = x < 8 ? left[band] : right[band];
    cube.bands.push_back(plane);
  }
  mgsp::saveCubeCsv(dir.file("cube.csv"), cube);

  Eigen::MatrixXi truth(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) truth(y, x) = x < 8 ? 1 : 2;
  mgsp::saveLabelsCsv(dir.file("truth.csv"), truth);

  const std::string cmd = "segment --in " + dir.file("cube.csv") +
                          " --M 2 --N 16 --Q 2 --truth " + dir.file("truth.csv") + " --out ";
  const std::string out1 = dir.file("g1");
  REQUIRE(runCli(cmd + out1) == 0);

  const auto lines = readLines(out1 + "/accuracy.csv");
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "method,boundary_accuracy");
  CHECK(splitCsvLine(lines[1])[0] == "k-means");
  CHECK(splitCsvLine(lines[2])[0] == "GSP");
  CHECK(splitCsvLine(lines[3])[0] == "M-GSP");
  CHECK(std::stod(splitCsvLine(lines[3])[1]) >= 0.95);

  for (const std::string stem : {"mgsp", "gsp", "kmeans"}) {
    CHECK(fs::exists(out1 + "/labels-" + stem + ".png"));
    CHECK(fs::exists(out1 + "/labels-" + stem + ".csv"));
    CHECK(fs::exists(out1 + "/boundary-" + stem + ".png"));
  }

  const std::string out2 = dir.file("g2");
  REQUIRE(runCli(cmd + out2) == 0);
  for (const std::string f : {"accuracy.csv", "labels-mgsp.csv", "labels-gsp.csv",
                              "labels-kmeans.csv", "manifest.json", "labels-mgsp.png"})
    CHECK(readFileBytes(out1 + "/" + f) == readFileBytes(out2 + "/" + f));

  const std::string out3 = dir.file("g3");
  REQUIRE(runCli("segment --in " + dir.file("cube.csv") + " --M 2 --N 16 --Q 2 --out " +
                 out3) == 0);
  CHECK(!fs::exists(out3 + "/accuracy.csv"));

  CHECK(runCli("segment --in " + dir.file("cube.csv") + " --out " + dir.file("x1")) == 3);

  writeText(dir.file("broken.hdr"),
            "ENVI\nlines = 4\nbands = 2\ninterleave = bsq\ndata type = 5\nbyte order = 0\n");
  CHECK(runCli("segment --in " + dir.file("broken.hdr") + " --Q 2 --out " + dir.file("x2")) == 2);
}

TEST_CASE("cli: seed comes from --seed, then MLG_SEED, then the default") {
  TempDir dir;
  mgsp::writeTensorFile(dir.file("cycle.mlg4"), mgsp::testing::fourCycleAdjacency());
  const std::string base = "spectra-dump --in " + dir.file("cycle.mlg4") + " --out ";

  const std::string out1 = dir.file("v1");
  REQUIRE(runCli(base + out1, "MLG_SEED=43 ") == 0);
  CHECK(mgsp::readJsonFile(out1 + "/manifest.json").at("seed").get<std::uint64_t>() == 43);

  const std::string out2 = dir.file("v2");
  REQUIRE(runCli(base + out2 + " --seed 7", "MLG_SEED=43 ") == 0);
  CHECK(mgsp::readJsonFile(out2 + "/manifest.json").at("seed").get<std::uint64_t>() == 7);

  CHECK(runCli(base + dir.file("v3"), "MLG_SEED=pi ") == 3);
}
