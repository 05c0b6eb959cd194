// SPDX-License-Identifier: Apache-2.0

// Batch front end: encode, decode, eval, analyze, rd-sweep, rc-calibrate,
// rc-encode, train. Machine-readable output (CSV / key=value) on stdout,
// diagnostics on stderr. Exit codes: 0 ok, 1 runtime error, 2 usage error,
// 3 corrupt data.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "olc/bitstream.h"
#include "olc/metrics.h"
#include "olc/ply_io.h"
#include "olc/rate_control.h"
#include "olc/trainer.h"

namespace {

using namespace olc;

// Settings that may come from a config file or OLC_* environment variables.
// Precedence: command-line flags > environment > config file.
struct BaseSettings {
  std::string modelDir;
  int jobs = 1;
};

BaseSettings loadBaseSettings(const std::string& configPath) {
  BaseSettings s;
  if (!configPath.empty()) {
    std::ifstream f(configPath);
    if (!f) throw UsageError(configPath + ": cannot open config file");
    std::string line;
    while (std::getline(f, line)) {
      if (line.empty() || line[0] == '#') continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(0, eq), value = line.substr(eq + 1);
      if (key == "model_dir") s.modelDir = value;
      else if (key == "jobs") s.jobs = std::atoi(value.c_str());
    }
  }
  if (const char* env = std::getenv("OLC_MODEL_DIR")) s.modelDir = env;
  if (const char* env = std::getenv("OLC_JOBS")) s.jobs = std::atoi(env);
  return s;
}

std::string resolveModelPath(const std::string& name, const BaseSettings& base) {
  namespace fs = std::filesystem;
  if (fs::exists(name) || base.modelDir.empty()) return name;
  fs::path candidate = fs::path(base.modelDir) / name;
  if (fs::exists(candidate)) return candidate.string();
  return name;
}

std::optional<ModelWeights> maybeLoadModel(const std::string& path, const BaseSettings& base) {
  if (path.empty()) return std::nullopt;
  return loadCheckpoint(resolveModelPath(path, base));
}

std::vector<uint8_t> readFileBytes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw OlcError(path + ": cannot open");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void writeFileBytes(const std::string& path, std::span<const uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw OlcError(path + ": cannot open for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw OlcError(path + ": write failed");
}

std::vector<int> parseIntList(const std::string& spec) {
  std::vector<int> out;
  std::istringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto dots = tok.find("..");
    if (dots != std::string::npos) {
      int lo = std::atoi(tok.substr(0, dots).c_str());
      int hi = std::atoi(tok.substr(dots + 2).c_str());
      for (int v = lo; v <= hi; ++v) out.push_back(v);
    } else if (!tok.empty()) {
      out.push_back(std::atoi(tok.c_str()));
    }
  }
  return out;
}

std::vector<double> parseDoubleList(const std::string& spec) {
  std::vector<double> out;
  std::istringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::strtod(tok.c_str(), nullptr));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

int cmdEncode(const std::string& input, const std::string& output, std::optional<int> depth,
              std::optional<double> qs, int steps, const std::string& modelPath, bool checkerboard,
              const BaseSettings& base) {
  if (depth.has_value() == qs.has_value())
    throw UsageError("encode: give exactly one of --depth or --qs");
  if (steps < 0 || steps > 8) throw UsageError("encode: --steps must be in [0,8]");

  auto model = maybeLoadModel(modelPath, base);
  CodecConfig cfg;
  cfg.depth = depth;
  cfg.qs = qs;
  cfg.steps = steps;
  cfg.checkerboard = checkerboard;
  cfg.model = model ? &*model : nullptr;

  PointCloud pc = loadPly(input);
  EncodeResult res = encode(pc, cfg);
  writeFileBytes(output, res.stream.bytes());
  std::cout << "bpp=" << fmt(res.bpp) << "\n";
  return 0;
}

int cmdDecode(const std::string& input, const std::string& output, const std::string& modelPath,
              bool binaryPly, const BaseSettings& base) {
  auto model = maybeLoadModel(modelPath, base);
  Bitstream bs = Bitstream::parse(readFileBytes(input));
  PointCloud pc = decode(bs, model ? &*model : nullptr);
  savePly(output, pc, binaryPly);
  std::cout << "points=" << pc.size() << "\n";
  return 0;
}

int cmdEval(const std::string& refPath, const std::string& testPath, double peak, int knn) {
  PointCloud ref = loadPly(refPath);
  PointCloud test = loadPly(testPath);
  if (peak <= 0.0) peak = ref.maxExtent();
  int degenerate = 0;
  double d1 = d1Psnr(ref, test, peak);
  double d2 = d2Psnr(ref, test, peak, knn, &degenerate);
  double cd = chamferDistance(ref, test);
  if (degenerate > 0)
    std::cerr << "warning: " << degenerate << " degenerate normal neighborhoods (D1 fallback)\n";
  std::cout << "d1_psnr,d2_psnr,chamfer\n" << fmt(d1) << "," << fmt(d2) << "," << fmt(cd) << "\n";
  return 0;
}

int cmdAnalyze(const std::string& input, const std::string& qsSpec, const std::string& output) {
  PointCloud pc = loadPly(input);
  std::vector<double> qsValues = parseDoubleList(qsSpec);
  if (qsValues.empty()) throw UsageError("analyze: --qs list is empty");
  std::vector<double> ratios = remainingRatio(pc, qsValues);

  std::ostringstream csv;
  csv << "qs,remaining_ratio\n";
  for (size_t i = 0; i < qsValues.size(); ++i)
    csv << fmt(qsValues[i]) << "," << fmt(ratios[i]) << "\n";
  if (output.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream f(output);
    if (!f) throw OlcError(output + ": cannot open for writing");
    f << csv.str();
    std::cout << "rows=" << qsValues.size() << "\n";
  }
  return 0;
}

int cmdRdSweep(const std::string& input, int depth, const std::string& stepsSpec,
               const std::string& modelPath, bool checkerboard, const std::string& output,
               const std::string& gnuplotPath, const BaseSettings& base) {
  auto model = maybeLoadModel(modelPath, base);
  PointCloud pc = loadPly(input);
  std::vector<int> sValues = parseIntList(stepsSpec);
  if (sValues.empty()) throw UsageError("rd-sweep: --steps list is empty");
  for (int s : sValues)
    if (s < 0 || s > 8) throw UsageError("rd-sweep: steps must be in [0,8]");

  auto rows = rdSweep(pc, depth, model ? &*model : nullptr, checkerboard, sValues);
  std::vector<RdPoint> points;
  for (const auto& r : rows)
    points.push_back({"s" + std::to_string(r.steps), r.bpp, r.d1Psnr, r.d2Psnr, r.chamfer});
  writeRdCsv(output, points);
  std::cout << "rows=" << points.size() << "\n";

  if (!gnuplotPath.empty()) {
    std::ofstream g(gnuplotPath);
    if (!g) throw OlcError(gnuplotPath + ": cannot open for writing");
    g << "set datafile separator ','\n"
      << "set xlabel 'bpp'\nset ylabel 'D1 PSNR (dB)'\nset key left\n"
      << "plot '" << output << "' every ::1 using 2:3 with linespoints title 'D1'\n";
  }
  return 0;
}

int cmdRcCalibrate(const std::vector<std::string>& inputs, const std::string& depthsSpec,
                   const std::string& modelPath, const std::string& output, bool perCloud,
                   int jobs, const BaseSettings& base) {
  auto model = maybeLoadModel(modelPath, base);
  std::vector<int> depths = parseIntList(depthsSpec);
  if (depths.size() < 2) throw UsageError("rc-calibrate: --depths needs a contiguous range");
  for (size_t i = 1; i < depths.size(); ++i)
    if (depths[i] != depths[i - 1] + 1) throw UsageError("rc-calibrate: depths must be contiguous");

  std::vector<PointCloud> dataset;
  for (const auto& path : inputs) dataset.push_back(loadPly(path));

  if (perCloud) {
    // one anchor table per input, suffixed before the extension
    for (size_t i = 0; i < dataset.size(); ++i) {
      RateAnchorTable table = calibrate({dataset[i]}, model ? &*model : nullptr, depths.front(),
                                        depths.back(), jobs);
      table.dataset = inputs[i];
      std::filesystem::path p(output);
      std::filesystem::path out = p.parent_path()
        / (p.stem().string() + ".cloud" + std::to_string(i) + p.extension().string());
      writeAnchorCsv(out.string(), table);
    }
    std::cout << "tables=" << dataset.size() << "\n";
    return 0;
  }

  RateAnchorTable table =
    calibrate(dataset, model ? &*model : nullptr, depths.front(), depths.back(), jobs);
  table.dataset = inputs.size() == 1 ? inputs[0] : std::to_string(inputs.size()) + " clouds";
  writeAnchorCsv(output, table);
  std::cout << "anchors=" << table.anchors.size() << "\n";
  return 0;
}

int cmdRcEncode(const std::string& input, double targetBpp, const std::string& anchorsPath,
                const std::string& modelPath, const std::string& output,
                const BaseSettings& base) {
  auto model = maybeLoadModel(modelPath, base);
  RateAnchorTable table = readAnchorCsv(anchorsPath);
  PointCloud pc = loadPly(input);
  RcResult res = rcEncode(pc, targetBpp, table, model ? &*model : nullptr);
  if (!output.empty()) writeFileBytes(output, res.stream.bytes());
  std::cout << "achieved_bpp=" << fmt(res.achievedBpp) << "\n"
            << "bit_error=" << fmt(res.bitError) << "\n";
  return 0;
}

int cmdTrain(const std::vector<std::string>& inputs, const std::string& headName,
             const std::string& output, const std::string& initPath, int depth, double lr,
             int epochs, int window, uint64_t seed, int predictorSteps, int dim, int layers,
             int heads, int ancestors, const BaseSettings& base) {
  Head head;
  if (headName == "nonleaf") head = Head::NonLeaf;
  else if (headName == "leafbit") head = Head::LeafBit;
  else if (headName == "leafpredict") head = Head::LeafPredict;
  else throw UsageError("train: --head must be nonleaf, leafbit or leafpredict");

  ModelWeights weights = [&] {
    if (!initPath.empty()) return loadCheckpoint(resolveModelPath(initPath, base));
    ModelConfig cfg;
    cfg.dim = dim;
    cfg.layers = layers;
    cfg.heads = heads;
    cfg.ancestorLevels = ancestors;
    return ModelWeights(cfg, seed);
  }();

  std::vector<Octree> dataset;
  for (const auto& path : inputs) {
    PointCloud pc = loadPly(path);
    dataset.push_back(buildOctree(quantize(pc, computeQs(pc.maxExtent(), depth))));
  }

  TrainHyper hyper;
  hyper.lr = lr;
  hyper.epochs = epochs;
  hyper.window = window > 0 ? window : weights.config().coderWindow;
  hyper.seed = seed;
  hyper.predictorSteps = predictorSteps;

  std::vector<EpochLog> log;
  weights = train(std::move(weights), dataset, head, hyper, &log);
  saveCheckpoint(weights, output);
  for (const auto& e : log) std::cerr << "epoch " << e.epoch << " mean_loss " << e.meanLoss << "\n";
  std::cout << "checksum=" << std::hex << weights.checksum() << std::dec << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"octree point cloud geometry codec"};
  app.require_subcommand(1);

  std::string configPath;
  app.add_option("--config", configPath, "key=value settings file");

  // encode
  auto* enc = app.add_subcommand("encode", "compress a PLY point cloud");
  std::string encIn, encOut, encModel;
  int encDepth = -1, encSteps = 8;
  double encQs = 0.0;
  bool encCheckerboard = false;
  enc->add_option("--input", encIn)->required();
  enc->add_option("--output", encOut)->required();
  enc->add_option("--depth", encDepth);
  enc->add_option("--qs", encQs);
  enc->add_option("--steps", encSteps);
  enc->add_option("--model", encModel);
  enc->add_flag("--checkerboard", encCheckerboard);

  // decode
  auto* dec = app.add_subcommand("decode", "decompress to PLY");
  std::string decIn, decOut, decModel;
  bool decBinary = false;
  dec->add_option("--input", decIn)->required();
  dec->add_option("--output", decOut)->required();
  dec->add_option("--model", decModel);
  dec->add_flag("--binary", decBinary, "write binary PLY");

  // eval
  auto* ev = app.add_subcommand("eval", "distortion metrics between two PLY clouds");
  std::string evRef, evTest;
  double evPeak = 0.0;
  int evKnn = 8;
  ev->add_option("--ref", evRef)->required();
  ev->add_option("--test", evTest)->required();
  ev->add_option("--peak", evPeak, "PSNR peak (default: ref max extent)");
  ev->add_option("--knn", evKnn, "neighbors for normal estimation");

  // analyze
  auto* an = app.add_subcommand("analyze", "remaining-point ratio per quantization step");
  std::string anIn, anQs = "1.5,2,3", anOut;
  an->add_option("--input", anIn)->required();
  an->add_option("--qs", anQs, "comma-separated qs values");
  an->add_option("--output", anOut, "CSV path (default: stdout)");

  // rd-sweep
  auto* rd = app.add_subcommand("rd-sweep", "rate-distortion sweep over leaf lossless steps");
  std::string rdIn, rdSteps = "0..8", rdModel, rdOut, rdGnuplot;
  int rdDepth = 8;
  bool rdCheckerboard = false;
  rd->add_option("--input", rdIn)->required();
  rd->add_option("--depth", rdDepth);
  rd->add_option("--steps", rdSteps, "list or range, e.g. 0,2,4 or 0..8");
  rd->add_option("--model", rdModel);
  rd->add_flag("--checkerboard", rdCheckerboard);
  rd->add_option("--output", rdOut)->required();
  rd->add_option("--gnuplot", rdGnuplot, "also write a gnuplot script");

  // rc-calibrate
  auto* rcc = app.add_subcommand("rc-calibrate", "build a rate anchor table");
  std::vector<std::string> rccIn;
  std::string rccDepths, rccModel, rccOut;
  bool rccPerCloud = false;
  int rccJobs = 0;
  rcc->add_option("--input", rccIn)->required()->expected(-1);
  rcc->add_option("--depths", rccDepths, "contiguous range, e.g. 7..9")->required();
  rcc->add_option("--model", rccModel);
  rcc->add_option("--output", rccOut)->required();
  rcc->add_flag("--per-cloud", rccPerCloud, "one anchor table per input cloud");
  rcc->add_option("--jobs", rccJobs);

  // rc-encode
  auto* rce = app.add_subcommand("rc-encode", "encode at a target bitrate");
  std::string rceIn, rceAnchors, rceModel, rceOut;
  double rceTarget = 0.0;
  rce->add_option("--input", rceIn)->required();
  rce->add_option("--target-bpp", rceTarget)->required();
  rce->add_option("--anchors", rceAnchors)->required();
  rce->add_option("--model", rceModel);
  rce->add_option("--output", rceOut);

  // train
  auto* tr = app.add_subcommand("train", "train one context-model head");
  std::vector<std::string> trIn;
  std::string trHead, trOut, trInit;
  int trDepth = 8, trEpochs = 10, trWindow = 0, trPredictorSteps = -1;
  int trDim = 128, trLayers = 4, trHeads = 4, trAncestors = 4;
  double trLr = 2e-4;
  uint64_t trSeed = 1;
  tr->add_option("--input", trIn)->required()->expected(-1);
  tr->add_option("--head", trHead)->required();
  tr->add_option("--output", trOut)->required();
  tr->add_option("--init", trInit, "continue from an existing checkpoint");
  tr->add_option("--depth", trDepth, "octree depth for training clouds");
  tr->add_option("--lr", trLr);
  tr->add_option("--epochs", trEpochs);
  tr->add_option("--window", trWindow);
  tr->add_option("--seed", trSeed);
  tr->add_option("--steps", trPredictorSteps, "fixed s for the predictor loss (-1: random)");
  tr->add_option("--dim", trDim);
  tr->add_option("--layers", trLayers);
  tr->add_option("--heads", trHeads);
  tr->add_option("--ancestors", trAncestors);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    BaseSettings base = loadBaseSettings(configPath);
    if (rccJobs > 0) base.jobs = rccJobs;

    if (*enc)
      return cmdEncode(encIn, encOut,
                       enc->count("--depth") ? std::optional<int>(encDepth) : std::nullopt,
                       enc->count("--qs") ? std::optional<double>(encQs) : std::nullopt, encSteps,
                       encModel, encCheckerboard, base);
    if (*dec) return cmdDecode(decIn, decOut, decModel, decBinary, base);
    if (*ev) return cmdEval(evRef, evTest, evPeak, evKnn);
    if (*an) return cmdAnalyze(anIn, anQs, anOut);
    if (*rd)
      return cmdRdSweep(rdIn, rdDepth, rdSteps, rdModel, rdCheckerboard, rdOut, rdGnuplot, base);
    if (*rcc) return cmdRcCalibrate(rccIn, rccDepths, rccModel, rccOut, rccPerCloud, base.jobs, base);
    if (*rce) return cmdRcEncode(rceIn, rceTarget, rceAnchors, rceModel, rceOut, base);
    if (*tr)
      return cmdTrain(trIn, trHead, trOut, trInit, trDepth, trLr, trEpochs, trWindow, trSeed,
                      trPredictorSteps, trDim, trLayers, trHeads, trAncestors, base);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CorruptionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
