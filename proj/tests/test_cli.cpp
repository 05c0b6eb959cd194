// SPDX-License-Identifier: Apache-2.0

// Drives the installed binary end to end through a shell. OLC_CLI_PATH is
// injected by CMake.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "olc/ply_io.h"
#include "olc/rate_control.h"
#include "synthetic.h"

using namespace olc;

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int exitCode = -1;
  std::string output;
};

fs::path workDir() {
  fs::path dir = fs::temp_directory_path() / "olc_cli_test";
  fs::create_directories(dir);
  return dir;
}

CliResult runCli(const std::string& args) {
  const fs::path out = workDir() / "stdout.txt";
  std::ostringstream cmd;
  cmd << OLC_CLI_PATH << " " << args << " > " << out.string() << " 2> " << (workDir() / "stderr.txt").string();
  const int status = std::system(cmd.str().c_str());
  CliResult res;
  res.exitCode = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream f(out);
  res.output.assign((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return res;
}

std::string fixturePly() {
  static std::string path;
  if (path.empty()) {
    path = (workDir() / "fixture.ply").string();
    savePly(path, testdata::sphereShell(10.0, {16, 16, 16}));
  }
  return path;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("cli encode/decode/eval pipeline") {
  const fs::path bin = workDir() / "a.bin";
  const fs::path outPly = workDir() / "a_dec.ply";

  CliResult enc = runCli("encode --input " + fixturePly() + " --output " + bin.string() +
                         " --depth 6 --steps 8");
  CHECK(enc.exitCode == 0);
  CHECK(enc.output.find("bpp=") == 0);

  CliResult dec = runCli("decode --input " + bin.string() + " --output " + outPly.string());
  CHECK(dec.exitCode == 0);

  // the decoded cloud at s=8 is the quantized original: D1 against the
  // dequantized reference is infinite
  PointCloud ref = loadPly(fixturePly());
  PointCloud refQ = dequantize(quantize(ref, computeQs(ref.maxExtent(), 6)));
  const fs::path refPath = workDir() / "ref_q.ply";
  savePly(refPath.string(), refQ);

  CliResult ev = runCli("eval --ref " + refPath.string() + " --test " + outPly.string());
  CHECK(ev.exitCode == 0);
  CHECK(ev.output.find("d1_psnr,d2_psnr,chamfer") != std::string::npos);
  CHECK(ev.output.find("inf") != std::string::npos);
}

TEST_CASE("cli usage errors exit with 2") {
  CliResult both = runCli("encode --input x.ply --output y.bin --depth 6 --qs 0.5");
  CHECK(both.exitCode == 2);
  CliResult badSteps =
    runCli("encode --input " + fixturePly() + " --output /tmp/x.bin --depth 6 --steps 9");
  CHECK(badSteps.exitCode == 2);
  CliResult neither = runCli("encode --input " + fixturePly() + " --output /tmp/x.bin");
  CHECK(neither.exitCode == 2);
  CliResult missing = runCli("encode");
  CHECK(missing.exitCode == 2);
  CliResult noSub = runCli("");
  CHECK(noSub.exitCode == 2);
}

TEST_CASE("cli runtime and corruption exit codes") {
  CliResult noFile = runCli("decode --input /nonexistent.bin --output /tmp/x.ply");
  CHECK(noFile.exitCode == 1);

  const fs::path garbage = workDir() / "garbage.bin";
  std::ofstream(garbage) << "this is not a bitstream at all";
  CliResult bad = runCli("decode --input " + garbage.string() + " --output /tmp/x.ply");
  CHECK(bad.exitCode == 3);
}

TEST_CASE("cli encode is idempotent byte for byte") {
  const fs::path a = workDir() / "idem_a.bin";
  const fs::path b = workDir() / "idem_b.bin";
  CHECK(runCli("encode --input " + fixturePly() + " --output " + a.string() + " --depth 5").exitCode == 0);
  CHECK(runCli("encode --input " + fixturePly() + " --output " + b.string() + " --depth 5").exitCode == 0);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("cli analyze emits the qs,remaining_ratio schema") {
  CliResult res = runCli("analyze --input " + fixturePly() + " --qs 1.5,2,3");
  CHECK(res.exitCode == 0);
  CHECK(res.output.rfind("qs,remaining_ratio\n", 0) == 0);
  int lines = 0;
  for (char c : res.output)
    if (c == '\n') ++lines;
  CHECK(lines == 4);
}

TEST_CASE("cli rd-sweep writes an RD csv") {
  const fs::path csv = workDir() / "rd.csv";
  CliResult res = runCli("rd-sweep --input " + fixturePly() + " --depth 5 --steps 0,4,8 --output " +
                         csv.string());
  CHECK(res.exitCode == 0);
  std::ifstream f(csv);
  std::string header;
  std::getline(f, header);
  CHECK(header == "label,bpp,d1_psnr,d2_psnr,chamfer");
}

TEST_CASE("cli rate control calibrate + encode, out-of-range target fails with 1") {
  const fs::path lidar = workDir() / "lidar.ply";
  savePly(lidar.string(), testdata::lidarRings(10, 400, 7070));
  const fs::path anchors = workDir() / "anchors.csv";

  CliResult cal = runCli("rc-calibrate --input " + lidar.string() + " --depths 6..7 --output " +
                         anchors.string());
  CHECK(cal.exitCode == 0);

  RateAnchorTable table = readAnchorCsv(anchors.string());
  const double target = 0.5 * (table.anchors[0].bpp + table.anchors[1].bpp);
  std::ostringstream tstr;
  tstr << target;
  CliResult rc = runCli("rc-encode --input " + lidar.string() + " --target-bpp " + tstr.str() +
                        " --anchors " + anchors.string());
  CHECK(rc.exitCode == 0);
  CHECK(rc.output.find("achieved_bpp=") != std::string::npos);
  CHECK(rc.output.find("bit_error=") != std::string::npos);

  CliResult outOfRange = runCli("rc-encode --input " + lidar.string() +
                                " --target-bpp 10000 --anchors " + anchors.string());
  CHECK(outOfRange.exitCode == 1);

  CliResult per = runCli("rc-calibrate --input " + lidar.string() + " --depths 6..7 --per-cloud" +
                         " --output " + (workDir() / "per.csv").string());
  CHECK(per.exitCode == 0);
  CHECK(fs::exists(workDir() / "per.cloud0.csv"));
}

TEST_CASE("cli train writes a checkpoint the codec accepts") {
  const fs::path ckpt = workDir() / "toy.olcw";
  CliResult tr =
    runCli("train --input " + fixturePly() + " --head leafpredict --output " + ckpt.string() +
           " --depth 5 --epochs 1 --dim 8 --layers 1 --heads 2 --ancestors 2 --window 128");
  CHECK(tr.exitCode == 0);
  CHECK(tr.output.find("checksum=") == 0);

  const fs::path bin = workDir() / "learned.bin";
  CliResult enc = runCli("encode --input " + fixturePly() + " --output " + bin.string() +
                         " --depth 5 --steps 4 --model " + ckpt.string());
  CHECK(enc.exitCode == 0);
  CliResult dec = runCli("decode --input " + bin.string() + " --output " +
                         (workDir() / "learned.ply").string() + " --model " + ckpt.string());
  CHECK(dec.exitCode == 0);

  // wrong model -> corruption exit code
  const fs::path other = workDir() / "other.olcw";
  runCli("train --input " + fixturePly() + " --head leafpredict --output " + other.string() +
         " --depth 5 --epochs 1 --dim 8 --layers 1 --heads 2 --ancestors 2 --window 128 --seed 9");
  CliResult mismatch = runCli("decode --input " + bin.string() + " --output /tmp/x.ply --model " +
                              other.string());
  CHECK(mismatch.exitCode == 3);
}

TEST_CASE("cli model dir resolution via environment") {
  const fs::path ckpt = workDir() / "envmodel.olcw";
  runCli("train --input " + fixturePly() + " --head leafbit --output " + ckpt.string() +
         " --depth 4 --epochs 1 --dim 8 --layers 1 --heads 2 --ancestors 1 --window 128");
  const fs::path bin = workDir() / "envmodel.bin";
  std::ostringstream cmd;
  cmd << "OLC_MODEL_DIR=" << workDir().string() << " " << OLC_CLI_PATH << " encode --input "
      << fixturePly() << " --output " << bin.string()
      << " --depth 4 --model envmodel.olcw > /dev/null 2>&1";
  const int status = std::system(cmd.str().c_str());
  CHECK(WEXITSTATUS(status) == 0);
}
