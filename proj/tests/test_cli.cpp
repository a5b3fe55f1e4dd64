#include "common.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <sys/wait.h>

#include "json.hpp"
#include "otvm/image_io.hpp"

namespace fs = std::filesystem;

TEST_SUITE_BEGIN("cli");

namespace {

fs::path scratch() {
  auto dir = fs::temp_directory_path() / "otvm_cli_test";
  fs::create_directories(dir);
  return dir;
}

// runs the installed binary through the shell; returns the exit code
int run(const std::string& args) {
  std::string cmd = std::string(OTVM_CLI_PATH) + " " + args + " > " +
                    (scratch() / "last_out.txt").string() + " 2>&1";
  int st = std::system(cmd.c_str());
  REQUIRE(st != -1);
  return WIFEXITED(st) ? WEXITSTATUS(st) : -2;
}

std::string last_output() {
  std::ifstream in(scratch() / "last_out.txt");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// relative path -> raw bytes, for whole-directory comparisons
std::map<std::string, std::string> slurp_dir(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    out[fs::relative(e.path(), root).string()] = ss.str();
  }
  return out;
}

int count_lines(const fs::path& p) {
  std::ifstream in(p);
  int n = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++n;
  return n;
}

}  // namespace

TEST_CASE("help succeeds and bad usage exits 2") {
  CHECK(run("--help") == 0);
  for (const char* sub : {"datagen", "train", "infer", "eval"})
    CHECK(run(std::string(sub) + " --help") == 0);

  CHECK(run("") == 2);                      // a subcommand is required
  CHECK(run("frobnicate") == 2);            // unknown subcommand
  CHECK(run("datagen") == 2);               // missing --out
  CHECK(run("datagen --out x --bogus") == 2);
  CHECK(run("eval --pred x --gt y --setting huge") == 2);
  CHECK(run("infer --ckpt /nonexistent.bin --frames x --out y") == 2);
  CHECK(run("train --data /nonexistent --out " + (scratch() / "t0").string()) == 2);
  CHECK(run("datagen --out " + (scratch() / "d0").string() + " --preset nope") == 2);
}

TEST_CASE("datagen is reproducible from its seed") {
  fs::path a = scratch() / "data_a", b = scratch() / "data_b", c = scratch() / "data_c";
  for (const auto& d : {a, b, c}) fs::remove_all(d);
  std::string base = "datagen --clips 2 --frames 2 --size 48 ";
  REQUIRE(run(base + "--seed 7 --out " + a.string()) == 0);
  REQUIRE(run(base + "--seed 7 --out " + b.string()) == 0);
  REQUIRE(run(base + "--seed 8 --out " + c.string()) == 0);

  auto da = slurp_dir(a), db = slurp_dir(b), dc = slurp_dir(c);
  CHECK(da.size() > 0);
  CHECK(da == db);  // byte-identical reruns
  CHECK(da != dc);  // the seed actually matters

  // layout: a manifest plus one directory per clip with the five image series
  CHECK(da.count("dataset.json") == 1);
  for (const char* f : {"frame_000.png", "frame_001.png", "alpha_000.png",
                        "trimap_000.png", "fg_000.png", "bg_000.png"}) {
    CHECK(da.count(std::string("clip_000/") + f) == 1);
    CHECK(da.count(std::string("clip_001/") + f) == 1);
  }
}

TEST_CASE("datagen, train, infer and eval chain end to end") {
  fs::path data = scratch() / "pipe_data", train = scratch() / "pipe_train",
           pred = scratch() / "pipe_pred";
  for (const auto& d : {data, train, pred}) fs::remove_all(d);

  REQUIRE(run("datagen --clips 2 --frames 3 --size 48 --seed 3 --out " + data.string()) ==
          0);
  REQUIRE(run("train --data " + data.string() + " --out " + train.string() +
              " --stages 1b --iters 2 --seed 5") == 0);
  CHECK(fs::exists(train / "model.bin"));
  CHECK(fs::exists(train / "ckpt_stage1b.bin"));
  CHECK(count_lines(train / "train_log.jsonl") == 2);
  {
    std::ifstream in(train / "train_log.jsonl");
    std::string line;
    REQUIRE(std::getline(in, line));
    auto j = nlohmann::json::parse(line);
    CHECK(j.at("stage") == "1b");
    CHECK(j.at("iter") == 0);
    CHECK(std::isfinite(j.at("loss").get<double>()));
  }

  // the saved clip directory doubles as an inference input: frame_*.png plus
  // the first-frame trimap
  REQUIRE(run("infer --ckpt " + (train / "model.bin").string() + " --frames " +
              (data / "clip_000").string() + " --out " + pred.string()) == 0);
  for (const char* f : {"alpha_000.png", "alpha_001.png", "alpha_002.png",
                        "trimap_000.png", "trimap_002.png"})
    CHECK(fs::exists(pred / f));
  CHECK(!fs::exists(pred / "fg_000.png"));  // layers only on request

  fs::path report = scratch() / "report.json";
  fs::remove(report);
  REQUIRE(run("eval --pred " + pred.string() + " --gt " + (data / "clip_000").string() +
              " --setting medium --out " + report.string()) == 0);
  std::string csv = last_output();
  CHECK(csv.find("SSDA") != std::string::npos);
  CHECK(csv.find("Precision-T") != std::string::npos);

  REQUIRE(fs::exists(report));
  std::ifstream in(report);
  nlohmann::json j;
  in >> j;
  CHECK(j.at("frames") == 3);
  CHECK(j.at("setting") == "medium");
  for (const char* k : {"SSDA", "MSE", "MAD", "SAD", "Grad", "Conn", "dtSSD", "MESSDdt"}) {
    CHECK(std::isfinite(j.at("unknown").at(k).get<double>()));
    CHECK(std::isfinite(j.at("full").at(k).get<double>()));
  }
  CHECK(j.at("Precision-T").get<double>() >= 0.0);
  CHECK(j.at("Precision-T").get<double>() <= 100.0);
  CHECK(j.at("Recall-T").get<double>() >= 0.0);
  CHECK(j.at("Recall-T").get<double>() <= 100.0);

  // an untrained toy model is still a valid matting engine: outputs decode as
  // plausible alpha (8-bit grayscale in range) for every frame
  otvm::core::ArrayD a0 = otvm::core::read_png((pred / "alpha_001.png").string());
  CHECK(a0.dim(0) == 1);
  CHECK(a0.dim(1) == 48);
  for (int64_t i = 0; i < a0.numel(); ++i) {
    CHECK(a0[i] >= 0.0);
    CHECK(a0[i] <= 1.0);
  }
}

TEST_CASE("training trajectories are reproducible across processes") {
  fs::path data = scratch() / "det_data", t1 = scratch() / "det_t1",
           t2 = scratch() / "det_t2";
  for (const auto& d : {data, t1, t2}) fs::remove_all(d);
  REQUIRE(run("datagen --clips 2 --frames 2 --size 48 --seed 11 --out " + data.string()) ==
          0);
  std::string args = " --data " + data.string() + " --stages 1a --iters 3 --seed 9";
  REQUIRE(run("train --out " + t1.string() + args) == 0);
  REQUIRE(run("train --out " + t2.string() + args) == 0);
  auto d1 = slurp_dir(t1), d2 = slurp_dir(t2);
  CHECK(d1.size() == d2.size());
  CHECK(d1 == d2);  // logs and checkpoints, byte for byte
}

TEST_SUITE_END();
