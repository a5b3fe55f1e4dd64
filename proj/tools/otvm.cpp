#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include "json.hpp"

#include "otvm/checkpoint.hpp"
#include "otvm/clipsim.hpp"
#include "otvm/config.hpp"
#include "otvm/engine.hpp"
#include "otvm/errors.hpp"
#include "otvm/image_io.hpp"
#include "otvm/metrics.hpp"
#include "otvm/model.hpp"
#include "otvm/trainer.hpp"

namespace fs = std::filesystem;
using namespace otvm;

namespace {

struct CommonOpts {
  std::string preset = "toy";
  std::string config_path;
  Config resolve() const {
    return config_path.empty() ? Config::preset(preset) : Config::load(config_path);
  }
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  auto* p = cmd->add_option("--preset", c.preset, "built-in configuration (toy|paper)")
                ->check(CLI::IsMember({"toy", "paper"}));
  cmd->add_option("--config", c.config_path, "configuration file")->excludes(p);
}

std::string clip_dir(const std::string& root, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "clip_%03d", i);
  return root + "/" + buf;
}

int cmd_datagen(const CommonOpts& common, const std::string& out, int clips, int frames,
                int size, uint64_t seed, bool no_motion, bool no_augment) {
  Config cfg = common.resolve();
  if (frames > 0) cfg.sim.frames = frames;
  if (size > 0) cfg.sim.train_size = size;
  if (no_motion) cfg.sim.motion = false;
  if (no_augment) cfg.sim.augment = false;

  int src_size = 0;
  for (int c : cfg.sim.crop_sizes) src_size = std::max(src_size, c);
  src_size += 32;

  fs::create_directories(out);
  for (int i = 0; i < clips; ++i) {
    uint64_t s = core::splitmix64(seed ^ (uint64_t)(i + 1));
    clipsim::SourcePair src = clipsim::demo_foreground(src_size, s);
    core::ArrayD bg = clipsim::demo_background(src_size, s);
    clipsim::ClipSample clip = clipsim::simulate_clip(src, bg, cfg.sim, s);
    clipsim::save_clip(clip_dir(out, i), clip, s);
  }
  nlohmann::json j;
  j["clips"] = clips;
  j["frames"] = cfg.sim.frames;
  j["size"] = cfg.sim.train_size;
  j["seed"] = seed;
  j["preset"] = cfg.model.preset;
  std::ofstream(out + "/dataset.json") << j.dump(2) << "\n";
  std::cout << "wrote " << clips << " clips to " << out << "\n";
  return 0;
}

std::vector<clipsim::ClipSample> load_dataset(const std::string& dir) {
  std::ifstream in(dir + "/dataset.json");
  if (!in) throw UsageError("not a dataset directory (missing dataset.json): " + dir);
  nlohmann::json j;
  in >> j;
  int n = j.at("clips").get<int>();
  if (n <= 0) throw UsageError("dataset has no clips: " + dir);
  std::vector<clipsim::ClipSample> out;
  for (int i = 0; i < n; ++i) out.push_back(clipsim::load_clip(clip_dir(dir, i)));
  return out;
}

std::vector<StageId> parse_stages(const std::string& list) {
  std::vector<StageId> out;
  std::stringstream ss(list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    StageId s;
    if (!parse_stage(tok, s)) throw UsageError("unknown stage: " + tok);
    out.push_back(s);
  }
  if (out.empty()) throw UsageError("empty stage list");
  return out;
}

template <typename T>
int run_train(Config cfg, const std::string& data, const std::string& out,
              const std::vector<StageId>& stages, const std::string& init, int iters) {
  std::vector<clipsim::ClipSample> raw = load_dataset(data);
  std::vector<train::TrainClip<T>> dataset;
  for (const auto& c : raw) dataset.push_back(train::prepare_clip<T>(c));

  Model<T> model(cfg.model, cfg.train.seed);
  if (!init.empty()) {
    CheckpointMeta meta = load_checkpoint(init, model);
    std::cout << "initialized from " << init << " (stage " << meta.stage << ")\n";
  }

  fs::create_directories(out);
  std::ofstream log(out + "/train_log.jsonl");
  train::Trainer<T> tr(model, cfg);
  for (StageId s : stages) {
    std::cout << "stage " << stage_name(s) << ": "
              << (iters > 0 ? iters : cfg.train.stage_iters[(int)s]) << " iters\n";
    train::run_stage(tr, dataset, s, iters, &log);
    save_checkpoint(out + "/ckpt_stage" + stage_name(s) + ".bin", model, stage_name(s),
                    tr.iters_done());
  }
  StageId last = stages.back();
  save_checkpoint(out + "/model.bin", model, stage_name(last), tr.iters_done());
  std::cout << "saved " << out << "/model.bin\n";
  return 0;
}

int cmd_train(const CommonOpts& common, const std::string& data, const std::string& out,
              const std::string& stage_list, const std::string& init, int iters,
              uint64_t seed, bool has_seed) {
  Config cfg = common.resolve();
  if (has_seed) cfg.train.seed = seed;
  std::vector<StageId> stages = parse_stages(stage_list);
  if (cfg.train.precision == "f64")
    return run_train<double>(cfg, data, out, stages, init, iters);
  return run_train<float>(cfg, data, out, stages, init, iters);
}

std::vector<core::ArrayD> read_frames(const std::string& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::string n = e.path().filename().string();
    if (n.rfind("frame_", 0) == 0 && n.size() > 4 &&
        n.compare(n.size() - 4, 4, ".png") == 0)
      names.push_back(e.path().string());
  }
  if (names.empty()) throw UsageError("no frame_*.png files in " + dir);
  std::sort(names.begin(), names.end());
  std::vector<core::ArrayD> frames;
  for (const auto& n : names) {
    core::ArrayD f = core::read_png(n);
    if (f.dim(0) != 3) throw UsageError("frame is not RGB: " + n);
    frames.push_back(std::move(f));
  }
  return frames;
}

int cmd_infer(const std::string& ckpt, const std::string& frames_dir,
              std::string trimap_path, const std::string& out, bool fgbg, bool png16,
              bool f64) {
  CheckpointMeta meta = peek_checkpoint(ckpt);
  Config cfg = Config::preset(meta.preset);
  cfg.model = meta.model;
  cfg.infer.save_fgbg = fgbg;
  cfg.infer.png16 = png16;

  std::vector<core::ArrayD> frames = read_frames(frames_dir);
  if (trimap_path.empty()) trimap_path = frames_dir + "/trimap_000.png";
  core::ArrayD tri_gray = core::read_png(trimap_path);
  if (tri_gray.dim(0) != 1) throw UsageError("trimap must be grayscale: " + trimap_path);
  if (tri_gray.dim(1) != frames[0].dim(1) || tri_gray.dim(2) != frames[0].dim(2))
    throw UsageError("trimap size does not match the frames");
  core::ArrayD trimap0 = clipsim::gray_to_trimap(tri_gray);

  engine::SequenceResult res;
  if (f64) {
    Model<double> model(cfg.model, 0);
    load_checkpoint(ckpt, model);
    res = engine::run_sequence(model, frames, trimap0, cfg.infer, fgbg);
  } else {
    Model<float> model(cfg.model, 0);
    load_checkpoint(ckpt, model);
    res = engine::run_sequence(model, frames, trimap0, cfg.infer, fgbg);
  }
  engine::write_outputs(out, res, cfg.infer, meta.preset);
  std::cout << res.frames.size() << " frames in " << res.total_seconds << "s, peak rss "
            << res.peak_rss_kb << " kB\n";
  return 0;
}

std::vector<core::ArrayD> read_series(const std::string& dir, const char* base) {
  std::vector<core::ArrayD> out;
  for (int t = 0;; ++t) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s/%s_%03d.png", dir.c_str(), base, t);
    if (!fs::exists(buf)) break;
    out.push_back(core::read_png(buf));
  }
  return out;
}

int cmd_eval(const std::string& pred, const std::string& gt, const std::string& setting,
             const std::string& out_path) {
  Config cfg = Config::preset("toy");
  int kernel = setting == "narrow"   ? cfg.eval.narrow
               : setting == "wide"   ? cfg.eval.wide
                                     : cfg.eval.medium;

  std::vector<core::ArrayD> pa = read_series(pred, "alpha");
  std::vector<core::ArrayD> pt = read_series(pred, "trimap");
  std::vector<core::ArrayD> ga = read_series(gt, "alpha");
  if (pa.empty()) throw UsageError("no alpha_*.png files in " + pred);
  if (ga.size() != pa.size())
    throw UsageError("frame count mismatch between prediction and reference");

  int n = (int)pa.size();
  std::vector<core::ArrayD> unk_masks, full_masks;
  std::vector<core::ArrayT<uint8_t>> pred_unk, gt_unk;
  for (int t = 0; t < n; ++t) {
    core::ArrayD ref_tri = clipsim::make_trimap(ga[t], kernel);
    int h = ga[t].dim(1), w = ga[t].dim(2);
    core::ArrayD um({1, h, w});
    core::ArrayT<uint8_t> gu({h, w});
    for (int i = 0; i < h * w; ++i) {
      double u = ref_tri.data[h * w + i];
      um.data[i] = u;
      gu.data[i] = u > 0.5 ? 1 : 0;
    }
    unk_masks.push_back(std::move(um));
    full_masks.push_back(core::ArrayD::full({1, h, w}, 1.0));
    gt_unk.push_back(std::move(gu));
    if (t < (int)pt.size()) {
      core::ArrayT<uint8_t> lab =
          clipsim::trimap_labels(clipsim::gray_to_trimap(pt[t]));
      core::ArrayT<uint8_t> pu({h, w});
      for (int i = 0; i < h * w; ++i) pu.data[i] = lab.data[i] == 1 ? 1 : 0;
      pred_unk.push_back(std::move(pu));
    }
  }

  metrics::SeqEval unk = metrics::evaluate_sequence(pa, ga, unk_masks, cfg.eval.scales);
  metrics::SeqEval full = metrics::evaluate_sequence(pa, ga, full_masks, cfg.eval.scales);
  metrics::TrimapQuality tq;
  bool have_tri = !pred_unk.empty();
  if (have_tri) {
    std::vector<core::ArrayT<uint8_t>> gt_sub(gt_unk.begin(),
                                              gt_unk.begin() + pred_unk.size());
    tq = metrics::trimap_quality(pred_unk, gt_sub, cfg.eval.precision_dilate);
  }

  nlohmann::json j;
  auto put = [&](const char* k, const metrics::SeqEval& e) {
    j[k] = {{"SSDA", e.ssda},   {"MSE", e.mse},     {"MAD", e.mad},
            {"SAD", e.sad},     {"Grad", e.grad},   {"Conn", e.conn},
            {"dtSSD", e.dtssd}, {"MESSDdt", e.messddt}};
  };
  put("unknown", unk);
  put("full", full);
  j["setting"] = setting;
  j["frames"] = n;
  if (have_tri) {
    j["Precision-T"] = tq.precision;
    j["Recall-T"] = tq.recall;
  }

  const char* cols[] = {"SSDA", "MSE", "MAD", "SAD", "Grad", "Conn", "dtSSD", "MESSDdt"};
  auto vals = [](const metrics::SeqEval& e) {
    return std::vector<double>{e.ssda, e.mse, e.mad, e.sad, e.grad, e.conn, e.dtssd,
                               e.messddt};
  };
  std::ostringstream csv;
  for (const char* c : cols) csv << c << ",";
  for (const char* c : cols) csv << c << "-V,";
  csv << "Precision-T,Recall-T\n";
  csv.setf(std::ios::fixed);
  csv.precision(6);
  for (double v : vals(unk)) csv << v << ",";
  for (double v : vals(full)) csv << v << ",";
  if (have_tri)
    csv << tq.precision << "," << tq.recall << "\n";
  else
    csv << ",\n";

  std::cout << csv.str();
  if (!out_path.empty()) {
    if (out_path.size() > 5 && out_path.compare(out_path.size() - 5, 5, ".json") == 0)
      std::ofstream(out_path) << j.dump(2) << "\n";
    else
      std::ofstream(out_path) << csv.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"one-trimap video matting"};
  app.require_subcommand(1);

  CommonOpts dg_common;
  std::string dg_out;
  int dg_clips = 8, dg_frames = 0, dg_size = 0;
  uint64_t dg_seed = 1;
  bool dg_no_motion = false, dg_no_augment = false;
  auto* dg = app.add_subcommand("datagen", "generate a synthetic training dataset");
  add_common(dg, dg_common);
  dg->add_option("--out", dg_out, "output directory")->required();
  dg->add_option("--clips", dg_clips, "number of clips");
  dg->add_option("--frames", dg_frames, "frames per clip (0 = preset)");
  dg->add_option("--size", dg_size, "training frame size (0 = preset)");
  dg->add_option("--seed", dg_seed, "dataset seed");
  dg->add_flag("--no-motion", dg_no_motion, "static pose for all frames");
  dg->add_flag("--no-augment", dg_no_augment, "disable photometric degradation");

  CommonOpts tr_common;
  std::string tr_data, tr_out, tr_stages = "1a,1b,2,3,4", tr_init;
  int tr_iters = 0;
  uint64_t tr_seed = 0;
  auto* tr = app.add_subcommand("train", "run the staged training schedule");
  add_common(tr, tr_common);
  tr->add_option("--data", tr_data, "dataset directory")->required();
  tr->add_option("--out", tr_out, "output directory")->required();
  tr->add_option("--stages", tr_stages, "comma-separated stage list");
  tr->add_option("--init", tr_init, "checkpoint to start from");
  tr->add_option("--iters", tr_iters, "override the per-stage iteration count");
  auto* tr_seed_opt = tr->add_option("--seed", tr_seed, "training seed");

  std::string in_ckpt, in_frames, in_trimap, in_out;
  bool in_fgbg = false, in_png16 = false, in_f64 = false;
  auto* inf = app.add_subcommand("infer", "matte a clip from a first-frame trimap");
  inf->add_option("--ckpt", in_ckpt, "model checkpoint")->required();
  inf->add_option("--frames", in_frames, "directory with frame_*.png")->required();
  inf->add_option("--trimap", in_trimap, "first-frame trimap (default: trimap_000.png)");
  inf->add_option("--out", in_out, "output directory")->required();
  inf->add_flag("--fgbg", in_fgbg, "also write fg/bg layer predictions");
  inf->add_flag("--png16", in_png16, "16-bit alpha output");
  inf->add_flag("--f64", in_f64, "run in double precision");

  std::string ev_pred, ev_gt, ev_setting = "medium", ev_out;
  auto* ev = app.add_subcommand("eval", "score predictions against ground truth");
  ev->add_option("--pred", ev_pred, "prediction directory")->required();
  ev->add_option("--gt", ev_gt, "reference clip directory")->required();
  ev->add_option("--setting", ev_setting, "unknown-band width")
      ->check(CLI::IsMember({"narrow", "medium", "wide"}));
  ev->add_option("--out", ev_out, "write report (.csv or .json)");

  try {
    app.parse(argc, argv);
    if (dg->parsed())
      return cmd_datagen(dg_common, dg_out, dg_clips, dg_frames, dg_size, dg_seed,
                         dg_no_motion, dg_no_augment);
    if (tr->parsed())
      return cmd_train(tr_common, tr_data, tr_out, tr_stages, tr_init, tr_iters, tr_seed,
                       tr_seed_opt->count() > 0);
    if (inf->parsed())
      return cmd_infer(in_ckpt, in_frames, in_trimap, in_out, in_fgbg, in_png16, in_f64);
    if (ev->parsed()) return cmd_eval(ev_pred, ev_gt, ev_setting, ev_out);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
