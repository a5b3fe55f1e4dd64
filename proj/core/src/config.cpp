#include "otvm/config.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace otvm {

const char* stage_name(StageId s) {
  switch (s) {
    case StageId::k1a: return "1a";
    case StageId::k1b: return "1b";
    case StageId::k2: return "2";
    case StageId::k3: return "3";
    case StageId::k4: return "4";
  }
  return "?";
}

bool parse_stage(const std::string& s, StageId& out) {
  if (s == "1a") out = StageId::k1a;
  else if (s == "1b") out = StageId::k1b;
  else if (s == "2") out = StageId::k2;
  else if (s == "3") out = StageId::k3;
  else if (s == "4") out = StageId::k4;
  else return false;
  return true;
}

Config Config::preset(const std::string& name) {
  Config c;
  if (name == "paper") {
    c.model.preset = "paper";
    c.model.ck = 128;
    c.model.cv = 512;
    c.model.ws = true;
    c.model.gn_groups = 32;
    c.model.tri_stages = {64, 256, 512, 1024};
    c.model.tri_blocks = {3, 4, 6};
    c.model.tri_bottleneck = true;
    c.model.tri_stem_k = 7;
    c.model.tri_stem_pool = true;
    c.model.tri_dec_ch = 256;
    c.model.alpha_stages = {64, 256, 512, 1024, 2048};
    c.model.alpha_blocks = {3, 4, 6, 3};
    c.model.alpha_bottleneck = true;
    c.model.alpha_stem_k = 7;
    c.model.alpha_stem_pool = true;
    c.model.ppm_ch = 256;
    c.model.alpha_dec = {256, 64, 32};
    c.model.refine_ch = 32;
    c.train.lr = 1e-5;
    c.train.stage_iters = {100000, 400000, 50000, 50000, 80000};
    c.train.stage_batch = {4, 4, 4, 4, 4};
    c.sim.train_size = 320;
    c.sim.crop_sizes = {320, 480, 640};
  } else if (name == "toy") {
    c.model.preset = "toy";
    // ck/cv and the stage widths above are already the toy defaults
    c.train.lr = 3e-4;
    c.train.stage_iters = {2000, 4000, 1000, 1000, 2000};
    c.train.stage_batch = {2, 1, 1, 1, 3};
    c.sim.train_size = 64;
    c.sim.crop_sizes = {64, 96, 128};
    c.sim.max_blur = 5;
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return c;
}

namespace {

struct RawConfig {
  // section -> key -> raw value text
  std::map<std::string, std::map<std::string, std::string>> kv;
};

std::string strip(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

RawConfig parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  RawConfig raw;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = strip(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad section");
      section = strip(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = strip(line.substr(0, eq));
    std::string val = strip(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty key or value");
    raw.kv[section][key] = val;
  }
  return raw;
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

bool to_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw std::runtime_error("expected true/false, got " + s);
}

std::vector<int> to_int_list(const std::string& s) {
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    throw std::runtime_error("expected [a, b, ...], got " + s);
  std::vector<int> out;
  std::stringstream ss(s.substr(1, s.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = strip(item);
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

void apply_kv(Config& c, const std::string& sec, const std::string& key,
              const std::string& val) {
  auto num = [&] { return std::stod(val); };
  auto inum = [&] { return std::stoi(val); };
  if (sec == "preset") {
    if (key == "name") return;  // consumed before overrides
  } else if (sec == "model") {
    auto& m = c.model;
    if (key == "ck") { m.ck = inum(); return; }
    if (key == "cv") { m.cv = inum(); return; }
    if (key == "ws") { m.ws = to_bool(val); return; }
    if (key == "gn_groups") { m.gn_groups = inum(); return; }
    if (key == "tri_stages") { m.tri_stages = to_int_list(val); return; }
    if (key == "tri_blocks") { m.tri_blocks = to_int_list(val); return; }
    if (key == "tri_dec_ch") { m.tri_dec_ch = inum(); return; }
    if (key == "alpha_stages") { m.alpha_stages = to_int_list(val); return; }
    if (key == "alpha_blocks") { m.alpha_blocks = to_int_list(val); return; }
    if (key == "ppm_ch") { m.ppm_ch = inum(); return; }
    if (key == "alpha_dec") { m.alpha_dec = to_int_list(val); return; }
    if (key == "refine_ch") { m.refine_ch = inum(); return; }
  } else if (sec == "train") {
    auto& t = c.train;
    if (key == "lr") { t.lr = num(); return; }
    if (key == "lr_drop") { t.lr_drop = num(); return; }
    if (key == "clip_norm") { t.clip_norm = num(); return; }
    if (key == "freeze_norm") { t.freeze_norm = to_bool(val); return; }
    if (key == "seed") { t.seed = (uint64_t)std::stoull(val); return; }
    if (key == "precision") {
      t.precision = unquote(val);
      if (t.precision != "f32" && t.precision != "f64")
        throw std::runtime_error("precision must be f32 or f64");
      return;
    }
    if (key == "stage_iters") {
      auto v = to_int_list(val);
      if (v.size() != 5) throw std::runtime_error("stage_iters wants 5 entries");
      for (int i = 0; i < 5; ++i) t.stage_iters[(size_t)i] = v[(size_t)i];
      return;
    }
    if (key == "stage_batch") {
      auto v = to_int_list(val);
      if (v.size() != 5) throw std::runtime_error("stage_batch wants 5 entries");
      for (int i = 0; i < 5; ++i) t.stage_batch[(size_t)i] = v[(size_t)i];
      return;
    }
    if (key == "log_every") { t.log_every = inum(); return; }
  } else if (sec == "sim") {
    auto& s = c.sim;
    if (key == "frames") { s.frames = inum(); return; }
    if (key == "train_size") { s.train_size = inum(); return; }
    if (key == "crop_sizes") { s.crop_sizes = to_int_list(val); return; }
    if (key == "motion") { s.motion = to_bool(val); return; }
    if (key == "augment") { s.augment = to_bool(val); return; }
    if (key == "allow_flip") { s.allow_flip = to_bool(val); return; }
    if (key == "trimap_kmin") { s.trimap_kmin = inum(); return; }
    if (key == "trimap_kmax") { s.trimap_kmax = inum(); return; }
    if (key == "p_hist") { s.p_hist = num(); return; }
    if (key == "p_blur") { s.p_blur = num(); return; }
    if (key == "p_noise") { s.p_noise = num(); return; }
    if (key == "p_jpeg") { s.p_jpeg = num(); return; }
    if (key == "max_blur") { s.max_blur = inum(); return; }
    if (key == "max_noise_sigma") { s.max_noise_sigma = num(); return; }
  } else if (sec == "eval") {
    auto& e = c.eval;
    if (key == "narrow") { e.narrow = inum(); return; }
    if (key == "medium") { e.medium = inum(); return; }
    if (key == "wide") { e.wide = inum(); return; }
    if (key == "precision_dilate") { e.precision_dilate = inum(); return; }
  } else if (sec == "infer") {
    auto& i = c.infer;
    if (key == "mem_interval") { i.mem_interval = inum(); return; }
    if (key == "mem_intermediate") { i.mem_intermediate = inum(); return; }
    if (key == "save_fgbg") { i.save_fgbg = to_bool(val); return; }
    if (key == "png16") { i.png16 = to_bool(val); return; }
  }
  throw std::runtime_error("unknown config key [" + sec + "] " + key);
}

}  // namespace

Config Config::load(const std::string& path) {
  RawConfig raw = parse_file(path);
  std::string name = "toy";
  auto ps = raw.kv.find("preset");
  if (ps != raw.kv.end()) {
    auto it = ps->second.find("name");
    if (it != ps->second.end()) name = unquote(it->second);
  }
  Config c = Config::preset(name);
  for (const auto& [sec, kvs] : raw.kv)
    for (const auto& [k, v] : kvs) apply_kv(c, sec, k, v);
  return c;
}

}  // namespace otvm
