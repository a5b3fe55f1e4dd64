#include "otvm/checkpoint.hpp"

#include <fstream>

#include "json.hpp"

namespace otvm {

using nlohmann::json;

namespace {

constexpr char kMagic[] = "OTVMCKPT1\n";
constexpr size_t kMagicLen = sizeof(kMagic) - 1;

json model_to_json(const ModelConfig& m) {
  json j;
  j["preset"] = m.preset;
  j["ck"] = m.ck;
  j["cv"] = m.cv;
  j["ws"] = m.ws;
  j["gn_groups"] = m.gn_groups;
  j["tri_stages"] = m.tri_stages;
  j["tri_blocks"] = m.tri_blocks;
  j["tri_bottleneck"] = m.tri_bottleneck;
  j["tri_stem_k"] = m.tri_stem_k;
  j["tri_stem_pool"] = m.tri_stem_pool;
  j["tri_dec_ch"] = m.tri_dec_ch;
  j["alpha_stages"] = m.alpha_stages;
  j["alpha_blocks"] = m.alpha_blocks;
  j["alpha_bottleneck"] = m.alpha_bottleneck;
  j["alpha_stem_k"] = m.alpha_stem_k;
  j["alpha_stem_pool"] = m.alpha_stem_pool;
  j["ppm_bins"] = m.ppm_bins;
  j["ppm_ch"] = m.ppm_ch;
  j["alpha_dec"] = m.alpha_dec;
  j["hidden64_ch"] = m.hidden64_ch;
  j["refine_ch"] = m.refine_ch;
  j["hidden16_ch"] = m.hidden16_ch;
  return j;
}

ModelConfig model_from_json(const json& j) {
  ModelConfig m;
  m.preset = j.at("preset").get<std::string>();
  m.ck = j.at("ck");
  m.cv = j.at("cv");
  m.ws = j.at("ws");
  m.gn_groups = j.at("gn_groups");
  m.tri_stages = j.at("tri_stages").get<std::vector<int>>();
  m.tri_blocks = j.at("tri_blocks").get<std::vector<int>>();
  m.tri_bottleneck = j.at("tri_bottleneck");
  m.tri_stem_k = j.at("tri_stem_k");
  m.tri_stem_pool = j.at("tri_stem_pool");
  m.tri_dec_ch = j.at("tri_dec_ch");
  m.alpha_stages = j.at("alpha_stages").get<std::vector<int>>();
  m.alpha_blocks = j.at("alpha_blocks").get<std::vector<int>>();
  m.alpha_bottleneck = j.at("alpha_bottleneck");
  m.alpha_stem_k = j.at("alpha_stem_k");
  m.alpha_stem_pool = j.at("alpha_stem_pool");
  m.ppm_bins = j.at("ppm_bins").get<std::vector<int>>();
  m.ppm_ch = j.at("ppm_ch");
  m.alpha_dec = j.at("alpha_dec").get<std::vector<int>>();
  m.hidden64_ch = j.at("hidden64_ch");
  m.refine_ch = j.at("refine_ch");
  m.hidden16_ch = j.at("hidden16_ch");
  return m;
}

struct ParsedHeader {
  CheckpointMeta meta;
  json arrays;
  std::streampos data_start;
};

ParsedHeader read_header(std::ifstream& in, const std::string& path) {
  char magic[kMagicLen];
  in.read(magic, (std::streamsize)kMagicLen);
  if (!in || std::string(magic, kMagicLen) != kMagic)
    throw UsageError(path + " is not a checkpoint");
  uint64_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), 8);
  std::string text(hlen, '\0');
  in.read(text.data(), (std::streamsize)hlen);
  if (!in) throw UsageError(path + ": truncated header");
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw UsageError(path + ": bad header");
  ParsedHeader h;
  h.meta.format_version = j.at("format_version");
  if (h.meta.format_version != 1)
    throw UsageError(path + ": unsupported format version");
  h.meta.preset = j.at("preset").get<std::string>();
  h.meta.stage = j.at("stage").get<std::string>();
  h.meta.step = j.at("step");
  h.meta.model = model_from_json(j.at("model"));
  h.arrays = j.at("arrays");
  h.data_start = in.tellg();
  return h;
}

}  // namespace

template <typename T>
void save_checkpoint(const std::string& path, const Model<T>& m, const std::string& stage,
                     int64_t step) {
  json j;
  j["format_version"] = 1;
  j["preset"] = m.cfg.preset;
  j["stage"] = stage;
  j["step"] = step;
  j["model"] = model_to_json(m.cfg);
  json arrays = json::array();
  int64_t offset = 0;
  for (const auto& [name, t] : m.params.map()) {
    json a;
    a["name"] = name;
    a["shape"] = t.shape();
    a["offset"] = offset;
    arrays.push_back(a);
    offset += t.numel();
  }
  j["arrays"] = arrays;
  std::string header = j.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path);
  out.write(kMagic, (std::streamsize)kMagicLen);
  uint64_t hlen = header.size();
  out.write(reinterpret_cast<const char*>(&hlen), 8);
  out.write(header.data(), (std::streamsize)header.size());
  for (const auto& [name, t] : m.params.map()) {
    for (int64_t i = 0; i < t.numel(); ++i) {
      double v = (double)t.val()[i];
      out.write(reinterpret_cast<const char*>(&v), 8);
    }
  }
  if (!out) throw UsageError("failed writing " + path);
}

template <typename T>
CheckpointMeta load_checkpoint(const std::string& path, Model<T>& m) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  ParsedHeader h = read_header(in, path);

  json expected = model_to_json(m.cfg);
  if (model_to_json(h.meta.model) != expected)
    throw UsageError(path + ": checkpoint was built for preset '" + h.meta.preset +
                     "' with different channel sizes than the configured model");

  size_t found = 0;
  for (const auto& a : h.arrays) {
    std::string name = a.at("name");
    if (!m.params.has(name)) throw UsageError(path + ": unknown array " + name);
    auto t = m.params.get(name);
    std::vector<int> shape = a.at("shape").get<std::vector<int>>();
    if (shape != t.shape())
      throw UsageError(path + ": shape mismatch for " + name);
    int64_t off = a.at("offset");
    in.seekg(h.data_start + (std::streampos)(off * 8));
    for (int64_t i = 0; i < t.numel(); ++i) {
      double v;
      in.read(reinterpret_cast<char*>(&v), 8);
      t.val()[i] = (T)v;
    }
    ++found;
  }
  if (!in) throw UsageError(path + ": truncated data");
  if (found != m.params.map().size())
    throw UsageError(path + ": checkpoint holds " + std::to_string(found) + " arrays, model wants " +
                     std::to_string(m.params.map().size()));
  return h.meta;
}

CheckpointMeta peek_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  return read_header(in, path).meta;
}

template void save_checkpoint<float>(const std::string&, const Model<float>&,
                                     const std::string&, int64_t);
template void save_checkpoint<double>(const std::string&, const Model<double>&,
                                      const std::string&, int64_t);
template CheckpointMeta load_checkpoint<float>(const std::string&, Model<float>&);
template CheckpointMeta load_checkpoint<double>(const std::string&, Model<double>&);

}  // namespace otvm
