#include "loralab/checkpoint.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "loralab/errors.hpp"

namespace loralab {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kModelFormat = "mlm-workbench/model";
constexpr const char* kAdapterFormat = "mlm-workbench/adapters";
constexpr int kVersion = 1;

json param_to_json(const Param& p) {
  for (double v : p.value.data)
    if (!std::isfinite(v))
      throw StateError("checkpoint: non-finite value in parameter '" + p.name +
                       "'");
  json j;
  j["name"] = p.name;
  j["rows"] = p.value.rows;
  j["cols"] = p.value.cols;
  j["trainable"] = p.trainable;
  j["data"] = p.value.data;
  return j;
}

Param param_from_json(const json& j) {
  Param p;
  p.name = j.at("name").get<std::string>();
  p.value.rows = j.at("rows").get<int>();
  p.value.cols = j.at("cols").get<int>();
  p.trainable = j.at("trainable").get<bool>();
  p.value.data = j.at("data").get<std::vector<double>>();
  if (p.value.rows < 0 || p.value.cols < 0 ||
      p.value.data.size() != size_t(p.value.rows) * size_t(p.value.cols))
    throw InputError("checkpoint: parameter '" + p.name + "' declares " +
                     std::to_string(p.value.rows) + "x" +
                     std::to_string(p.value.cols) + " but carries " +
                     std::to_string(p.value.data.size()) + " values");
  return p;
}

json slot_to_json(int layer, MatrixName name, const AdapterSlot& slot) {
  json j;
  j["layer"] = layer;
  j["matrix"] = to_string(name);
  if (slot.lora) {
    j["kind"] = "lora";
    j["rank"] = slot.lora->rank;
    j["alpha"] = slot.lora->alpha;
    j["dropout_p"] = slot.lora->dropout_p;
    j["a"] = param_to_json(slot.lora->a);
    j["b"] = param_to_json(slot.lora->b);
  } else {
    j["kind"] = "svd";
    j["active"] = std::vector<int>(slot.svd->active.begin(),
                                   slot.svd->active.end());
    j["p"] = param_to_json(slot.svd->p);
    j["lambda"] = param_to_json(slot.svd->lambda);
    j["q"] = param_to_json(slot.svd->q);
  }
  return j;
}

json adapters_to_json(const TransformerModel& model) {
  json arr = json::array();
  for (int l = 0; l < model.n_layers(); ++l)
    for (MatrixName name : all_matrix_names()) {
      const AdapterSlot& slot = model.layer(l).matrix(name).slot;
      if (!slot.empty()) arr.push_back(slot_to_json(l, name, slot));
    }
  return arr;
}

void slot_from_json(TransformerModel& model, const json& j) {
  const int layer = j.at("layer").get<int>();
  const MatrixName name =
      matrix_name_from_string(j.at("matrix").get<std::string>());
  AdaptedLinear& lin = model.matrix_at(layer, name);
  if (!lin.slot.empty())
    throw StateError("checkpoint: adapter slot L" + std::to_string(layer) +
                     "/" + to_string(name) + " already occupied");
  const std::string kind = j.at("kind").get<std::string>();
  const int d1 = lin.d_out();
  const int d2 = lin.d_in();
  auto check_shape = [&](const Param& p, int rows, int cols) {
    if (p.value.rows != rows || p.value.cols != cols)
      throw ShapeError("checkpoint: parameter '" + p.name + "' is " +
                       p.value.shape_str() + ", host expects (" +
                       std::to_string(rows) + "x" + std::to_string(cols) +
                       ")");
  };
  if (kind == "lora") {
    auto ad = std::make_unique<LoraAdapter>();
    ad->rank = j.at("rank").get<int>();
    ad->alpha = j.at("alpha").get<double>();
    ad->dropout_p = j.at("dropout_p").get<double>();
    ad->a = param_from_json(j.at("a"));
    ad->b = param_from_json(j.at("b"));
    if (ad->rank < 1)
      throw InputError("checkpoint: lora rank must be >= 1, got " +
                       std::to_string(ad->rank));
    check_shape(ad->a, ad->rank, d2);
    check_shape(ad->b, d1, ad->rank);
    lin.slot.lora = std::move(ad);
  } else if (kind == "svd") {
    auto ad = std::make_unique<SvdAdapter>();
    ad->p = param_from_json(j.at("p"));
    ad->lambda = param_from_json(j.at("lambda"));
    ad->q = param_from_json(j.at("q"));
    const auto act = j.at("active").get<std::vector<int>>();
    ad->active.assign(act.begin(), act.end());
    const int r_max = ad->lambda.value.cols;
    if (ad->lambda.value.rows != 1 || r_max < 1)
      throw InputError("checkpoint: lambda must be 1 x r_max, got " +
                       ad->lambda.value.shape_str());
    check_shape(ad->p, d1, r_max);
    check_shape(ad->q, r_max, d2);
    if (int(ad->active.size()) != r_max)
      throw InputError("checkpoint: active mask has " +
                       std::to_string(ad->active.size()) + " entries for r_max " +
                       std::to_string(r_max));
    for (int k = 0; k < r_max; ++k)
      if (!ad->active[size_t(k)] && ad->lambda.value.at(0, k) != 0.0)
        throw InputError(
            "checkpoint: pruned dimension " + std::to_string(k) +
            " carries nonzero lambda");
    lin.slot.svd = std::move(ad);
  } else {
    throw InputError("checkpoint: unknown adapter kind '" + kind + "'");
  }
}

json config_to_json(const ModelConfig& c) {
  json j;
  j["vocab_size"] = c.vocab_size;
  j["d_model"] = c.d_model;
  j["d_ff"] = c.d_ff;
  j["n_layers"] = c.n_layers;
  j["n_heads"] = c.n_heads;
  j["max_len"] = c.max_len;
  j["seed"] = c.seed;
  return j;
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.vocab_size = j.at("vocab_size").get<int>();
  c.d_model = j.at("d_model").get<int>();
  c.d_ff = j.at("d_ff").get<int>();
  c.n_layers = j.at("n_layers").get<int>();
  c.n_heads = j.at("n_heads").get<int>();
  c.max_len = j.at("max_len").get<int>();
  c.seed = j.at("seed").get<uint64_t>();
  return c;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("checkpoint: cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out.good()) throw IoError("checkpoint: write to '" + path + "' failed");
}

json read_json_file(const std::string& path, const char* expect_format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("checkpoint: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw InputError("checkpoint: '" + path + "' is not valid JSON: " +
                     e.what());
  }
  const std::string fmt = j.value("format", std::string());
  if (fmt != expect_format)
    throw InputError("checkpoint: '" + path + "' has format '" + fmt +
                     "', expected '" + expect_format + "'");
  const int version = j.value("version", -1);
  if (version != kVersion)
    throw InputError("checkpoint: '" + path + "' has version " +
                     std::to_string(version) + ", expected " +
                     std::to_string(kVersion));
  return j;
}

}  // namespace

std::string config_hash(const ModelConfig& config) {
  const std::string canon = config_to_json(config).dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                (unsigned long long)Rng::fnv1a64(canon));
  return std::string(buf);
}

void save_model(const TransformerModel& model, const std::string& path) {
  json j;
  j["format"] = kModelFormat;
  j["version"] = kVersion;
  j["config"] = config_to_json(model.config());
  json v;
  v["id_to_token"] = model.vocab().id_to_token;
  v["pad_id"] = model.vocab().pad_id;
  v["mask_id"] = model.vocab().mask_id;
  v["unk_id"] = model.vocab().unk_id;
  j["vocab"] = v;
  json params = json::array();
  for (const Param* p : model.base_params()) params.push_back(param_to_json(*p));
  j["params"] = std::move(params);
  j["adapters"] = adapters_to_json(model);
  write_text_file(path, j.dump());
}

TransformerModel load_model(const std::string& path) {
  const json j = read_json_file(path, kModelFormat);
  try {
    ModelConfig config = config_from_json(j.at("config"));
    config.validate();

    Vocab vocab;
    const json& v = j.at("vocab");
    vocab.id_to_token = v.at("id_to_token").get<std::vector<std::string>>();
    vocab.pad_id = v.at("pad_id").get<int>();
    vocab.mask_id = v.at("mask_id").get<int>();
    vocab.unk_id = v.at("unk_id").get<int>();
    for (int i = 0; i < int(vocab.id_to_token.size()); ++i)
      vocab.token_to_id[vocab.id_to_token[size_t(i)]] = i;
    if (vocab.size() != config.vocab_size)
      throw InputError("checkpoint: vocab has " +
                       std::to_string(vocab.size()) + " tokens, config says " +
                       std::to_string(config.vocab_size));

    TransformerModel model = TransformerModel::init(config, std::move(vocab));

    std::unordered_map<std::string, Param*> pending;
    for (Param* p : model.base_params()) pending[p->name] = p;
    for (const json& pj : j.at("params")) {
      Param loaded = param_from_json(pj);
      auto it = pending.find(loaded.name);
      if (it == pending.end())
        throw InputError("checkpoint: unexpected or repeated parameter '" +
                         loaded.name + "'");
      if (!it->second->value.same_shape(loaded.value))
        throw ShapeError("checkpoint: parameter '" + loaded.name + "' is " +
                         loaded.value.shape_str() + ", model expects " +
                         it->second->value.shape_str());
      *it->second = std::move(loaded);
      pending.erase(it);
    }
    if (!pending.empty())
      throw InputError("checkpoint: file is missing " +
                       std::to_string(pending.size()) +
                       " base parameters (first: '" +
                       pending.begin()->first + "')");

    for (const json& aj : j.at("adapters")) slot_from_json(model, aj);
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("checkpoint: '" + path + "' is malformed: " + e.what());
  }
}

void save_adapters(const TransformerModel& model, const std::string& path) {
  json j;
  j["format"] = kAdapterFormat;
  j["version"] = kVersion;
  j["base_config_hash"] = config_hash(model.config());
  j["adapters"] = adapters_to_json(model);
  write_text_file(path, j.dump());
}

void load_adapters(TransformerModel& model, const std::string& path) {
  const json j = read_json_file(path, kAdapterFormat);
  try {
    const std::string want = j.at("base_config_hash").get<std::string>();
    const std::string have = config_hash(model.config());
    if (want != have)
      throw ConfigError("checkpoint: adapter file expects base config hash " +
                        want + ", model has " + have);
    const json& arr = j.at("adapters");
    for (const json& aj : arr) slot_from_json(model, aj);
    if (!arr.empty())
      for (Param* p : model.base_params()) p->trainable = false;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("checkpoint: '" + path + "' is malformed: " + e.what());
  }
}

}  // namespace loralab
