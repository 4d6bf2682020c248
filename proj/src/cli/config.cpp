#include "rulfdia/cli/config.hpp"

#include <fstream>
#include <sstream>

#include "rulfdia/errors.hpp"

namespace rulfdia::cli {

namespace {

using text::format_double;

double to_number(const std::string& key, const std::string& value) {
  auto v = text::parse_double(value);
  if (!v) throw ParseError("config: '" + key + "' expects a number, got '" + value + "'");
  return *v;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
  auto v = text::parse_uint(value);
  if (!v) throw ParseError("config: '" + key + "' expects a non-negative integer, got '" + value + "'");
  return *v;
}

int to_int(const std::string& key, const std::string& value) {
  auto v = text::parse_int(value);
  if (!v || *v < -2147483647 || *v > 2147483647)
    throw ParseError("config: '" + key + "' expects an integer, got '" + value + "'");
  return static_cast<int>(*v);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ParseError("config: '" + key + "' expects true|false, got '" + value + "'");
}

std::vector<std::size_t> to_list(const std::string& key, const std::string& value) {
  std::vector<std::size_t> out;
  for (const auto& part : text::split(value, ',')) {
    const auto t = std::string(text::trim(part));
    if (t.empty()) continue;
    out.push_back(to_unsigned(key, t));
  }
  if (out.empty()) throw ParseError("config: '" + key + "' expects a comma-separated list");
  return out;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

}  // namespace

nn::ModelSpec RunConfig::default_model() {
  nn::ModelSpec m;
  m.kind = nn::ModelKind::Gru;
  m.layer_widths = {100, 100, 100};
  m.seq_len = 80;
  return m;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "data.dir") {
    data_dir = value;
  } else if (key == "data.train") {
    train_file = value;
  } else if (key == "data.test") {
    test_file = value;
  } else if (key == "data.rul") {
    rul_file = value;
  } else if (key == "data.include_op_settings") {
    include_op_settings = to_bool(key, value);
  } else if (key == "out_dir") {
    out_dir = value;
  } else if (key == "seed") {
    seed = to_unsigned(key, value);
  } else if (key == "model.kind") {
    try {
      model.kind = nn::model_kind_from_string(value);
    } catch (const std::exception&) {
      throw ParseError("config: model.kind must be gru|lstm|cnn, got '" + value + "'");
    }
  } else if (key == "model.layers") {
    model.layer_widths = to_list(key, value);
  } else if (key == "model.seq_len") {
    model.seq_len = to_unsigned(key, value);
  } else if (key == "model.dropout") {
    model.dropout_rate = to_number(key, value);
  } else if (key == "model.activation") {
    try {
      model.activation = nn::activation_from_string(value);
    } catch (const std::exception&) {
      throw ParseError("config: model.activation must be tanh|relu, got '" + value + "'");
    }
  } else if (key == "model.kernel_len") {
    model.kernel_len = to_unsigned(key, value);
  } else if (key == "model.dense_width") {
    model.dense_width = to_unsigned(key, value);
  } else if (key == "model.output_scale") {
    if (value == "auto")
      output_scale.reset();
    else
      output_scale = to_number(key, value);
  } else if (key == "train.batch_size") {
    train.batch_size = to_unsigned(key, value);
  } else if (key == "train.epochs") {
    train.epochs = to_unsigned(key, value);
  } else if (key == "train.learning_rate") {
    train.learning_rate = to_number(key, value);
  } else if (key == "train.validation_fraction") {
    train.validation_fraction = to_number(key, value);
  } else if (key == "attack.seed") {
    throw ParseError("config: attack randomness comes from 'seed'; attack.seed is not a setting");
  } else if (key == "attack.min_cycles") {
    attack_min_cycles = to_unsigned(key, value);
  } else if (key.starts_with("attack.")) {
    attack_keys.emplace_back(key.substr(7), value);
  } else if (key == "labeling.rul_cap") {
    labeling.rul_cap = to_int(key, value);
  } else if (key == "eval.min_cycles") {
    eval_min_cycles = to_unsigned(key, value);
  } else if (key == "attacked") {
    if (!value.empty() && !parse_attack_cell(value))
      throw ParseError("config: attacked must name an attack cell such as interim_random, got '" +
                       value + "'");
    attacked = value;
  } else if (key == "piecewise.engine") {
    piecewise_engine = to_int(key, value);
  } else if (key == "alert.threshold") {
    alert_threshold = to_number(key, value);
  } else if (key == "study.seq_lens") {
    study_seq_lens = to_list(key, value);
  } else {
    throw ParseError("config: unknown key '" + key + "'");
  }
}

void RunConfig::finalize() {
  try {
    attack = fdia::parse_attack_spec(attack_keys);
  } catch (const ParseError& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  attack.seed = seed;
  attack.validate();
  train.seed = seed;
  train.validate();
  labeling.validate();
  auto probe = model_for(1);
  try {
    probe.validate();
  } catch (const std::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (!(alert_threshold > 0.0)) throw ValidationError("config: alert.threshold must be positive");
  for (auto lh : study_seq_lens)
    if (lh == 0) throw ValidationError("config: study.seq_lens entries must be positive");
}

nn::ModelSpec RunConfig::model_for(std::size_t input_dim) const {
  auto m = model;
  m.input_dim = input_dim;
  m.output_scale = output_scale.value_or(static_cast<double>(labeling.rul_cap));
  return m;
}

text::KeyValues RunConfig::resolved() const {
  text::KeyValues kv;
  auto add = [&](std::string k, std::string v) { kv.emplace_back(std::move(k), std::move(v)); };
  add("data.train", train_file);
  add("data.test", test_file);
  add("data.rul", rul_file);
  add("data.include_op_settings", include_op_settings ? "true" : "false");
  add("seed", std::to_string(seed));
  add("model.kind", std::string(nn::to_string(model.kind)));
  add("model.layers", join(model.layer_widths));
  add("model.seq_len", std::to_string(model.seq_len));
  add("model.dropout", format_double(model.dropout_rate));
  add("model.activation", std::string(nn::to_string(model.activation)));
  add("model.kernel_len", std::to_string(model.kernel_len));
  add("model.dense_width", std::to_string(model.dense_width));
  add("model.output_scale", format_double(output_scale.value_or(labeling.rul_cap)));
  add("train.batch_size", std::to_string(train.batch_size));
  add("train.epochs", std::to_string(train.epochs));
  add("train.learning_rate", format_double(train.learning_rate));
  add("train.validation_fraction", format_double(train.validation_fraction));
  std::ostringstream spec;
  fdia::write_attack_spec(spec, attack);
  for (auto& [k, v] : text::parse_key_values(spec.str()))
    if (k != "seed") add("attack." + k, v);
  add("attack.min_cycles", std::to_string(attack_min_cycles));
  add("labeling.rul_cap", std::to_string(labeling.rul_cap));
  add("eval.min_cycles", std::to_string(eval_min_cycles));
  add("attacked", attacked);
  add("piecewise.engine", std::to_string(piecewise_engine));
  add("alert.threshold", format_double(alert_threshold));
  add("study.seq_lens", join(study_seq_lens));
  return kv;
}

std::string RunConfig::hash() const {
  std::string text;
  for (const auto& [k, v] : resolved()) text += k + " = " + v + "\n";
  return text::hex64(text::fnv1a(text));
}

RunConfig load_config(const std::optional<std::filesystem::path>& file, const text::KeyValues& overrides) {
  RunConfig cfg;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw std::runtime_error("cannot open config file " + file->string());
    for (const auto& [k, v] : text::parse_key_values(in)) cfg.set(k, v);
  }
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  cfg.finalize();
  return cfg;
}

std::optional<std::pair<fdia::Variant, fdia::NoiseKind>> parse_attack_cell(std::string_view name) {
  for (auto v : {fdia::Variant::Continuous, fdia::Variant::Interim})
    for (auto n : {fdia::NoiseKind::Random, fdia::NoiseKind::Biased})
      if (name == std::string(fdia::to_string(v)) + "_" + std::string(fdia::to_string(n)))
        return std::pair{v, n};
  return std::nullopt;
}

}  // namespace rulfdia::cli
