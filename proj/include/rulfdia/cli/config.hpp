#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rulfdia/cmapss.hpp"
#include "rulfdia/fdia.hpp"
#include "rulfdia/nn/model.hpp"
#include "rulfdia/nn/train.hpp"
#include "rulfdia/textio.hpp"

namespace rulfdia::cli {

/// Everything a run needs. Keys and defaults are listed in docs/config.md.
struct RunConfig {
  std::filesystem::path data_dir = "data/CMAPSSData";
  std::string train_file = "train_FD001.txt";
  std::string test_file = "test_FD001.txt";
  std::string rul_file = "RUL_FD001.txt";
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;

  nn::ModelSpec model = default_model();
  std::optional<double> output_scale;  // unset: use labeling.rul_cap
  nn::TrainConfig train;
  fdia::AttackSpec attack;     // built from attack_keys by finalize()
  text::KeyValues attack_keys;  // attack.* settings without the prefix
  std::size_t attack_min_cycles = 130;  // test engines kept for attack runs
  cmapss::RulLabeling labeling;
  bool include_op_settings = true;

  std::size_t eval_min_cycles = 0;
  std::string attacked;  // attack cell read by eval/piecewise, e.g. "interim_random"
  int piecewise_engine = 17;
  double alert_threshold = 30.0;
  std::vector<std::size_t> study_seq_lens{60, 70, 80, 90};

  static nn::ModelSpec default_model();

  std::filesystem::path train_path() const { return data_dir / train_file; }
  std::filesystem::path test_path() const { return data_dir / test_file; }
  std::filesystem::path rul_path() const { return data_dir / rul_file; }

  /// Sets one key. Unknown keys and malformed values throw ParseError.
  void set(const std::string& key, const std::string& value);
  /// Seeds propagate to the train and attack settings; throws
  /// ValidationError on any broken invariant.
  void finalize();

  /// Resolved settings in a fixed order. Paths that only say where files
  /// live (data_dir, out_dir) are left out so moving a run does not change
  /// its hash.
  text::KeyValues resolved() const;
  /// hex FNV-1a of resolved() rendered as `key = value` lines.
  std::string hash() const;
  /// Model spec with input_dim and output_scale filled in.
  nn::ModelSpec model_for(std::size_t input_dim) const;
};

/// Defaults, then the file (if any), then overrides in order.
RunConfig load_config(const std::optional<std::filesystem::path>& file, const text::KeyValues& overrides);

/// "continuous_random" etc.
std::optional<std::pair<fdia::Variant, fdia::NoiseKind>> parse_attack_cell(std::string_view name);

}  // namespace rulfdia::cli
