#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rulfdia/nn/matrix.hpp"
#include "rulfdia/sample.hpp"

namespace rulfdia::cmapss {

inline constexpr std::size_t kNumSettings = 3;
inline constexpr std::size_t kNumSensors = 21;
inline constexpr std::size_t kNumChannels = kNumSettings + kNumSensors;
inline constexpr std::size_t kNumColumns = 2 + kNumChannels;

inline constexpr std::array<std::string_view, kNumSensors> kSensorTags = {
    "T2",  "T24", "T30",  "T50",     "P2",     "P15",       "P30",
    "Nf",  "Nc",  "epr",  "Ps30",    "phi",    "NRf",       "NRc",
    "BPR", "farB", "htBleed", "Nf_dmd", "PCNfR_dmd", "W31", "W32"};
inline constexpr std::array<std::string_view, kNumSettings> kSettingTags = {
    "setting1", "setting2", "setting3"};

/// Channels 0..2 are the operational settings, 3..23 the sensors in file order.
std::string_view channel_tag(std::size_t channel);
std::optional<std::size_t> channel_index(std::string_view tag);
std::optional<std::size_t> sensor_index(std::string_view tag);
/// Like sensor_index but throws ValidationError for unknown tags.
std::size_t require_sensor(std::string_view tag);

struct CycleRecord {
  int cycle = 0;
  std::array<double, kNumSettings> op_settings{};
  std::array<double, kNumSensors> sensors{};

  double channel(std::size_t c) const {
    return c < kNumSettings ? op_settings[c] : sensors[c - kNumSettings];
  }
  bool operator==(const CycleRecord&) const = default;
};

struct EngineTrajectory {
  int engine_id = 0;
  std::vector<CycleRecord> rows;

  std::size_t length() const noexcept { return rows.size(); }
  bool operator==(const EngineTrajectory&) const = default;
};

/// Throws ValidationError unless cycles run 1, 2, ..., T_n.
void validate(const EngineTrajectory& trajectory);

/// Whitespace-separated rows of 26 numbers. Trajectories come back sorted by
/// engine id with rows in file order.
std::vector<EngineTrajectory> parse_cmapss(std::istream& in);
std::vector<EngineTrajectory> read_cmapss_file(const std::filesystem::path& path);
/// Inverse of parse_cmapss; numbers use the shortest exact representation.
void write_cmapss(std::ostream& out, std::span<const EngineTrajectory> trajectories);

/// One non-negative RUL per line, in test-engine order.
std::vector<double> parse_rul_file(std::istream& in);
std::vector<double> read_rul_file(const std::filesystem::path& path);

/// Keeps trajectories with strictly more than min_cycles rows.
std::vector<EngineTrajectory> filter_engines(std::span<const EngineTrajectory> trajectories,
                                             std::size_t min_cycles);

// ---------------------------------------------------------------------------
// Normalization

struct ChannelRange {
  double min = 0.0;
  double max = 0.0;
  bool operator==(const ChannelRange&) const = default;
};

struct NormStats {
  std::array<ChannelRange, kNumChannels> ranges{};
  bool include_op_settings = true;

  bool is_constant(std::size_t channel) const { return ranges[channel].max == ranges[channel].min; }
  /// Tags of zero-range channels (settings and sensors).
  std::vector<std::string> constant_channels() const;
  /// Channels that make up the feature vector, ascending: the op settings
  /// (when included) then the surviving sensors, both in file-column order.
  std::vector<std::size_t> feature_channels() const;
  std::size_t feature_dim() const { return feature_channels().size(); }
  bool operator==(const NormStats&) const = default;
};

NormStats fit_norm_stats(std::span<const EngineTrajectory> trajectories,
                         bool include_op_settings = true);

/// Key/value text, one `channel.<tag>.min|max = <value>` line per bound.
void write_norm_stats(std::ostream& out, const NormStats& stats);
NormStats read_norm_stats(std::istream& in);

struct NormalizedTrajectory {
  int engine_id = 0;
  std::vector<int> cycles;
  nn::Matrix features;  // T_n x feature_dim
};

/// (v - min) / (max - min) per feature channel, not clamped: readings outside
/// the training range map outside [0, 1].
NormalizedTrajectory normalize(const EngineTrajectory& trajectory, const NormStats& stats);
/// Inverse map. Channels absent from the feature vector are restored to their
/// training minimum, which is exact for constant channels.
EngineTrajectory denormalize(const NormalizedTrajectory& trajectory, const NormStats& stats);

// ---------------------------------------------------------------------------
// Labels and windows

struct RulLabeling {
  int rul_cap = 130;
  void validate() const;
};

/// Piecewise-linear target: min((T_n - t) + final_rul, rul_cap) per row.
/// Training trajectories pass no final_rul (failure at the last row).
std::vector<double> label_rul(const EngineTrajectory& trajectory, const RulLabeling& labeling,
                              std::optional<double> final_rul = std::nullopt);

/// One sample per end row t in [seq_len, T_n]; shorter trajectories yield none.
std::vector<SequenceSample> windowize(const NormalizedTrajectory& trajectory,
                                      std::span<const double> labels, std::size_t seq_len);

/// Normalize, label and window a whole training split.
std::vector<SequenceSample> make_training_samples(std::span<const EngineTrajectory> trajectories,
                                                  const NormStats& stats,
                                                  const RulLabeling& labeling,
                                                  std::size_t seq_len);

}  // namespace rulfdia::cmapss
