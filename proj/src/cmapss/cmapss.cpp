#include "rulfdia/cmapss.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <string>

#include "rulfdia/errors.hpp"
#include "rulfdia/textio.hpp"

namespace rulfdia::cmapss {

std::string_view channel_tag(std::size_t channel) {
  if (channel < kNumSettings) return kSettingTags[channel];
  if (channel < kNumChannels) return kSensorTags[channel - kNumSettings];
  throw std::out_of_range("channel index " + std::to_string(channel));
}

std::optional<std::size_t> channel_index(std::string_view tag) {
  for (std::size_t c = 0; c < kNumChannels; ++c)
    if (channel_tag(c) == tag) return c;
  return std::nullopt;
}

std::optional<std::size_t> sensor_index(std::string_view tag) {
  for (std::size_t s = 0; s < kNumSensors; ++s)
    if (kSensorTags[s] == tag) return s;
  return std::nullopt;
}

std::size_t require_sensor(std::string_view tag) {
  auto idx = sensor_index(tag);
  if (!idx) throw ValidationError("unknown sensor tag '" + std::string(tag) + "'");
  return *idx;
}

void validate(const EngineTrajectory& trajectory) {
  for (std::size_t i = 0; i < trajectory.rows.size(); ++i) {
    const int expected = static_cast<int>(i) + 1;
    if (trajectory.rows[i].cycle != expected)
      throw ValidationError("engine " + std::to_string(trajectory.engine_id) + ": expected cycle " +
                            std::to_string(expected) + ", found " +
                            std::to_string(trajectory.rows[i].cycle));
  }
}

namespace {

int parse_positive_id(std::string_view token, const char* what, std::size_t lineno) {
  // Ids are written as integers, but some exports carry a trailing ".0".
  auto v = text::parse_double(token);
  if (!v || *v != static_cast<double>(static_cast<long long>(*v)) || *v < 1 ||
      *v > std::numeric_limits<int>::max())
    throw ParseError(std::string(what) + " must be a positive integer, got '" + std::string(token) +
                         "'",
                     lineno);
  return static_cast<int>(*v);
}

}  // namespace

std::vector<EngineTrajectory> parse_cmapss(std::istream& in) {
  std::map<int, EngineTrajectory> by_id;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto tokens = text::split_whitespace(line);
    if (tokens.empty()) continue;
    if (tokens.size() != kNumColumns)
      throw ParseError("expected " + std::to_string(kNumColumns) + " columns, found " +
                           std::to_string(tokens.size()),
                       lineno);
    CycleRecord rec;
    const int engine = parse_positive_id(tokens[0], "engine id", lineno);
    rec.cycle = parse_positive_id(tokens[1], "cycle", lineno);
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      auto v = text::parse_double(tokens[2 + c]);
      if (!v) throw ParseError("non-numeric token '" + std::string(tokens[2 + c]) + "'", lineno);
      if (c < kNumSettings)
        rec.op_settings[c] = *v;
      else
        rec.sensors[c - kNumSettings] = *v;
    }
    auto& traj = by_id[engine];
    traj.engine_id = engine;
    traj.rows.push_back(rec);
  }
  std::vector<EngineTrajectory> out;
  out.reserve(by_id.size());
  for (auto& [id, traj] : by_id) {
    validate(traj);
    out.push_back(std::move(traj));
  }
  return out;
}

std::vector<EngineTrajectory> read_cmapss_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return parse_cmapss(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_cmapss(std::ostream& out, std::span<const EngineTrajectory> trajectories) {
  for (const auto& traj : trajectories) {
    for (const auto& row : traj.rows) {
      out << traj.engine_id << ' ' << row.cycle;
      for (std::size_t c = 0; c < kNumChannels; ++c) out << ' ' << text::format_double(row.channel(c));
      out << '\n';
    }
  }
}

std::vector<double> parse_rul_file(std::istream& in) {
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = text::trim(line);
    if (body.empty()) continue;
    auto v = text::parse_double(body);
    if (!v) throw ParseError("non-numeric RUL '" + std::string(body) + "'", lineno);
    if (*v < 0.0 || !std::isfinite(*v))
      throw ValidationError("line " + std::to_string(lineno) + ": RUL must be non-negative, got " +
                            std::string(body));
    out.push_back(*v);
  }
  return out;
}

std::vector<double> read_rul_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_rul_file(in);
}

std::vector<EngineTrajectory> filter_engines(std::span<const EngineTrajectory> trajectories,
                                             std::size_t min_cycles) {
  std::vector<EngineTrajectory> out;
  for (const auto& t : trajectories)
    if (t.length() > min_cycles) out.push_back(t);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> NormStats::constant_channels() const {
  std::vector<std::string> out;
  for (std::size_t c = 0; c < kNumChannels; ++c)
    if (is_constant(c)) out.emplace_back(channel_tag(c));
  return out;
}

std::vector<std::size_t> NormStats::feature_channels() const {
  std::vector<std::size_t> out;
  for (std::size_t c = include_op_settings ? 0 : kNumSettings; c < kNumChannels; ++c)
    if (!is_constant(c)) out.push_back(c);
  return out;
}

NormStats fit_norm_stats(std::span<const EngineTrajectory> trajectories, bool include_op_settings) {
  NormStats stats;
  stats.include_op_settings = include_op_settings;
  bool any = false;
  for (auto& r : stats.ranges) {
    r.min = std::numeric_limits<double>::infinity();
    r.max = -std::numeric_limits<double>::infinity();
  }
  for (const auto& traj : trajectories) {
    for (const auto& row : traj.rows) {
      any = true;
      for (std::size_t c = 0; c < kNumChannels; ++c) {
        const double v = row.channel(c);
        stats.ranges[c].min = std::min(stats.ranges[c].min, v);
        stats.ranges[c].max = std::max(stats.ranges[c].max, v);
      }
    }
  }
  if (!any) throw ValidationError("fit_norm_stats: no training rows");
  return stats;
}

void write_norm_stats(std::ostream& out, const NormStats& stats) {
  out << "# rulfdia normalization stats\n";
  out << "format = rulfdia-normstats\n";
  out << "version = 1\n";
  out << "include_op_settings = " << (stats.include_op_settings ? "true" : "false") << '\n';
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    out << "channel." << channel_tag(c) << ".min = " << text::format_double(stats.ranges[c].min) << '\n';
    out << "channel." << channel_tag(c) << ".max = " << text::format_double(stats.ranges[c].max) << '\n';
  }
  std::string constants;
  for (const auto& tag : stats.constant_channels()) constants += (constants.empty() ? "" : ",") + tag;
  out << "constant = " << constants << '\n';
}

NormStats read_norm_stats(std::istream& in) {
  auto kv = text::parse_key_values(in);
  NormStats stats;
  std::array<bool, kNumChannels> seen_min{}, seen_max{};
  bool format_ok = false;
  for (const auto& [key, value] : kv) {
    if (key == "format") {
      if (value != "rulfdia-normstats") throw ParseError("not a normalization stats file");
      format_ok = true;
    } else if (key == "version") {
      if (value != "1") throw ParseError("unsupported stats version " + value);
    } else if (key == "include_op_settings") {
      if (value != "true" && value != "false") throw ParseError("include_op_settings must be true/false");
      stats.include_op_settings = value == "true";
    } else if (key == "constant") {
      // Derived from the ranges; checked below.
    } else if (key.rfind("channel.", 0) == 0) {
      auto dot = key.rfind('.');
      auto tag = key.substr(8, dot - 8);
      auto bound = key.substr(dot + 1);
      auto idx = channel_index(tag);
      if (!idx) throw ValidationError("unknown sensor tag '" + tag + "' in stats");
      auto v = text::parse_double(value);
      if (!v) throw ParseError("non-numeric value for " + key);
      if (bound == "min") {
        stats.ranges[*idx].min = *v;
        seen_min[*idx] = true;
      } else if (bound == "max") {
        stats.ranges[*idx].max = *v;
        seen_max[*idx] = true;
      } else {
        throw ParseError("unknown stats key " + key);
      }
    } else {
      throw ParseError("unknown stats key " + key);
    }
  }
  if (!format_ok) throw ParseError("missing 'format' key in stats");
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    if (!seen_min[c] || !seen_max[c])
      throw ValidationError("stats missing bounds for " + std::string(channel_tag(c)));
    if (stats.ranges[c].min > stats.ranges[c].max)
      throw ValidationError("stats min > max for " + std::string(channel_tag(c)));
  }
  return stats;
}

NormalizedTrajectory normalize(const EngineTrajectory& trajectory, const NormStats& stats) {
  const auto channels = stats.feature_channels();
  NormalizedTrajectory out;
  out.engine_id = trajectory.engine_id;
  out.features = nn::Matrix(trajectory.length(), channels.size());
  out.cycles.reserve(trajectory.length());
  for (std::size_t t = 0; t < trajectory.length(); ++t) {
    const auto& row = trajectory.rows[t];
    out.cycles.push_back(row.cycle);
    for (std::size_t j = 0; j < channels.size(); ++j) {
      const auto& r = stats.ranges[channels[j]];
      out.features(t, j) = (row.channel(channels[j]) - r.min) / (r.max - r.min);
    }
  }
  return out;
}

EngineTrajectory denormalize(const NormalizedTrajectory& trajectory, const NormStats& stats) {
  const auto channels = stats.feature_channels();
  if (trajectory.features.cols() != channels.size())
    throw ShapeError("denormalize: feature width does not match stats");
  EngineTrajectory out;
  out.engine_id = trajectory.engine_id;
  out.rows.resize(trajectory.features.rows());
  for (std::size_t t = 0; t < out.rows.size(); ++t) {
    auto& row = out.rows[t];
    row.cycle = trajectory.cycles.at(t);
    std::array<double, kNumChannels> vals{};
    for (std::size_t c = 0; c < kNumChannels; ++c) vals[c] = stats.ranges[c].min;
    for (std::size_t j = 0; j < channels.size(); ++j) {
      const auto& r = stats.ranges[channels[j]];
      vals[channels[j]] = r.min + trajectory.features(t, j) * (r.max - r.min);
    }
    std::copy_n(vals.begin(), kNumSettings, row.op_settings.begin());
    std::copy_n(vals.begin() + kNumSettings, kNumSensors, row.sensors.begin());
  }
  return out;
}

// ---------------------------------------------------------------------------

void RulLabeling::validate() const {
  if (rul_cap <= 0) throw ValidationError("rul_cap must be positive");
}

std::vector<double> label_rul(const EngineTrajectory& trajectory, const RulLabeling& labeling,
                              std::optional<double> final_rul) {
  labeling.validate();
  const double offset = final_rul.value_or(0.0);
  const auto n = trajectory.length();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double raw = static_cast<double>(n - 1 - i) + offset;
    out[i] = std::min(raw, static_cast<double>(labeling.rul_cap));
  }
  return out;
}

std::vector<SequenceSample> windowize(const NormalizedTrajectory& trajectory,
                                      std::span<const double> labels, std::size_t seq_len) {
  if (seq_len == 0) throw std::invalid_argument("windowize: seq_len must be >= 1");
  const auto n = trajectory.features.rows();
  if (labels.size() != n) throw ShapeError("windowize: label count does not match row count");
  std::vector<SequenceSample> out;
  if (n < seq_len) return out;
  const auto dim = trajectory.features.cols();
  out.reserve(n - seq_len + 1);
  for (std::size_t end = seq_len; end <= n; ++end) {
    SequenceSample s;
    s.engine_id = trajectory.engine_id;
    s.end_cycle = trajectory.cycles[end - 1];
    s.target_rul = labels[end - 1];
    s.window = nn::Matrix(seq_len, dim);
    for (std::size_t k = 0; k < seq_len; ++k) {
      auto src = trajectory.features.row(end - seq_len + k);
      std::copy(src.begin(), src.end(), s.window.row(k).begin());
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SequenceSample> make_training_samples(std::span<const EngineTrajectory> trajectories,
                                                  const NormStats& stats,
                                                  const RulLabeling& labeling,
                                                  std::size_t seq_len) {
  std::vector<SequenceSample> out;
  for (const auto& traj : trajectories) {
    auto windows = windowize(normalize(traj, stats), label_rul(traj, labeling), seq_len);
    std::move(windows.begin(), windows.end(), std::back_inserter(out));
  }
  return out;
}

}  // namespace rulfdia::cmapss
