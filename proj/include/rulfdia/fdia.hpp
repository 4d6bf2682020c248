#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rulfdia/cmapss.hpp"
#include "rulfdia/textio.hpp"

namespace rulfdia::fdia {

enum class Variant { Continuous, Interim };
enum class NoiseKind { Random, Biased };

std::string_view to_string(Variant v);
std::string_view to_string(NoiseKind n);

struct AttackSpec {
  Variant variant = Variant::Continuous;
  NoiseKind noise = NoiseKind::Random;
  double lo_rate = 1e-4;   // random: per-reading rate ~ U[lo_rate, hi_rate]
  double hi_rate = 5e-4;
  double rate = 2e-4;      // biased: fixed rate
  std::vector<std::string> sensors{"T24", "T50", "P30"};
  int start = 130;         // first attacked cycle
  int duration = 20;       // interim only
  int direction = +1;      // +1 raises readings, -1 lowers them
  std::uint64_t seed = 0;

  /// Throws ValidationError on any broken invariant (rates, start, duration,
  /// unknown or empty sensor set, direction other than +-1).
  void validate() const;
  /// e.g. "continuous_random"
  std::string cell_name() const;
};

/// Reads `key = value` lines (variant, noise, lo_rate, hi_rate, rate, sensors,
/// start, duration, direction, seed); unknown keys are errors. Unset keys keep
/// their defaults. The result is validated.
AttackSpec parse_attack_spec(const text::KeyValues& kv);
AttackSpec parse_attack_spec(std::istream& in);
void write_attack_spec(std::ostream& out, const AttackSpec& spec);

/// Inclusive cycle range; empty when the trajectory ends before the start.
struct AttackWindow {
  int start = 0;
  int end = -1;
  bool empty() const { return end < start; }
  bool contains(int cycle) const { return cycle >= start && cycle <= end; }
  int length() const { return empty() ? 0 : end - start + 1; }
  bool operator==(const AttackWindow&) const = default;
};

AttackWindow attack_window(const AttackSpec& spec, int trajectory_length);

struct SensorBounds {
  std::string sensor;
  double z_min = 0.0;
  double z_max = 0.0;
};

/// Plausibility limits per attacked sensor, in raw units.
struct StealthBounds {
  std::vector<SensorBounds> sensors;
  const SensorBounds& at(std::string_view sensor) const;
};

/// Observed min/max of each sensor over the training trajectories.
StealthBounds derive_stealth_bounds(std::span<const cmapss::EngineTrajectory> training,
                                    std::span<const std::string> sensors);

/// Realized perturbation for one trajectory: lambdas[s][t - window.start] is
/// the offset added to sensors[s] at cycle t. Zero outside that support.
struct AttackVector {
  int engine_id = 0;
  std::size_t trajectory_length = 0;
  AttackWindow window;
  std::vector<std::string> sensors;
  std::vector<std::vector<double>> lambdas;

  double at(std::string_view sensor, int cycle) const;
  static AttackVector zero(const cmapss::EngineTrajectory& trajectory);
};

/// Per-engine generator seed: spec.seed mixed with the engine id.
std::uint64_t engine_seed(const AttackSpec& spec, int engine_id);

AttackVector build_attack_vector(const AttackSpec& spec, const cmapss::EngineTrajectory& trajectory,
                                 const StealthBounds& bounds);

/// Z = X + F. The input is copied; cells outside F's support are untouched.
cmapss::EngineTrajectory inject(const cmapss::EngineTrajectory& trajectory,
                                const AttackVector& vector);

std::vector<cmapss::EngineTrajectory> attack_dataset(
    const AttackSpec& spec, std::span<const cmapss::EngineTrajectory> trajectories,
    const StealthBounds& bounds);

struct StealthViolation {
  int engine_id = 0;
  std::string sensor;
  int cycle = 0;
  double value = 0.0;
};

struct StealthReport {
  bool stealthy = true;
  std::vector<StealthViolation> violations;
};

/// Every reading of every listed sensor must satisfy z_min <= z <= z_max.
StealthReport stealth_check(std::span<const cmapss::EngineTrajectory> attacked,
                            const StealthBounds& bounds, std::span<const std::string> sensors);

}  // namespace rulfdia::fdia
