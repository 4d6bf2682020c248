#include "rulfdia/fdia.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>

#include "rulfdia/errors.hpp"
#include "rulfdia/random.hpp"

namespace rulfdia::fdia {

using cmapss::EngineTrajectory;

std::string_view to_string(Variant v) { return v == Variant::Continuous ? "continuous" : "interim"; }
std::string_view to_string(NoiseKind n) { return n == NoiseKind::Random ? "random" : "biased"; }

void AttackSpec::validate() const {
  if (noise == NoiseKind::Random && !(lo_rate > 0.0 && lo_rate <= hi_rate))
    throw ValidationError("attack: need 0 < lo_rate <= hi_rate");
  if (noise == NoiseKind::Biased && !(rate > 0.0))
    throw ValidationError("attack: biased rate must be > 0");
  if (!std::isfinite(lo_rate) || !std::isfinite(hi_rate) || !std::isfinite(rate))
    throw ValidationError("attack: rates must be finite");
  if (start < 1) throw ValidationError("attack: start must be >= 1");
  if (duration < 1) throw ValidationError("attack: duration must be >= 1");
  if (direction != 1 && direction != -1) throw ValidationError("attack: direction must be +1 or -1");
  if (sensors.empty()) throw ValidationError("attack: sensor set is empty");
  std::set<std::string> seen;
  for (const auto& s : sensors) {
    cmapss::require_sensor(s);
    if (!seen.insert(s).second) throw ValidationError("attack: duplicate sensor " + s);
  }
}

std::string AttackSpec::cell_name() const {
  return std::string(to_string(variant)) + "_" + std::string(to_string(noise));
}

AttackSpec parse_attack_spec(const text::KeyValues& kv) {
  AttackSpec spec;
  auto number = [](const std::string& key, const std::string& value) {
    auto v = text::parse_double(value);
    if (!v) throw ParseError("attack: '" + key + "' is not a number: " + value);
    return *v;
  };
  auto integer = [](const std::string& key, const std::string& value) {
    auto v = text::parse_int(value);
    if (!v || *v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max())
      throw ParseError("attack: '" + key + "' is not an integer: " + value);
    return static_cast<int>(*v);
  };
  for (const auto& [key, value] : kv) {
    if (key == "variant") {
      if (value == "continuous")
        spec.variant = Variant::Continuous;
      else if (value == "interim")
        spec.variant = Variant::Interim;
      else
        throw ParseError("attack: variant must be continuous|interim, got " + value);
    } else if (key == "noise") {
      if (value == "random")
        spec.noise = NoiseKind::Random;
      else if (value == "biased")
        spec.noise = NoiseKind::Biased;
      else
        throw ParseError("attack: noise must be random|biased, got " + value);
    } else if (key == "lo_rate") {
      spec.lo_rate = number(key, value);
    } else if (key == "hi_rate") {
      spec.hi_rate = number(key, value);
    } else if (key == "rate") {
      spec.rate = number(key, value);
    } else if (key == "sensors") {
      spec.sensors = text::split(value, ',');
      std::erase(spec.sensors, std::string{});
    } else if (key == "start") {
      spec.start = integer(key, value);
    } else if (key == "duration") {
      spec.duration = integer(key, value);
    } else if (key == "direction") {
      spec.direction = integer(key, value);
    } else if (key == "seed") {
      auto v = text::parse_uint(value);
      if (!v) throw ParseError("attack: seed must be a non-negative integer");
      spec.seed = *v;
    } else {
      throw ParseError("attack: unknown key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

AttackSpec parse_attack_spec(std::istream& in) { return parse_attack_spec(text::parse_key_values(in)); }

void write_attack_spec(std::ostream& out, const AttackSpec& spec) {
  out << "variant = " << to_string(spec.variant) << '\n';
  out << "noise = " << to_string(spec.noise) << '\n';
  out << "lo_rate = " << text::format_double(spec.lo_rate) << '\n';
  out << "hi_rate = " << text::format_double(spec.hi_rate) << '\n';
  out << "rate = " << text::format_double(spec.rate) << '\n';
  out << "sensors = ";
  for (std::size_t i = 0; i < spec.sensors.size(); ++i) out << (i ? "," : "") << spec.sensors[i];
  out << '\n';
  out << "start = " << spec.start << '\n';
  out << "duration = " << spec.duration << '\n';
  out << "direction = " << spec.direction << '\n';
  out << "seed = " << spec.seed << '\n';
}

AttackWindow attack_window(const AttackSpec& spec, int trajectory_length) {
  if (spec.start > trajectory_length) return {spec.start, spec.start - 1};
  if (spec.variant == Variant::Continuous) return {spec.start, trajectory_length};
  return {spec.start, std::min(trajectory_length, spec.start + spec.duration - 1)};
}

const SensorBounds& StealthBounds::at(std::string_view sensor) const {
  for (const auto& b : sensors)
    if (b.sensor == sensor) return b;
  throw ValidationError("no stealth bounds for sensor '" + std::string(sensor) + "'");
}

StealthBounds derive_stealth_bounds(std::span<const EngineTrajectory> training,
                                    std::span<const std::string> sensors) {
  StealthBounds out;
  for (const auto& tag : sensors) {
    const auto idx = cmapss::require_sensor(tag);
    SensorBounds b{tag, std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity()};
    for (const auto& traj : training)
      for (const auto& row : traj.rows) {
        b.z_min = std::min(b.z_min, row.sensors[idx]);
        b.z_max = std::max(b.z_max, row.sensors[idx]);
      }
    if (b.z_min > b.z_max) throw ValidationError("derive_stealth_bounds: no training rows");
    out.sensors.push_back(b);
  }
  return out;
}

double AttackVector::at(std::string_view sensor, int cycle) const {
  if (!window.contains(cycle)) return 0.0;
  for (std::size_t s = 0; s < sensors.size(); ++s)
    if (sensors[s] == sensor) return lambdas[s][static_cast<std::size_t>(cycle - window.start)];
  return 0.0;
}

AttackVector AttackVector::zero(const EngineTrajectory& trajectory) {
  AttackVector v;
  v.engine_id = trajectory.engine_id;
  v.trajectory_length = trajectory.length();
  return v;
}

std::uint64_t engine_seed(const AttackSpec& spec, int engine_id) {
  return mix_seed(mix_seed(spec.seed, "attack"), static_cast<std::uint64_t>(engine_id));
}

AttackVector build_attack_vector(const AttackSpec& spec, const EngineTrajectory& trajectory,
                                 const StealthBounds& bounds) {
  spec.validate();
  AttackVector v;
  v.engine_id = trajectory.engine_id;
  v.trajectory_length = trajectory.length();
  v.window = attack_window(spec, static_cast<int>(trajectory.length()));
  v.sensors = spec.sensors;
  v.lambdas.assign(spec.sensors.size(), std::vector<double>(static_cast<std::size_t>(v.window.length())));
  if (v.window.empty()) return v;

  std::vector<std::size_t> idx;
  std::vector<const SensorBounds*> lim;
  for (const auto& s : spec.sensors) {
    idx.push_back(cmapss::require_sensor(s));
    lim.push_back(&bounds.at(s));
  }
  Rng rng(engine_seed(spec, trajectory.engine_id));
  for (int cycle = v.window.start; cycle <= v.window.end; ++cycle) {
    const auto& row = trajectory.rows[static_cast<std::size_t>(cycle - 1)];
    for (std::size_t s = 0; s < idx.size(); ++s) {
      const double rate =
          spec.noise == NoiseKind::Random ? rng.uniform(spec.lo_rate, spec.hi_rate) : spec.rate;
      const double x = row.sensors[idx[s]];
      const double z = std::clamp(x + spec.direction * rate * x, lim[s]->z_min, lim[s]->z_max);
      v.lambdas[s][static_cast<std::size_t>(cycle - v.window.start)] = z - x;
    }
  }
  return v;
}

EngineTrajectory inject(const EngineTrajectory& trajectory, const AttackVector& vector) {
  if (vector.trajectory_length != trajectory.length() || vector.engine_id != trajectory.engine_id)
    throw ShapeError("inject: attack vector was built for a different trajectory");
  EngineTrajectory out = trajectory;
  if (vector.window.empty()) return out;
  if (vector.window.start < 1 || vector.window.end > static_cast<int>(trajectory.length()))
    throw ShapeError("inject: attack window outside the trajectory");
  for (std::size_t s = 0; s < vector.sensors.size(); ++s) {
    const auto idx = cmapss::require_sensor(vector.sensors[s]);
    if (vector.lambdas[s].size() != static_cast<std::size_t>(vector.window.length()))
      throw ShapeError("inject: lambda count does not match the window");
    for (int cycle = vector.window.start; cycle <= vector.window.end; ++cycle) {
      const double lambda = vector.lambdas[s][static_cast<std::size_t>(cycle - vector.window.start)];
      if (lambda != 0.0) out.rows[static_cast<std::size_t>(cycle - 1)].sensors[idx] += lambda;
    }
  }
  return out;
}

std::vector<EngineTrajectory> attack_dataset(const AttackSpec& spec,
                                             std::span<const EngineTrajectory> trajectories,
                                             const StealthBounds& bounds) {
  std::vector<EngineTrajectory> out;
  out.reserve(trajectories.size());
  for (const auto& t : trajectories) out.push_back(inject(t, build_attack_vector(spec, t, bounds)));
  return out;
}

StealthReport stealth_check(std::span<const EngineTrajectory> attacked, const StealthBounds& bounds,
                            std::span<const std::string> sensors) {
  StealthReport report;
  for (const auto& tag : sensors) {
    const auto idx = cmapss::require_sensor(tag);
    const auto& b = bounds.at(tag);
    for (const auto& traj : attacked)
      for (const auto& row : traj.rows) {
        const double z = row.sensors[idx];
        if (!(z >= b.z_min && z <= b.z_max))
          report.violations.push_back({traj.engine_id, tag, row.cycle, z});
      }
  }
  report.stealthy = report.violations.empty();
  return report;
}

}  // namespace rulfdia::fdia
