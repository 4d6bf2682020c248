#include "rulfdia/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "rulfdia/errors.hpp"
#include "rulfdia/eval.hpp"
#include "rulfdia/nn/serialize.hpp"
#include "rulfdia/synthetic.hpp"

namespace rulfdia::cli {

namespace fs = std::filesystem;
using cmapss::EngineTrajectory;
using Json = nlohmann::ordered_json;
using text::format_double;

namespace {

// ---------------------------------------------------------------------------
// Artifact staging

class Artifacts {
 public:
  void add(std::string name, std::string content) { files_.emplace_back(std::move(name), std::move(content)); }

  void commit(const fs::path& dir, std::ostream& log) const {
    fs::create_directories(dir);
    for (const auto& [name, content] : files_) {
      const auto target = dir / name;
      const auto tmp = dir / (name + ".tmp");
      {
        std::ofstream f(tmp, std::ios::binary);
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) throw CommandError("cannot write " + tmp.string());
      }
      fs::rename(tmp, target);
      log << "wrote " << target.string() << '\n';
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

eval::ArtifactStamp stamp_of(const RunConfig& cfg) { return {cfg.hash(), cfg.seed}; }

std::string stamp_line(const RunConfig& cfg) {
  std::ostringstream s;
  eval::write_stamp_line(s, stamp_of(cfg));
  return s.str();
}

Json stamp_json(const RunConfig& cfg) {
  return Json{{"tool_version", RULFDIA_VERSION}, {"config_hash", cfg.hash()}, {"seed", cfg.seed}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json config_json(const RunConfig& cfg) {
  Json j = Json::object();
  for (const auto& [k, v] : cfg.resolved()) j[k] = v;
  return j;
}

// ---------------------------------------------------------------------------
// Inputs

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw CommandError("missing " + what + ": " + p.string());
}

std::vector<EngineTrajectory> read_checked(const fs::path& p) {
  auto trajs = cmapss::read_cmapss_file(p);
  for (const auto& t : trajs) cmapss::validate(t);
  return trajs;
}

eval::TestSet read_test(const RunConfig& cfg) {
  eval::TestSet t{read_checked(cfg.test_path()), cmapss::read_rul_file(cfg.rul_path())};
  if (t.trajectories.size() != t.final_ruls.size())
    throw ValidationError(cfg.rul_path().string() + " has " + std::to_string(t.final_ruls.size()) +
                          " values for " + std::to_string(t.trajectories.size()) + " test engines");
  return t;
}

fs::path stats_path(const RunConfig& cfg) { return cfg.out_dir / "stats.txt"; }
fs::path model_path(const RunConfig& cfg) { return cfg.out_dir / "model.bin"; }

std::string attacked_name(const std::string& cell) { return "attacked_" + cell + ".txt"; }
std::string attacked_rul_name(const std::string& cell) { return "attacked_" + cell + "_rul.txt"; }

cmapss::NormStats load_stats(const RunConfig& cfg) {
  const auto p = stats_path(cfg);
  require_file(p, "normalization stats (run prepare first)");
  std::ifstream in(p);
  auto stats = cmapss::read_norm_stats(in);
  if (stats.include_op_settings != cfg.include_op_settings)
    throw CommandError(p.string() + " was prepared with a different data.include_op_settings");
  return stats;
}

nn::ModelParams load_model(const RunConfig& cfg, const cmapss::NormStats& stats) {
  const auto p = model_path(cfg);
  require_file(p, "trained weights (run train first)");
  auto model = nn::load_params_file(p);
  if (model.spec.input_dim != stats.feature_dim())
    throw CommandError(p.string() + " expects " + std::to_string(model.spec.input_dim) +
                       " features but the stats give " + std::to_string(stats.feature_dim()));
  return model;
}

eval::TestSet load_attacked(const RunConfig& cfg, const std::string& cell) {
  const auto data = cfg.out_dir / attacked_name(cell);
  const auto ruls = cfg.out_dir / attacked_rul_name(cell);
  require_file(data, "attacked dataset (run attack first)");
  require_file(ruls, "attacked RUL file (run attack first)");
  eval::TestSet t{read_checked(data), cmapss::read_rul_file(ruls)};
  t.validate();
  return t;
}

// Clean test engines with the same ids, in the same order, as `ids_from`.
eval::TestSet matching(const eval::TestSet& clean, const eval::TestSet& ids_from) {
  std::map<int, std::size_t> index;
  for (std::size_t i = 0; i < clean.trajectories.size(); ++i) index[clean.trajectories[i].engine_id] = i;
  eval::TestSet out;
  for (const auto& t : ids_from.trajectories) {
    auto it = index.find(t.engine_id);
    if (it == index.end())
      throw CommandError("attacked engine " + std::to_string(t.engine_id) + " is not in the test set");
    out.trajectories.push_back(clean.trajectories[it->second]);
    out.final_ruls.push_back(clean.final_ruls[it->second]);
  }
  return out;
}

fdia::AttackSpec attack_for_cell(const RunConfig& cfg, const std::string& cell) {
  auto spec = cfg.attack;
  const auto parsed = parse_attack_cell(cell);
  if (!parsed) throw CommandError("unknown attack cell '" + cell + "'");
  spec.variant = parsed->first;
  spec.noise = parsed->second;
  return spec;
}

std::string render(const auto& writer) {
  std::ostringstream s;
  writer(s);
  return s.str();
}

// Plausibility envelope: what the sensors were observed to read on clean
// train and test engines alike.
fdia::StealthBounds envelope(const std::vector<EngineTrajectory>& train, const eval::TestSet& test,
                             std::span<const std::string> sensors) {
  auto all = train;
  all.insert(all.end(), test.trajectories.begin(), test.trajectories.end());
  return fdia::derive_stealth_bounds(all, sensors);
}

Json bounds_json(const fdia::StealthBounds& b) {
  Json j = Json::object();
  for (const auto& s : b.sensors) j[s.sensor] = Json{{"z_min", s.z_min}, {"z_max", s.z_max}};
  return j;
}

}  // namespace

// ---------------------------------------------------------------------------

void cmd_prepare(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  require_file(cfg.train_path(), "training file");
  require_file(cfg.test_path(), "test file");
  require_file(cfg.rul_path(), "RUL file");
  const auto train = read_checked(cfg.train_path());
  const auto test = read_test(cfg);
  if (train.empty()) throw ValidationError(cfg.train_path().string() + " has no rows");
  const auto stats = cmapss::fit_norm_stats(train, cfg.include_op_settings);

  std::ostringstream stats_text;
  stats_text << stamp_line(cfg);
  cmapss::write_norm_stats(stats_text, stats);

  std::size_t train_rows = 0, test_rows = 0;
  std::size_t min_len = train.front().length(), max_len = 0;
  for (const auto& t : train) {
    train_rows += t.length();
    min_len = std::min(min_len, t.length());
    max_len = std::max(max_len, t.length());
  }
  for (const auto& t : test.trajectories) test_rows += t.length();
  const auto longer = test.longer_than(cfg.attack_min_cycles);

  Json features = Json::array();
  for (auto c : stats.feature_channels()) features.push_back(std::string(cmapss::channel_tag(c)));
  Json m;
  m["stamp"] = stamp_json(cfg);
  m["train"] = Json{{"file", cfg.train_file},
                    {"engines", train.size()},
                    {"rows", train_rows},
                    {"min_length", min_len},
                    {"max_length", max_len},
                    {"engine1_length", train.front().engine_id == 1 ? Json(train.front().length()) : Json()}};
  m["test"] = Json{{"file", cfg.test_file},
                   {"rul_file", cfg.rul_file},
                   {"engines", test.trajectories.size()},
                   {"rows", test_rows},
                   {"engines_longer_than_attack_min_cycles", longer.trajectories.size()},
                   {"attack_min_cycles", cfg.attack_min_cycles}};
  m["dropped_constant_channels"] = stats.constant_channels();
  m["include_op_settings"] = stats.include_op_settings;
  m["feature_channels"] = features;
  m["feature_dim"] = stats.feature_dim();

  std::ostringstream csv;
  csv << stamp_line(cfg) << "engine_id,cycle,rul";
  for (auto c : stats.feature_channels()) csv << ',' << cmapss::channel_tag(c);
  csv << '\n';
  for (const auto& t : train) {
    const auto norm = cmapss::normalize(t, stats);
    const auto labels = cmapss::label_rul(t, cfg.labeling);
    for (std::size_t r = 0; r < norm.features.rows(); ++r) {
      csv << t.engine_id << ',' << norm.cycles[r] << ',' << format_double(labels[r]);
      for (double v : norm.features.row(r)) csv << ',' << format_double(v);
      csv << '\n';
    }
  }

  Artifacts a;
  a.add("stats.txt", stats_text.str());
  a.add("manifest.json", dump(m));
  a.add("train_normalized.csv", csv.str());
  a.commit(cfg.out_dir, log);
  out << "train engines " << train.size() << ", test engines " << test.trajectories.size() << " ("
      << longer.trajectories.size() << " longer than " << cfg.attack_min_cycles << " cycles), "
      << stats.feature_dim() << " features\n";
}

void cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  require_file(cfg.train_path(), "training file");
  const auto stats = load_stats(cfg);
  const auto train = read_checked(cfg.train_path());
  const auto spec = cfg.model_for(stats.feature_dim());
  const auto samples = cmapss::make_training_samples(train, stats, cfg.labeling, spec.seq_len);
  if (samples.empty()) throw CommandError("no training window fits seq_len " + std::to_string(spec.seq_len));

  out << "model " << spec.label() << " input_dim=" << spec.input_dim << " dropout=" << format_double(spec.dropout_rate)
      << " activation=" << nn::to_string(spec.activation) << " output_scale=" << format_double(spec.output_scale)
      << '\n';
  out << "train batch_size=" << cfg.train.batch_size << " epochs=" << cfg.train.epochs
      << " learning_rate=" << format_double(cfg.train.learning_rate)
      << " validation_fraction=" << format_double(cfg.train.validation_fraction) << " seed=" << cfg.seed
      << " windows=" << samples.size() << '\n';

  auto result = nn::train(spec, samples, cfg.train, [&](const nn::EpochStats& e) {
    log << "epoch " << e.epoch << " train_loss " << format_double(e.train_loss);
    if (e.validation_loss) log << " validation_loss " << format_double(*e.validation_loss);
    log << '\n';
  });

  std::ostringstream hist;
  hist << stamp_line(cfg) << "epoch,train_loss,validation_loss\n";
  for (const auto& e : result.history) {
    hist << e.epoch << ',' << format_double(e.train_loss) << ',';
    if (e.validation_loss) hist << format_double(*e.validation_loss);
    hist << '\n';
  }
  std::ostringstream weights;
  auto meta = stamp_line(cfg);
  meta.pop_back();
  nn::save_params(weights, result.params, meta);

  Json j;
  j["stamp"] = stamp_json(cfg);
  j["config"] = config_json(cfg);
  j["model_label"] = spec.label();
  j["input_dim"] = spec.input_dim;
  j["parameter_count"] = result.params.parameter_count();
  j["training_windows"] = samples.size();
  j["final_train_loss"] = result.history.empty() ? Json() : Json(result.history.back().train_loss);

  Artifacts a;
  a.add("model.bin", weights.str());
  a.add("history.csv", hist.str());
  a.add("train.json", dump(j));
  a.commit(cfg.out_dir, log);
}

void cmd_attack(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  require_file(cfg.train_path(), "training file");
  require_file(cfg.test_path(), "test file");
  require_file(cfg.rul_path(), "RUL file");
  const auto train = read_checked(cfg.train_path());
  const auto test = read_test(cfg);
  const auto subset = test.longer_than(cfg.attack_min_cycles);
  const auto& spec = cfg.attack;
  const auto bounds = envelope(train, test, spec.sensors);
  const auto attacked = fdia::attack_dataset(spec, subset.trajectories, bounds);
  const auto audit = fdia::stealth_check(attacked, bounds, spec.sensors);
  if (!audit.stealthy) {
    std::ostringstream msg;
    msg << audit.violations.size() << " stealth violations, first: engine " << audit.violations[0].engine_id
        << " sensor " << audit.violations[0].sensor << " cycle " << audit.violations[0].cycle;
    throw CommandError(msg.str());
  }

  const auto cell = spec.cell_name();
  const auto data = render([&](std::ostream& s) { cmapss::write_cmapss(s, attacked); });
  std::string ruls;
  for (double r : subset.final_ruls) ruls += format_double(r) + "\n";

  Json engines = Json::array();
  std::size_t cells_changed = 0;
  for (std::size_t e = 0; e < attacked.size(); ++e) {
    const auto w = fdia::attack_window(spec, static_cast<int>(attacked[e].length()));
    engines.push_back(Json{{"engine_id", attacked[e].engine_id},
                           {"length", attacked[e].length()},
                           {"window_start", w.empty() ? Json() : Json(w.start)},
                           {"window_end", w.empty() ? Json() : Json(w.end)},
                           {"window_length", w.length()}});
    for (std::size_t r = 0; r < attacked[e].length(); ++r)
      for (std::size_t s = 0; s < cmapss::kNumSensors; ++s)
        if (attacked[e].rows[r].sensors[s] != subset.trajectories[e].rows[r].sensors[s]) ++cells_changed;
  }
  std::ostringstream spec_text;
  fdia::write_attack_spec(spec_text, spec);
  Json spec_json = Json::object();
  for (const auto& [k, v] : text::parse_key_values(spec_text.str())) spec_json[k] = v;

  Json j;
  j["stamp"] = stamp_json(cfg);
  j["cell"] = cell;
  j["attack"] = spec_json;
  j["attacked_sensors"] = spec.sensors;
  j["bounds"] = bounds_json(bounds);
  j["bounds_source"] = "clean train and test readings";
  j["attack_min_cycles"] = cfg.attack_min_cycles;
  j["n_engines"] = attacked.size();
  j["cells_changed"] = cells_changed;
  j["engines"] = engines;
  j["stealth"] = Json{{"stealthy", audit.stealthy}, {"violations", audit.violations.size()}};
  j["attacked_file"] = attacked_name(cell);
  j["attacked_file_fnv1a"] = text::hex64(text::fnv1a(data));

  Artifacts a;
  a.add(attacked_name(cell), data);
  a.add(attacked_rul_name(cell), ruls);
  a.add("attack_audit_" + cell + ".json", dump(j));
  a.commit(cfg.out_dir, log);
  out << cell << ": " << attacked.size() << " engines, " << cells_changed << " readings changed, 0 stealth violations\n";
}

void cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  require_file(cfg.test_path(), "test file");
  require_file(cfg.rul_path(), "RUL file");
  const auto stats = load_stats(cfg);
  const auto model = load_model(cfg, stats);
  const auto test = read_test(cfg).longer_than(cfg.eval_min_cycles);
  std::optional<eval::TestSet> attacked;
  if (!cfg.attacked.empty()) attacked = load_attacked(cfg, cfg.attacked);
  const auto stamp = stamp_of(cfg);

  Artifacts a;
  const auto clean = eval::evaluate(model, test, stats, cfg.labeling, cfg.test_file);
  a.add("report_clean.csv", render([&](std::ostream& s) { eval::write_report_csv(s, clean, stamp); }));
  a.add("report_clean.json", render([&](std::ostream& s) { eval::write_report_json(s, clean, stamp); }));
  out << "clean " << clean.model_label << " rmse " << format_double(clean.rmse) << " over " << clean.n_engines
      << " engines";
  if (!clean.excluded_engines.empty()) out << " (" << clean.excluded_engines.size() << " shorter than seq_len skipped)";
  out << '\n';

  if (attacked) {
    const auto& cell = cfg.attacked;
    const auto clean_subset = matching(read_test(cfg), *attacked);
    auto cmp = eval::compare_under_attack(model, clean_subset, attacked->trajectories, stats, cfg.labeling);
    cmp.attacked.dataset_label = attacked_name(cell);
    cmp.clean.dataset_label = cfg.test_file + " (attacked engine subset)";
    a.add("report_" + cell + ".csv", render([&](std::ostream& s) { eval::write_report_csv(s, cmp.attacked, stamp); }));
    a.add("report_" + cell + ".json", render([&](std::ostream& s) { eval::write_report_json(s, cmp.attacked, stamp); }));
    Json j;
    j["stamp"] = stamp_json(cfg);
    j["cell"] = cell;
    j["model_label"] = cmp.clean.model_label;
    j["n_engines"] = cmp.clean.n_engines;
    j["clean_rmse"] = cmp.clean_rmse;
    j["attacked_rmse"] = cmp.attacked_rmse;
    j["degradation_factor"] = std::isfinite(cmp.degradation_factor) ? Json(cmp.degradation_factor) : Json();
    a.add("comparison_" + cell + ".json", dump(j));
    out << cell << " rmse " << format_double(cmp.attacked_rmse) << " vs clean " << format_double(cmp.clean_rmse)
        << " on the same " << cmp.clean.n_engines << " engines, factor " << format_double(cmp.degradation_factor)
        << '\n';
  }
  a.commit(cfg.out_dir, log);
}

void cmd_piecewise(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  require_file(cfg.test_path(), "test file");
  require_file(cfg.rul_path(), "RUL file");
  const auto stats = load_stats(cfg);
  const auto model = load_model(cfg, stats);
  const auto test = read_test(cfg);
  std::optional<eval::TestSet> attacked;
  if (!cfg.attacked.empty()) attacked = load_attacked(cfg, cfg.attacked);

  const int id = cfg.piecewise_engine;
  auto find = [id](const eval::TestSet& set) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < set.trajectories.size(); ++i)
      if (set.trajectories[i].engine_id == id) return i;
    return std::nullopt;
  };
  const auto ci = find(test);
  if (!ci) throw CommandError("engine " + std::to_string(id) + " is not in the test set");
  const auto& traj = test.trajectories[*ci];
  const double final_rul = test.final_ruls[*ci];
  const auto clean = eval::piecewise_trace(model, traj, stats, cfg.labeling, final_rul);

  std::optional<eval::PiecewiseTrace> dirty;
  std::string suffix;
  if (attacked) {
    const auto ai = find(*attacked);
    if (!ai) throw CommandError("engine " + std::to_string(id) + " is not in " + attacked_name(cfg.attacked));
    const auto window = fdia::attack_window(attack_for_cell(cfg, cfg.attacked), static_cast<int>(traj.length()));
    dirty = eval::piecewise_trace(model, attacked->trajectories[*ai], stats, cfg.labeling, final_rul, window);
    suffix = "_" + cfg.attacked;
  }
  const auto stamp = stamp_of(cfg);
  const eval::AlertConfig alerts{cfg.alert_threshold};
  const auto clean_alerts = eval::alert_decisions(clean, alerts);

  Json j;
  j["stamp"] = stamp_json(cfg);
  j["engine_id"] = id;
  j["model_label"] = model.spec.label();
  j["first_cycle"] = clean.points.front().cycle;
  j["last_cycle"] = clean.points.back().cycle;
  j["n_points"] = clean.points.size();
  j["alert_threshold"] = cfg.alert_threshold;
  j["clean_trace_rmse"] = clean.rmse();
  j["clean_first_alert_cycle"] = clean_alerts.first_alert_cycle ? Json(*clean_alerts.first_alert_cycle) : Json();
  if (dirty) {
    const auto dirty_alerts = eval::alert_decisions(*dirty, alerts);
    j["cell"] = cfg.attacked;
    j["attack_window"] = dirty->attack_window && !dirty->attack_window->empty()
                             ? Json::array({dirty->attack_window->start, dirty->attack_window->end})
                             : Json();
    j["attacked_trace_rmse"] = dirty->rmse();
    j["attacked_first_alert_cycle"] =
        dirty_alerts.first_alert_cycle ? Json(*dirty_alerts.first_alert_cycle) : Json();
  }
  const auto base = "trace_engine" + std::to_string(id) + suffix;
  Artifacts a;
  a.add(base + ".csv", render([&](std::ostream& s) {
          eval::write_trace_csv(s, clean, dirty ? &*dirty : nullptr, stamp);
        }));
  a.add(base + ".json", dump(j));
  a.commit(cfg.out_dir, log);
  out << "engine " << id << ": " << clean.points.size() << " points, cycles " << clean.points.front().cycle << ".."
      << clean.points.back().cycle << '\n';
}

void cmd_study(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  require_file(cfg.train_path(), "training file");
  require_file(cfg.test_path(), "test file");
  require_file(cfg.rul_path(), "RUL file");
  eval::StudyData data;
  data.stats = load_stats(cfg);
  data.train = read_checked(cfg.train_path());
  const auto test = read_test(cfg);
  data.test = test.longer_than(cfg.attack_min_cycles);
  data.labeling = cfg.labeling;
  data.bounds = envelope(data.train, test, cfg.attack.sensors);

  std::vector<nn::ModelSpec> specs;
  for (auto lh : cfg.study_seq_lens) {
    auto s = cfg.model_for(data.stats.feature_dim());
    s.seq_len = lh;
    specs.push_back(s);
  }
  std::vector<fdia::AttackSpec> matrix;
  for (std::size_t c = 0; c < eval::kNumAttackCells; ++c)
    matrix.push_back(attack_for_cell(cfg, std::string(eval::attack_cell_name(c))));

  const auto result = eval::run_study(specs, data, matrix, cfg.train,
                                      [&](const std::string& msg) { log << msg << '\n'; });
  const auto stamp = stamp_of(cfg);
  Artifacts a;
  a.add("study.csv", render([&](std::ostream& s) { eval::write_study_csv(s, result, stamp); }));
  a.add("study.json", render([&](std::ostream& s) { eval::write_study_json(s, result, stamp); }));
  a.commit(cfg.out_dir, log);
  for (const auto& row : result.rows) {
    out << row.config_label << " clean " << format_double(row.clean_rmse);
    for (std::size_t c = 0; c < eval::kNumAttackCells; ++c)
      out << ' ' << eval::attack_cell_name(c) << ' ' << (row.cells[c] ? format_double(*row.cells[c]) : "-");
    out << '\n';
  }
  out << result.note << '\n';
}

void cmd_surrogate(const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  synthetic::SurrogateConfig sc;
  sc.seed = cfg.seed;
  const auto ds = synthetic::generate(sc);
  std::string ruls;
  for (double r : ds.test_ruls) ruls += format_double(r) + "\n";
  Artifacts a;
  a.add(cfg.train_file, render([&](std::ostream& s) { cmapss::write_cmapss(s, ds.train); }));
  a.add(cfg.test_file, render([&](std::ostream& s) { cmapss::write_cmapss(s, ds.test); }));
  a.add(cfg.rul_file, ruls);
  a.commit(cfg.data_dir, log);
  out << "synthetic dataset: " << ds.train.size() << " train and " << ds.test.size() << " test engines in "
      << cfg.data_dir.string() << '\n';
}

}  // namespace rulfdia::cli
