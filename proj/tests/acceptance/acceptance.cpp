// Acceptance gate: one PASS/FAIL line per criterion.
//
//   acceptance --data-dir <FD001 dir>   real-data run
//   acceptance --surrogate              same protocol on the synthetic stand-in
//
// Exit status: 0 when every criterion passes, 1 when an evaluated criterion
// fails, 77 when the only failures are criteria that could not be evaluated
// because the FD001 files are absent. In surrogate mode the data-dependent
// criteria (3, 4, 5, 8, 10) are informational and never set the exit status.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rulfdia/cli/commands.hpp"
#include "rulfdia/cmapss.hpp"
#include "rulfdia/nn/layers.hpp"
#include "support/gradcheck_oracle.hpp"

namespace fs = std::filesystem;
using namespace rulfdia;
using Json = nlohmann::json;

namespace {

// Tolerances and settings pinned by the acceptance criteria.
constexpr double kGradEps = 1e-5;
constexpr double kGradTol = 1e-4;
constexpr std::size_t kGradCoords = 50;
constexpr double kGradSeconds = 120;
constexpr double kScalarTol = 1e-5;
constexpr double kSpecGruScalar = 0.556790;  // as printed in the criterion
constexpr double kSpecLstmScalar = 0.231059;
constexpr std::size_t kFd001TrainEngines = 100;
constexpr std::size_t kFd001Engine1Length = 192;
constexpr std::size_t kFd001LongTestEngines = 37;
constexpr double kDeskRmse = 25.0;
constexpr double kFullRmse = 12.0;
constexpr double kDeskSeconds = 15 * 60;
constexpr double kAttackSeconds = 5 * 60;
constexpr double kMinFactor = 2.0;
constexpr double kReturnTolerance = 10.0;
constexpr int kReturnWithin = 60;
constexpr std::size_t kLocalityEngines = 5;
constexpr double kStudyTimeRatio = 4.0;
// Study epochs: the criterion fixes only the lh grid and a runtime budget of
// 4x the desk run; 10 epochs over lh 60..90 fits that budget.
constexpr int kStudyEpochs = 10;

const std::vector<std::string> kCells{"continuous_random", "continuous_biased", "interim_random",
                                      "interim_biased"};
const std::vector<std::string> kAttackedSensors{"T24", "T50", "P30"};

struct Result {
  int id;
  bool pass;
  bool evaluated;
  bool informational;
  std::string detail;
};

std::vector<Result> results;

void report(int id, bool pass, std::string detail, bool informational = false) {
  results.push_back({id, pass, true, informational, detail});
  std::cout << (pass ? "PASS" : "FAIL") << "  " << std::setw(2) << id << "  "
            << (informational ? "[surrogate] " : "") << detail << std::endl;
}

void not_evaluated(int id, const std::string& why) {
  results.push_back({id, false, false, false, why});
  std::cout << "FAIL  " << std::setw(2) << id << "  not evaluated: " << why << std::endl;
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Json read_json(const fs::path& p) { return Json::parse(slurp(p)); }

// Runs one CLI command in-process; throws with its stderr tail on failure.
std::string run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "rulfdia");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) {
    std::string e = err.str();
    throw std::runtime_error(args[1] + " exited " + std::to_string(code) + ": " +
                             e.substr(e.rfind("error:") == std::string::npos ? 0 : e.rfind("error:")));
  }
  return out.str();
}

// ---------------------------------------------------------------------------

void criterion_gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Kind {
    const char* label;
    nn::ModelKind kind;
    const char* prefix;
  };
  const Kind kinds[] = {{"GRU", nn::ModelKind::Gru, "gru"},
                        {"LSTM", nn::ModelKind::Lstm, "lstm"},
                        {"Conv1d", nn::ModelKind::Cnn, "conv"},
                        {"Dense", nn::ModelKind::Cnn, "dense"}};
  bool ok = true;
  double worst = 0.0;
  std::string parts;
  for (const auto& k : kinds) {
    nn::ModelSpec s;
    s.kind = k.kind;
    s.layer_widths = k.kind == nn::ModelKind::Cnn ? std::vector<std::size_t>{4, 3}
                                                  : std::vector<std::size_t>{6, 5};
    s.seq_len = 8;
    s.input_dim = 4;
    s.dense_width = 6;
    Rng rng(mix_seed(11, k.label));
    auto params = nn::ModelParams::random_init(s, rng);
    params.for_each([](std::string_view, nn::Matrix& m) {
      for (auto& v : m.values()) v *= 2.0;
    });
    auto batch = testing::random_batch(s, 3, rng);
    auto r = testing::finite_difference_check(params, batch, k.prefix, kGradCoords, rng, kGradEps, kGradTol);
    ok = ok && r.checked == kGradCoords && r.failed == 0;
    worst = std::max(worst, r.worst_relative_error);
    parts += std::string(parts.empty() ? "" : ", ") + k.label + " " + std::to_string(r.checked - r.failed) +
             "/" + std::to_string(r.checked);
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < kGradSeconds;
  report(1, ok,
         "gradient oracle: " + parts + " coordinates within rel err " + fmt(kGradTol) + " (worst " +
             fmt(worst, 2) + ", eps " + fmt(kGradEps) + "), " + fmt(secs, 3) + " s (limit " +
             fmt(kGradSeconds) + " s)");
}

void criterion_scalar_cells() {
  // Independent evaluation of the same scalar cases from the defining
  // formulas: GRU h = z * tanh(1) with z = sigmoid(1); LSTM h = 0.5 tanh(0.5).
  const double sig1 = 1.0 / (1.0 + std::exp(-1.0));
  const double gru_ref = sig1 * std::tanh(1.0);
  const double lstm_ref = 0.5 * std::tanh(0.5);

  auto g = nn::GruLayerParams::zeros(1, 1);
  g.w_z.fill(1.0);
  g.w_r.fill(1.0);
  g.w_h.fill(1.0);
  const double gru = nn::gru_cell(g, std::vector<double>{1.0}, std::vector<double>{0.0})[0];
  auto l = nn::LstmLayerParams::zeros(1, 1);
  const double lstm =
      nn::lstm_cell(l, std::vector<double>{0.0}, std::vector<double>{0.0}, std::vector<double>{1.0}).first[0];

  const bool ok = std::abs(gru - gru_ref) < kScalarTol && std::abs(lstm - lstm_ref) < kScalarTol &&
                  std::abs(lstm - kSpecLstmScalar) < kScalarTol;
  report(2, ok,
         "scalar cells: gru_cell " + fmt(gru, 9) + " vs " + fmt(gru_ref, 9) + ", lstm_cell " + fmt(lstm, 9) +
             " vs " + fmt(lstm_ref, 9) + " (tol " + fmt(kScalarTol) + "); the criterion's printed GRU value " +
             fmt(kSpecGruScalar, 6) + " is off by " + fmt(std::abs(kSpecGruScalar - gru_ref), 2) +
             " from sigmoid(1)*tanh(1)");
}

struct Paths {
  fs::path data;
  fs::path work;
  bool surrogate = false;
};

std::vector<std::string> common(const Paths& p, const fs::path& out) {
  return {"--data-dir", p.data.string(), "--out-dir", out.string(), "--seed", "0"};
}

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::vector<std::string> sets(std::initializer_list<const char*> kv) {
  std::vector<std::string> out;
  for (const char* s : kv) {
    out.push_back("--set");
    out.push_back(s);
  }
  return out;
}

const auto kDeskModel = sets({"model.kind=gru", "model.layers=32,32", "model.seq_len=30", "train.batch_size=200",
                              "train.epochs=25", "train.learning_rate=0.001"});

void criterion_dataset(const Paths& p) {
  const auto train = cmapss::read_cmapss_file(p.data / "train_FD001.txt");
  const auto test = cmapss::read_cmapss_file(p.data / "test_FD001.txt");
  const std::size_t engine1 = !train.empty() && train.front().engine_id == 1 ? train.front().length() : 0;
  const auto longer = cmapss::filter_engines(test, 130).size();
  const bool ok = train.size() == kFd001TrainEngines && engine1 == kFd001Engine1Length &&
                  longer == kFd001LongTestEngines;
  report(3, ok,
         "dataset facts: " + std::to_string(train.size()) + " train engines (want 100), engine 1 length " +
             std::to_string(engine1) + " (want 192), " + std::to_string(longer) +
             " test engines > 130 cycles (want 37)",
         p.surrogate);
}

// Returns the desk-run duration for criterion 10.
double criterion_desk(const Paths& p, bool full) {
  const auto dir = p.work / "desk";
  run_cli(with({"prepare"}, common(p, dir)));
  const auto t0 = std::chrono::steady_clock::now();
  run_cli(with(with({"train"}, common(p, dir)), kDeskModel));
  run_cli(with(with({"eval"}, common(p, dir)), kDeskModel));
  const double secs = seconds_since(t0);
  const auto rep = read_json(dir / "report_clean.json");
  const double rmse = rep["rmse"];
  bool ok = rmse <= kDeskRmse && secs < kDeskSeconds;
  std::string detail = "desk accuracy: " + rep["model_label"].get<std::string>() + " 25 epochs capped-test RMSE " +
                       fmt(rmse) + " over " + std::to_string(rep["n_engines"].get<int>()) + " engines (limit " +
                       fmt(kDeskRmse) + "), " + fmt(secs, 3) + " s (limit " + fmt(kDeskSeconds) + " s)";
  if (full) {
    const auto fdir = p.work / "full";
    const auto model = sets({"model.kind=gru", "model.layers=100,100,100", "model.seq_len=80", "train.epochs=100"});
    run_cli(with({"prepare"}, common(p, fdir)));
    run_cli(with(with({"train"}, common(p, fdir)), model));
    run_cli(with(with({"eval"}, common(p, fdir)), model));
    const double frmse = read_json(fdir / "report_clean.json")["rmse"];
    ok = ok && frmse <= kFullRmse;
    detail += "; full GRU(100,100,100) lh(80) RMSE " + fmt(frmse) + " (limit " + fmt(kFullRmse) + ")";
  } else {
    detail += "; full configuration not requested (--full)";
  }
  report(4, ok, detail, p.surrogate);
  return secs;
}

// Attacks the desk dir's test subset with all four cells (criteria 5-7 read
// these files).
void run_attacks(const Paths& p) {
  const auto dir = p.work / "desk";
  for (const auto& cell : kCells) {
    const auto variant = cell.substr(0, cell.find('_'));
    const auto noise = cell.substr(cell.find('_') + 1);
    run_cli(with(with({"attack"}, common(p, dir)),
                 {"--set", "attack.variant=" + variant, "--set", "attack.noise=" + noise}));
  }
}

void criterion_degradation(const Paths& p) {
  const auto dir = p.work / "desk";
  const auto t0 = std::chrono::steady_clock::now();
  run_attacks(p);
  std::map<std::string, Json> cmp;
  for (const auto& cell : kCells) {
    run_cli(with(with({"eval"}, common(p, dir)), with(kDeskModel, {"--attacked", cell})));
    cmp[cell] = read_json(dir / ("comparison_" + cell + ".json"));
  }
  const double secs = seconds_since(t0);
  bool all_up = true;
  std::string parts;
  for (const auto& cell : kCells) {
    const double a = cmp[cell]["attacked_rmse"], c = cmp[cell]["clean_rmse"];
    all_up = all_up && a > c;
    parts += cell + " " + fmt(a) + ", ";
  }
  const double cr = cmp["continuous_random"]["attacked_rmse"];
  const double ir = cmp["interim_random"]["attacked_rmse"];
  const double clean = cmp["continuous_random"]["clean_rmse"];
  const double factor = cr / clean;
  const bool ok = all_up && cr > ir && factor >= kMinFactor && secs < kAttackSeconds;
  report(5, ok,
         "attack degradation on " + std::to_string(cmp["continuous_random"]["n_engines"].get<int>()) +
             " engines: clean " + fmt(clean) + "; " + parts + "all attacked > clean: " + (all_up ? "yes" : "no") +
             ", continuous_random > interim_random: " + (cr > ir ? "yes" : "no") +
             ", continuous_random factor " + fmt(factor) + " (need >= " + fmt(kMinFactor) + "), " + fmt(secs, 3) +
             " s (limit " + fmt(kAttackSeconds) + " s)",
         p.surrogate);
}

std::map<int, cmapss::EngineTrajectory> by_id(std::vector<cmapss::EngineTrajectory> v) {
  std::map<int, cmapss::EngineTrajectory> m;
  for (auto& t : v) m[t.engine_id] = std::move(t);
  return m;
}

void criterion_stealth(const Paths& p) {
  const auto dir = p.work / "desk";
  // Independent envelope: observed min/max over the clean train and test files.
  auto all = cmapss::read_cmapss_file(p.data / "train_FD001.txt");
  for (auto& t : cmapss::read_cmapss_file(p.data / "test_FD001.txt")) all.push_back(std::move(t));
  std::map<std::string, std::pair<double, double>> env;
  for (const auto& s : kAttackedSensors) {
    const auto idx = cmapss::require_sensor(s);
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& t : all)
      for (const auto& r : t.rows) {
        lo = std::min(lo, r.sensors[idx]);
        hi = std::max(hi, r.sensors[idx]);
      }
    env[s] = {lo, hi};
  }
  std::size_t violations = 0, audited = 0, checked = 0;
  for (const auto& cell : kCells) {
    const auto audit = read_json(dir / ("attack_audit_" + cell + ".json"));
    audited += audit["stealth"]["violations"].get<std::size_t>();
    for (const auto& t : cmapss::read_cmapss_file(dir / ("attacked_" + cell + ".txt")))
      for (const auto& r : t.rows)
        for (const auto& s : kAttackedSensors) {
          const double v = r.sensors[cmapss::require_sensor(s)];
          ++checked;
          if (v < env[s].first || v > env[s].second) ++violations;
        }
  }
  report(6, violations == 0 && audited == 0,
         "stealth: 4 attacked datasets, " + std::to_string(checked) + " readings of T24/T50/P30 rechecked, " +
             std::to_string(violations) + " outside [Z_min, Z_max]; audits report " + std::to_string(audited) +
             " violations");
}

void criterion_locality(const Paths& p) {
  const auto dir = p.work / "desk";
  const auto clean = by_id(cmapss::read_cmapss_file(p.data / "test_FD001.txt"));
  std::set<std::size_t> allowed;
  for (const auto& s : kAttackedSensors) allowed.insert(cmapss::kNumSettings + cmapss::require_sensor(s));
  std::size_t stray = 0, changed = 0, engines = 0;
  for (const auto& cell : kCells) {
    const bool interim = cell.starts_with("interim");
    const auto attacked = cmapss::read_cmapss_file(dir / ("attacked_" + cell + ".txt"));
    for (std::size_t e = 0; e < std::min(kLocalityEngines, attacked.size()); ++e) {
      ++engines;
      const auto& a = attacked[e];
      const auto& c = clean.at(a.engine_id);
      if (a.length() != c.length()) {
        ++stray;
        continue;
      }
      const int last = interim ? std::min<int>(static_cast<int>(a.length()), 130 + 20 - 1) : static_cast<int>(a.length());
      for (std::size_t r = 0; r < a.length(); ++r) {
        if (a.rows[r].cycle != c.rows[r].cycle) ++stray;
        for (std::size_t ch = 0; ch < cmapss::kNumChannels; ++ch) {
          if (a.rows[r].channel(ch) == c.rows[r].channel(ch)) continue;
          ++changed;
          const int cycle = a.rows[r].cycle;
          if (!allowed.count(ch) || cycle < 130 || cycle > last) ++stray;
        }
      }
    }
  }
  report(7, stray == 0 && changed > 0,
         "attack locality: " + std::to_string(engines) + " engine-cells compared cell by cell, " +
             std::to_string(changed) + " readings differ, " + std::to_string(stray) +
             " outside {T24,T50,P30} x attack window");
}

struct TraceRow {
  int cycle;
  double clean;
  double attacked;
};

std::vector<TraceRow> read_trace(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.starts_with("cycle")) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    rows.push_back({std::stoi(f[0]), std::stod(f[2]), std::stod(f[3])});
  }
  return rows;
}

// First cycle from which the attacked trace stays within tolerance of the
// clean one through the end; nullopt if even the last point is off.
std::optional<int> return_cycle(const std::vector<TraceRow>& rows) {
  std::optional<int> since;
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) {
    if (std::abs(it->attacked - it->clean) > kReturnTolerance) break;
    since = it->cycle;
  }
  return since;
}

void criterion_piecewise(const Paths& p) {
  const auto dir = p.work / "desk";
  const auto audit = read_json(dir / "attack_audit_interim_random.json");
  int engine = -1, length = 0;
  for (const auto& e : audit["engines"])
    if (e["length"].get<int>() > 200) {
      engine = e["engine_id"];
      length = e["length"];
      break;
    }
  if (engine < 0) {
    report(8, false, "piecewise divergence: no attacked test engine has more than 200 cycles", p.surrogate);
    return;
  }
  bool ok = true;
  std::string parts;
  for (const auto& noise : {"random", "biased"}) {
    const std::string icell = std::string("interim_") + noise, ccell = std::string("continuous_") + noise;
    for (const auto& cell : {icell, ccell})
      run_cli(with(with({"piecewise"}, common(p, dir)),
                   with(kDeskModel, {"--engine", std::to_string(engine), "--attacked", cell})));
    const auto base = dir / ("trace_engine" + std::to_string(engine) + "_");
    const auto interim = read_trace(base.string() + icell + ".csv");
    const auto cont = read_trace(base.string() + ccell + ".csv");
    const int window_end = 130 + 20 - 1;
    const auto ir = return_cycle(interim);
    const auto cr = return_cycle(cont);
    const bool i_ok = ir && *ir <= window_end + kReturnWithin;
    const bool c_ok = !cr;
    double cmax = 0.0, imax = 0.0;
    for (const auto& r : cont) cmax = std::max(cmax, std::abs(r.attacked - r.clean));
    for (const auto& r : interim) imax = std::max(imax, std::abs(r.attacked - r.clean));
    ok = ok && i_ok && c_ok;
    parts += std::string(noise) + ": interim back within " + fmt(kReturnTolerance) + " from cycle " +
             (ir ? std::to_string(*ir) : "never") + " (need <= " + std::to_string(window_end + kReturnWithin) +
             ", max gap " + fmt(imax) + "), continuous " + (cr ? "back from cycle " + std::to_string(*cr) : std::string("never back")) +
             " (max gap " + fmt(cmax) + "); ";
  }
  report(8, ok, "piecewise divergence on engine " + std::to_string(engine) + " (" + std::to_string(length) +
                    " cycles): " + parts.substr(0, parts.size() - 2),
         p.surrogate);
}

void criterion_determinism(const Paths& p) {
  const auto small = sets({"model.layers=8", "model.seq_len=30", "train.epochs=2"});
  std::map<std::string, std::string> snap[2];
  for (int i = 0; i < 2; ++i) {
    const auto dir = p.work / (i == 0 ? "repeat_a" : "repeat_b");
    fs::remove_all(dir);
    run_cli(with({"prepare"}, common(p, dir)));
    run_cli(with(with({"train"}, common(p, dir)), small));
    run_cli(with(with({"attack"}, common(p, dir)), small));
    run_cli(with(with({"eval"}, common(p, dir)), with(small, {"--attacked", "continuous_random"})));
    for (const auto& e : fs::directory_iterator(dir)) snap[i][e.path().filename().string()] = slurp(e.path());
  }
  std::size_t differing = 0;
  for (const auto& [name, bytes] : snap[0])
    if (!snap[1].count(name) || snap[1][name] != bytes) ++differing;
  const bool ok = differing == 0 && snap[0].size() == snap[1].size() && !snap[0].empty();
  report(9, ok,
         "determinism: prepare -> train -> attack -> eval run twice with seed 0, " +
             std::to_string(snap[0].size()) + " artifacts, " + std::to_string(differing) + " differ");
}

void criterion_study(const Paths& p, double desk_seconds) {
  const auto dir = p.work / "desk";
  const auto t0 = std::chrono::steady_clock::now();
  const auto model = sets({"model.kind=gru", "model.layers=32,32", "train.batch_size=200", "train.learning_rate=0.001",
                           "study.seq_lens=60,70,80,90"});
  run_cli(with(with({"study"}, common(p, dir)),
               with(model, {"--set", "train.epochs=" + std::to_string(kStudyEpochs)})));
  const double secs = seconds_since(t0);
  const auto j = read_json(dir / "study.json");
  bool values_ok = true;
  std::string rows;
  for (const auto& r : j["rows"]) {
    rows += "lh " + std::to_string(r["seq_len"].get<int>()) + " clean " + fmt(r["clean_rmse"].get<double>()) +
            " mean attacked " + fmt(r["mean_attacked_rmse"].get<double>()) + "; ";
    values_ok = values_ok && r["clean_rmse"].get<double>() >= 0.0;
    for (const auto& cell : kCells) values_ok = values_ok && r[cell].is_number() && r[cell].get<double>() >= 0.0;
  }
  const bool coincide = j["optima_coincide"];
  const std::string note = j["note"];
  const bool surfaced = !coincide || note.find("coincide") != std::string::npos;
  const bool ok = j["rows"].size() == 4 && values_ok && surfaced && secs < kStudyTimeRatio * desk_seconds;
  report(10, ok,
         "sequence-length study (" + std::to_string(kStudyEpochs) + " epochs): " + rows + "note: \"" + note +
             "\"; " + fmt(secs, 3) + " s (limit " + fmt(kStudyTimeRatio) + " x " + fmt(desk_seconds, 3) + " s)",
         p.surrogate);
}

// Runs a criterion; an exception becomes a FAIL line instead of aborting.
template <class F>
void guarded(int id, bool informational, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, false, std::string("error: ") + e.what(), informational);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string data_dir = CMAPSS_DATA_DIR;
  std::string work_dir = (fs::temp_directory_path() / "rulfdia_acceptance").string();
  bool surrogate = false, full = false;
  app.add_option("--data-dir", data_dir, "directory with train_FD001.txt, test_FD001.txt, RUL_FD001.txt");
  app.add_option("--work-dir", work_dir, "scratch directory for artifacts");
  app.add_flag("--surrogate", surrogate, "run on the synthetic stand-in dataset");
  app.add_flag("--full", full, "also train the full GRU(100,100,100) lh(80) configuration");
  CLI11_PARSE(app, argc, argv);

  Paths p;
  p.work = work_dir;
  p.surrogate = surrogate;
  fs::remove_all(p.work);
  fs::create_directories(p.work);
  if (surrogate) {
    p.data = p.work / "data";
    run_cli({"surrogate", "--data-dir", p.data.string(), "--seed", "2024"});
    std::cout << "mode: surrogate (synthetic FD001-shaped data in " << p.data.string()
              << "); criteria 3, 4, 5, 8 and 10 are informational" << std::endl;
  } else {
    p.data = data_dir;
    std::cout << "mode: FD001 from " << p.data.string() << std::endl;
  }

  criterion_gradients();
  criterion_scalar_cells();

  const bool have_data = fs::is_regular_file(p.data / "train_FD001.txt") &&
                         fs::is_regular_file(p.data / "test_FD001.txt") &&
                         fs::is_regular_file(p.data / "RUL_FD001.txt");
  if (!have_data) {
    const std::string why = "FD001 files absent from " + p.data.string();
    for (int id = 3; id <= 10; ++id) not_evaluated(id, why);
  } else {
    const bool info = p.surrogate;
    guarded(3, info, [&] { criterion_dataset(p); });
    double desk_seconds = 0.0;
    bool desk_ok = true;
    guarded(4, info, [&] { desk_seconds = criterion_desk(p, full); });
    desk_ok = desk_seconds > 0.0;
    if (desk_ok) {
      guarded(5, info, [&] { criterion_degradation(p); });
      guarded(6, false, [&] { criterion_stealth(p); });
      guarded(7, false, [&] { criterion_locality(p); });
      guarded(8, info, [&] { criterion_piecewise(p); });
    } else {
      for (int id : {5, 6, 7, 8}) not_evaluated(id, "desk run (criterion 4) did not complete");
    }
    guarded(9, false, [&] { criterion_determinism(p); });
    if (desk_ok)
      guarded(10, info, [&] { criterion_study(p, desk_seconds); });
    else
      not_evaluated(10, "desk run (criterion 4) did not complete");
  }

  int passed = 0, hard_fail = 0, unevaluated = 0;
  for (const auto& r : results) {
    if (r.pass)
      ++passed;
    else if (!r.evaluated)
      ++unevaluated;
    else if (!r.informational)
      ++hard_fail;
  }
  std::cout << "acceptance: " << passed << "/" << results.size() << " PASS";
  if (unevaluated) std::cout << ", " << unevaluated << " not evaluated";
  std::cout << std::endl;
  if (hard_fail) return 1;
  if (unevaluated) return 77;
  return 0;
}
