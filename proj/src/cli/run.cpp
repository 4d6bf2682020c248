#include <functional>
#include <ostream>

#include <CLI11.hpp>

#include "rulfdia/cli/commands.hpp"
#include "rulfdia/errors.hpp"

namespace rulfdia::cli {

namespace {

struct CommonFlags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> data_dir;
  std::optional<std::string> attacked;
  std::optional<int> engine;
  std::vector<std::string> sets;
};

using Command = void (*)(const RunConfig&, std::ostream&, std::ostream&);

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config, "key = value config file");
  sub->add_option("--seed", f.seed, "run seed (all randomness derives from it)");
  sub->add_option("--out-dir", f.out_dir, "artifact directory");
  sub->add_option("--data-dir", f.data_dir, "directory holding the C-MAPSS files");
  sub->add_option("--set", f.sets, "override one setting, key=value (repeatable)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"RUL prediction under false data injection"};
  app.set_version_flag("--version", RULFDIA_VERSION);
  app.require_subcommand(1);
  CommonFlags flags;

  struct Entry {
    const char* name;
    const char* help;
    Command fn;
  };
  const Entry entries[] = {
      {"prepare", "fit normalization stats and write the manifest", cmd_prepare},
      {"train", "train a model on the prepared training split", cmd_train},
      {"attack", "write an FDIA-attacked copy of the filtered test set", cmd_attack},
      {"eval", "RMSE on the test set, optionally against an attacked copy", cmd_eval},
      {"piecewise", "per-cycle RUL trace for one test engine", cmd_piecewise},
      {"study", "sequence-length study under all four attack cells", cmd_study},
      {"surrogate", "write a synthetic FD001-shaped dataset into --data-dir", cmd_surrogate},
  };
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    add_common(sub, flags);
    if (std::string_view(e.name) == "eval" || std::string_view(e.name) == "piecewise")
      sub->add_option("--attacked", flags.attacked, "attack cell to compare, e.g. interim_random");
    if (std::string_view(e.name) == "piecewise") sub->add_option("--engine", flags.engine, "test engine id");
    subs.emplace_back(sub, e.fn);
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    text::KeyValues overrides;
    for (const auto& s : flags.sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ParseError("--set expects key=value, got '" + s + "'");
      overrides.emplace_back(std::string(text::trim(s.substr(0, eq))), std::string(text::trim(s.substr(eq + 1))));
    }
    if (flags.seed) overrides.emplace_back("seed", std::to_string(*flags.seed));
    if (flags.out_dir) overrides.emplace_back("out_dir", *flags.out_dir);
    if (flags.data_dir) overrides.emplace_back("data.dir", *flags.data_dir);
    if (flags.attacked) overrides.emplace_back("attacked", *flags.attacked);
    if (flags.engine) overrides.emplace_back("piecewise.engine", std::to_string(*flags.engine));
    std::optional<std::filesystem::path> file;
    if (flags.config) file = *flags.config;
    const auto cfg = load_config(file, overrides);
    for (const auto& [sub, fn] : subs)
      if (sub->parsed()) fn(cfg, out, err);
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace rulfdia::cli
