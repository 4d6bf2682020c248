#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "rulfdia/cli/config.hpp"

namespace rulfdia::cli {

/// Missing inputs, stealth violations and other failures a command reports
/// and exits nonzero for.
class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Commands read inputs, build every artifact in memory and only then write
/// them into cfg.out_dir, so a failing command leaves nothing behind.
/// `out` gets the human-readable summary, `log` progress lines.
void cmd_prepare(const RunConfig& cfg, std::ostream& out, std::ostream& log);
void cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& log);
void cmd_attack(const RunConfig& cfg, std::ostream& out, std::ostream& log);
void cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& log);
void cmd_piecewise(const RunConfig& cfg, std::ostream& out, std::ostream& log);
void cmd_study(const RunConfig& cfg, std::ostream& out, std::ostream& log);
/// Writes an FD001-shaped synthetic dataset into cfg.data_dir.
void cmd_surrogate(const RunConfig& cfg, std::ostream& out, std::ostream& log);

/// Parses `args` (args[0] is the program name), runs the command and returns
/// the exit status: 0 on success, 1 when a command fails, 2 on bad usage.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rulfdia::cli
