#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "rulfdia/nn/model.hpp"

namespace rulfdia::nn {

/// Current weight container version. Layout is documented in docs/formats.md.
inline constexpr std::uint32_t kWeightFormatVersion = 1;

/// `metadata` is an opaque text block stored alongside the spec (the CLI
/// puts its provenance stamp there).
void save_params(std::ostream& out, const ModelParams& params, std::string_view metadata = {});
ModelParams load_params(std::istream& in, std::string* metadata = nullptr);

void save_params_file(const std::filesystem::path& path, const ModelParams& params,
                      std::string_view metadata = {});
ModelParams load_params_file(const std::filesystem::path& path, std::string* metadata = nullptr);

}  // namespace rulfdia::nn
