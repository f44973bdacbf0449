#pragma once

#include <string>
#include <vector>

#include "cusp/dyson.hpp"
#include "cusp/model.hpp"

namespace cusp {
namespace io {

/// Model documents are JSON with either a named family or explicit arrays;
/// see the README for the key set.
ModelSpec load_model(const std::string& path);
ModelSpec model_from_json_text(const std::string& text);

void write_text(const std::string& path, const std::string& content);

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

std::vector<double> read_csv_column(const std::string& path, std::size_t column);

void write_profile_csv(const std::string& path, const DensityProfile& profile);

/// Minimal polyline plot; series share the x grid.
void write_svg_curves(const std::string& path, const std::string& title,
                      const std::vector<double>& x,
                      const std::vector<std::pair<std::string, std::vector<double>>>& series);

std::uint64_t fnv1a(const std::string& text);

/// Reproducibility manifest: command, parameter document, seed, config hash.
std::string manifest_json(const std::string& command, const std::string& params_json,
                          std::uint64_t seed);

}  // namespace io
}  // namespace cusp
