#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

#include "momentdro/moments.hpp"
#include "momentdro/oracle.hpp"

namespace momentdro::cli {

/// Run metadata attached to every output: command name, the resolved
/// parameter set, seed, library version, and a UTC timestamp.
nlohmann::json make_manifest(const std::string& command,
                             const nlohmann::json& params, unsigned seed);

nlohmann::json bound_json(const MomentSpec& spec, double q,
                          bool with_distribution, bool with_dual,
                          bool verify);

nlohmann::json newsvendor_json(const MomentSpec& spec,
                               const std::string& model, double eta);

struct SweepAxis {
  double lo = 0.0;
  double hi = 1.0;
  int n = 1;
};

/// Parses "lo:hi:n" range syntax.
SweepAxis parse_range(const std::string& text);

std::string sweep_csv(double mu1, double mu2, double a, double b,
                      const std::string& vary, const SweepAxis& rho_axis,
                      const SweepAxis& eta_axis, double fixed_rho,
                      double fixed_eta);

nlohmann::json oracle_json(const MomentSpec& spec,
                           std::optional<double> q,
                           std::optional<double> prob_below,
                           const GridConfig& grid);

nlohmann::json sdp_export_json(const MomentSpec& spec,
                               std::optional<double> q,
                               const std::optional<std::string>& pieces_path,
                               const std::string& out_path);

/// Resolves an output path against MOMENTDRO_OUT_DIR for bare file
/// names.
std::string resolve_out_path(const std::string& path);

/// Full command-line entry point; returns the process exit code
/// (0 ok, 2 input, 3 numeric, 4 I/O).
int run(int argc, const char* const* argv);

}  // namespace momentdro::cli
