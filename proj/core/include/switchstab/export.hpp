// JSON and CSV serialization of verdicts, ensemble statistics, paths,
// trajectories and controllers. Non-finite numbers are written as the
// strings "inf", "-inf" or "nan" in JSON.
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "switchstab/certificates.hpp"
#include "switchstab/conditions.hpp"
#include "switchstab/dynamics.hpp"
#include "switchstab/montecarlo.hpp"
#include "switchstab/signal.hpp"
#include "switchstab/synthesis.hpp"

namespace switchstab {

inline constexpr int kSchemaVersion = 1;

nlohmann::json json_number(double v);
nlohmann::json to_json(const Matrix& m);
nlohmann::json to_json(const Polynomial& p);
nlohmann::json to_json(const LyapunovSpec& v);
nlohmann::json to_json(const ConditionVerdict& v);
nlohmann::json to_json(const CertificateFamily& cert);
nlohmann::json to_json(const Violation& v);
nlohmann::json to_json(const DecayReport& r);
nlohmann::json to_json(const ProbabilityEstimate& p);
/// Summary of an ensemble: trial counts, order statistics, mean curves and
/// per-switch V statistics. The per-trajectory table goes to CSV.
nlohmann::json summary_json(const EnsembleStats& stats);

/// Controller description sufficient to rebuild the law: kind, rates,
/// Lyapunov functions (universal) or gain / polynomial components.
nlohmann::json controller_json(const ControllerSpec& spec, const CertificateFamily& cert);

struct ParsedController {
  ControllerSpec spec;
  std::vector<LyapunovSpec> lyapunov;  ///< universal only
};
/// Inverse of controller_json. Throws std::invalid_argument on malformed input.
ParsedController parse_controller_json(const nlohmann::json& j);

/// Shortest round-trip decimal form ("inf", "-inf", "nan" for non-finite values).
std::string format_number(double v);

/// index, seed, sup_norm, terminal_norm, tail_sup, jumps, divergent
std::string trajectories_csv(const EnsembleStats& stats);
/// index, time, mode (modes 1-based)
std::string path_csv(const SwitchingPath& path);
/// time, mode, x_1..x_n, norm
std::string trajectory_csv(const Trajectory& traj);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace switchstab
