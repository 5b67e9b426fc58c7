// JSON scenario files: system, switching law, certificate, controller and
// run configuration. Modes are numbered from 1 in files and from 0 in code.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "switchstab/certificates.hpp"
#include "switchstab/dynamics.hpp"
#include "switchstab/montecarlo.hpp"
#include "switchstab/signal.hpp"
#include "switchstab/synthesis.hpp"

namespace switchstab {

/// A malformed scenario. Syntax errors carry line/column; semantic errors a
/// JSON-pointer field path such as "/switching/rate".
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string message, std::string field, std::size_t line = 0, std::size_t column = 0);

  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::string field_;
  std::size_t line_;
  std::size_t column_;
};

struct RunConfig {
  Vector x0;
  double horizon = 20.0;
  double step = 1e-3;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  double tail_start = 0.0;
  std::vector<double> epsilons{1e-2};
  std::size_t report_points = 201;
};

/// Certificate as written in the file; unspecified constants are derived.
struct CertificateInput {
  std::vector<LyapunovSpec> V;
  std::optional<Vector> lambda;
  std::optional<Matrix> lambda_matrix;
  std::optional<double> mu;
  std::optional<KInfinityBound> alpha1;
  std::optional<KInfinityBound> alpha2;
};

struct ScenarioFile {
  std::string name;
  SubsystemFamily family;
  SwitchingLaw law;
  std::optional<CertificateInput> certificate;
  std::optional<ControllerSpec> controller;
  RunConfig run;
};

ScenarioFile parse_scenario(std::string_view text);
/// Throws ScenarioError (also when the file cannot be read).
ScenarioFile load_scenario(const std::filesystem::path& path);

/// How the certificate constants were obtained.
struct ResolvedCertificate {
  CertificateFamily cert;
  bool extracted = false;  ///< λ / μ / α computed from quadratic certificates of linear drifts
};

/// Completes the certificate for `family` (the open loop, or the closed loop
/// when a controller is used). Declared constants take precedence; the rest
/// are extracted for linear drifts with quadratic V_i. Throws
/// std::invalid_argument when a required constant can be neither read nor
/// extracted.
ResolvedCertificate resolve_certificate(const CertificateInput& input, const SubsystemFamily& family);

/// Scenario for run_ensemble; the closed loop when `controller` is given.
Scenario make_scenario(const ScenarioFile& file, std::optional<CertificateFamily> cert,
                       std::shared_ptr<const FeedbackLaw> controller = nullptr);

}  // namespace switchstab
