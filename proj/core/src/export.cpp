#include "switchstab/export.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace switchstab {

using nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

namespace {

json numbers(std::span<const double> v) {
  json out = json::array();
  for (double x : v) out.push_back(json_number(x));
  return out;
}

json bound_json(const KInfinityBound& b) { return {{"coeff", json_number(b.coeff)}, {"power", json_number(b.power)}}; }

double read_number(const json& j, const char* what) {
  if (!j.is_number()) throw std::invalid_argument(std::string("controller JSON: expected a number for ") + what);
  return j.get<double>();
}

Matrix read_matrix(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument(std::string("controller JSON: bad matrix ") + what);
  std::vector<std::vector<double>> rows;
  for (const auto& r : j) {
    if (!r.is_array()) throw std::invalid_argument(std::string("controller JSON: bad matrix ") + what);
    std::vector<double> row;
    for (const auto& v : r) row.push_back(read_number(v, what));
    rows.push_back(std::move(row));
  }
  return Matrix::from_rows(rows);
}

Polynomial read_polynomial(const json& j, std::size_t n) {
  if (!j.is_array()) throw std::invalid_argument("controller JSON: polynomial must be a list of monomials");
  std::vector<Monomial> terms;
  for (const auto& t : j) {
    Monomial m;
    m.coeff = read_number(t.at("coeff"), "coeff");
    m.exponents = t.at("exponents").get<std::vector<unsigned>>();
    terms.push_back(std::move(m));
  }
  return Polynomial(n, std::move(terms));
}

template <class Writer>
std::string csv(const char* header, Writer&& rows) {
  std::string out = header;
  out += '\n';
  rows(out);
  return out;
}

}  // namespace

json to_json(const Matrix& m) {
  json out = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) out.push_back(numbers(m.row(i)));
  return out;
}

json to_json(const Polynomial& p) {
  json out = json::array();
  for (const auto& t : p.terms()) out.push_back({{"coeff", json_number(t.coeff)}, {"exponents", t.exponents}});
  return out;
}

json to_json(const LyapunovSpec& v) {
  if (v.is_quadratic()) return {{"quadratic", to_json(v.matrix())}};
  return {{"polynomial", to_json(std::get<PolynomialLyapunov>(v.spec()).form)}};
}

json to_json(const ConditionVerdict& v) {
  json out{{"condition", v.condition},
           {"satisfied", v.satisfied},
           {"margin", json_number(v.margin)},
           {"terms", numbers(v.terms)}};
  out["value"] = v.inapplicable_reason ? json(nullptr) : json_number(v.value());
  out["inapplicable_reason"] = v.inapplicable_reason ? json(*v.inapplicable_reason) : json(nullptr);
  return out;
}

json to_json(const CertificateFamily& cert) {
  json out;
  out["V"] = json::array();
  for (const auto& v : cert.V) out["V"].push_back(to_json(v));
  out["lambda"] = cert.lambda ? numbers(*cert.lambda) : json(nullptr);
  out["lambda_matrix"] = cert.lambda_matrix ? to_json(*cert.lambda_matrix) : json(nullptr);
  out["mu"] = json_number(cert.mu);
  out["alpha1"] = bound_json(cert.alpha1);
  out["alpha2"] = bound_json(cert.alpha2);
  return out;
}

json to_json(const Violation& v) {
  return {{"inequality", v.inequality},
          {"mode_i", v.mode_i + 1},
          {"mode_j", v.mode_j + 1},
          {"x", numbers(v.x)},
          {"residual", json_number(v.residual)}};
}

json to_json(const DecayReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"j", e.j},
                       {"count", e.count},
                       {"mean", json_number(e.mean)},
                       {"std_error", json_number(e.std_error)},
                       {"bound", json_number(e.bound)},
                       {"ratio", json_number(e.ratio)},
                       {"pass", e.pass},
                       {"censored", e.censored}});
  return {{"contraction", json_number(r.contraction)},
          {"log_contraction", json_number(std::log(r.contraction))},
          {"fitted_slope", json_number(r.fitted_slope)},
          {"pass", r.pass},
          {"pass_all_entries", r.pass_all_entries},
          {"entries", std::move(entries)}};
}

json to_json(const ProbabilityEstimate& p) {
  return {{"estimate", json_number(p.estimate)},
          {"lower", json_number(p.lower)},
          {"upper", json_number(p.upper)},
          {"exceed", p.exceed},
          {"trials", p.trials}};
}

json summary_json(const EnsembleStats& stats) {
  json out;
  out["trials"] = stats.trials;
  out["master_seed"] = stats.master_seed;
  out["horizon"] = json_number(stats.horizon);
  out["tail_start"] = json_number(stats.tail_start);
  out["divergent_count"] = stats.divergent_count;
  const auto terminal = stats.terminal_norms();
  const auto sup = stats.sup_norms();
  out["median_terminal_norm"] = json_number(median(terminal));
  out["median_sup_norm"] = json_number(median(sup));
  out["fraction_terminal_below_1e-2"] = json_number(stats.fraction_terminal_below(1e-2));
  out["report_times"] = numbers(stats.report_times);
  out["mean_alpha1"] = numbers(stats.mean_alpha1);
  if (!stats.mean_v.empty()) {
    out["mean_v"] = numbers(stats.mean_v);
    double sup_mean_v = 0.0;
    for (double v : stats.mean_v)
      if (std::isfinite(v)) sup_mean_v = std::max(sup_mean_v, v);
    out["sup_mean_v"] = json_number(sup_mean_v);
  }
  json sw = json::array();
  for (std::size_t j = 0; j < stats.v_at_switches.size(); ++j) {
    const auto& s = stats.v_at_switches[j];
    sw.push_back({{"j", j}, {"mean", json_number(s.mean)}, {"std_error", json_number(s.std_error)}, {"count", s.count}});
  }
  out["v_at_switches"] = std::move(sw);
  return out;
}

json controller_json(const ControllerSpec& spec, const CertificateFamily& cert) {
  json out;
  out["schema_version"] = kSchemaVersion;
  out["kind"] = to_string(spec.kind);
  out["mode_dependent"] = spec.mode_dependent();
  switch (spec.kind) {
    case ControllerKind::Universal: {
      out["lambda"] = numbers(spec.lambda.empty() ? cert.rates() : spec.lambda);
      out["V"] = json::array();
      for (const auto& v : cert.V) out["V"].push_back(to_json(v));
      out["mu"] = json_number(cert.mu);
      break;
    }
    case ControllerKind::LinearGain:
      out["K"] = to_json(spec.gain);
      break;
    case ControllerKind::Polynomial:
      out["dimension"] = spec.components.front().dimension();
      out["components"] = json::array();
      for (const auto& p : spec.components) out["components"].push_back(to_json(p));
      break;
  }
  return out;
}

ParsedController parse_controller_json(const json& j) {
  try {
    ParsedController out;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "universal") {
      out.spec.kind = ControllerKind::Universal;
      for (const auto& v : j.at("lambda")) out.spec.lambda.push_back(read_number(v, "lambda"));
      for (const auto& v : j.at("V")) {
        if (v.contains("quadratic")) {
          out.lyapunov.push_back(LyapunovSpec::quadratic(read_matrix(v.at("quadratic"), "quadratic")));
        } else {
          const auto& terms = v.at("polynomial");
          if (terms.empty()) throw std::invalid_argument("controller JSON: empty polynomial");
          const std::size_t n = terms.front().at("exponents").size();
          out.lyapunov.push_back(LyapunovSpec::polynomial(read_polynomial(terms, n)));
        }
      }
    } else if (kind == "linear_gain") {
      out.spec.kind = ControllerKind::LinearGain;
      out.spec.gain = read_matrix(j.at("K"), "K");
    } else if (kind == "polynomial") {
      out.spec.kind = ControllerKind::Polynomial;
      const std::size_t n = j.at("dimension").get<std::size_t>();
      for (const auto& c : j.at("components")) out.spec.components.push_back(read_polynomial(c, n));
    } else {
      throw std::invalid_argument("controller JSON: unknown kind " + kind);
    }
    return out;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("controller JSON: ") + e.what());
  }
}

std::string trajectories_csv(const EnsembleStats& stats) {
  return csv("index,seed,sup_norm,terminal_norm,tail_sup,jumps,divergent", [&](std::string& out) {
    for (const auto& r : stats.records) {
      out += std::to_string(r.index) + ',' + std::to_string(r.seed) + ',' + format_number(r.sup_norm) + ',' +
             format_number(r.terminal_norm) + ',' + format_number(r.tail_sup) + ',' + std::to_string(r.jumps) +
             ',' + (r.divergent ? "1" : "0") + '\n';
    }
  });
}

std::string path_csv(const SwitchingPath& path) {
  return csv("index,time,mode", [&](std::string& out) {
    for (std::size_t k = 0; k < path.times.size(); ++k)
      out += std::to_string(k) + ',' + format_number(path.times[k]) + ',' + std::to_string(path.modes[k] + 1) + '\n';
  });
}

std::string trajectory_csv(const Trajectory& traj) {
  std::string header = "time,mode";
  for (std::size_t i = 0; i < traj.dimension; ++i) header += ",x_" + std::to_string(i + 1);
  header += ",norm";
  return csv(header.c_str(), [&](std::string& out) {
    for (std::size_t k = 0; k < traj.size(); ++k) {
      out += format_number(traj.times[k]) + ',' + std::to_string(traj.modes[k] + 1);
      for (double v : traj.state(k)) out += ',' + format_number(v);
      out += ',' + format_number(norm2(traj.state(k))) + '\n';
    }
  });
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

}  // namespace switchstab
