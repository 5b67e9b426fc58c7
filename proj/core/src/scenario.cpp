#include "switchstab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

namespace switchstab {

using nlohmann::json;

ScenarioError::ScenarioError(std::string message, std::string field, std::size_t line, std::size_t column)
    : std::runtime_error(std::move(message)), field_(std::move(field)), line_(line), column_(column) {}

namespace {

// A JSON value together with its JSON-pointer path, for anchored diagnostics.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ScenarioError("field " + (path_.empty() ? std::string("/") : path_) + ": " + what, path_);
  }

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }

  Node at(const char* key) const {
    if (!j_.is_object()) fail("expected an object");
    if (!j_.contains(key)) fail(std::string("missing required key \"") + key + "\"");
    return Node(j_.at(key), path_ + "/" + key);
  }

  std::optional<Node> find(const char* key) const {
    if (!has(key)) return std::nullopt;
    return at(key);
  }

  std::vector<Node> items() const {
    if (!j_.is_array()) fail("expected an array");
    std::vector<Node> out;
    for (std::size_t k = 0; k < j_.size(); ++k) out.emplace_back(j_[k], path_ + "/" + std::to_string(k));
    return out;
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
  }

  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("must be positive");
    return v;
  }

  std::uint64_t unsigned_integer() const {
    if (!j_.is_number_integer() || (j_.is_number_integer() && !j_.is_number_unsigned() && j_.get<std::int64_t>() < 0))
      fail("expected a non-negative integer");
    return j_.get<std::uint64_t>();
  }

  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  Vector numbers() const {
    Vector out;
    for (const auto& n : items()) out.push_back(n.number());
    return out;
  }

  Matrix matrix() const {
    std::vector<std::vector<double>> rows;
    for (const auto& r : items()) rows.push_back(r.numbers());
    if (rows.empty()) fail("matrix must be non-empty");
    for (const auto& r : rows)
      if (r.size() != rows.front().size() || r.empty()) fail("matrix rows must have equal nonzero length");
    return Matrix::from_rows(rows);
  }

  Mode mode(std::size_t modes) const {
    const auto v = unsigned_integer();
    if (v < 1 || v > modes) fail("mode must lie in 1.." + std::to_string(modes));
    return static_cast<Mode>(v - 1);
  }

 private:
  const json& j_;
  std::string path_;
};

// Runs `build` and re-anchors library validation errors at `node`.
template <class F>
auto anchored(const Node& node, F&& build) {
  try {
    return build();
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    node.fail(e.what());
  } catch (const std::domain_error& e) {
    node.fail(e.what());
  }
}

Polynomial parse_polynomial(const Node& node, std::size_t n) {
  std::vector<Monomial> terms;
  for (const auto& t : node.items()) {
    Monomial m;
    m.coeff = t.at("coeff").number();
    const Node ex = t.at("exponents");
    for (const auto& e : ex.items()) {
      const auto v = e.unsigned_integer();
      if (v > 64) e.fail("exponent too large");
      m.exponents.push_back(static_cast<unsigned>(v));
    }
    if (m.exponents.size() != n) ex.fail("expected " + std::to_string(n) + " exponents");
    terms.push_back(std::move(m));
  }
  return Polynomial(n, std::move(terms));
}

VectorField parse_field(const Node& node, std::size_t n) {
  if (auto lin = node.find("linear")) {
    Matrix a = lin->matrix();
    if (a.rows() != n || a.cols() != n) lin->fail("expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    return anchored(*lin, [&] { return VectorField::linear(std::move(a)); });
  }
  if (auto poly = node.find("polynomial")) {
    std::vector<Polynomial> comps;
    for (const auto& c : poly->items()) comps.push_back(parse_polynomial(c, n));
    if (comps.size() != n) poly->fail("expected one polynomial per state coordinate (" + std::to_string(n) + ")");
    return anchored(*poly, [&] { return VectorField::polynomial(std::move(comps)); });
  }
  node.fail("a field must be {\"linear\": matrix} or {\"polynomial\": [...]}");
}

SubsystemFamily parse_system(const Node& node) {
  const auto n = node.at("dimension").unsigned_integer();
  if (n == 0) node.at("dimension").fail("must be at least 1");
  const auto modes = node.at("modes").unsigned_integer();
  if (modes == 0) node.at("modes").fail("must be at least 1");
  const Node drift_node = node.at("drift");
  std::vector<VectorField> drift;
  for (const auto& f : drift_node.items()) drift.push_back(parse_field(f, n));
  if (drift.size() != modes) drift_node.fail("expected " + std::to_string(modes) + " drift fields");
  std::vector<std::vector<VectorField>> control;
  if (auto cn = node.find("control")) {
    for (const auto& per_mode : cn->items()) {
      std::vector<VectorField> g;
      for (const auto& f : per_mode.items()) g.push_back(parse_field(f, n));
      control.push_back(std::move(g));
    }
    if (control.size() != modes) cn->fail("expected one list of control fields per mode");
  }
  return anchored(node, [&] { return SubsystemFamily(std::move(drift), std::move(control)); });
}

HoldingDistribution parse_holding(const Node& node) {
  const Node kind = node.at("kind");
  const std::string k = kind.string();
  if (k == "exponential") return HoldingDistribution::exponential(node.at("rate").positive());
  if (k == "uniform") return HoldingDistribution::uniform(node.at("T").positive());
  if (k == "point_mass") return HoldingDistribution::point_mass(node.at("T").positive());
  if (k == "tabulated") {
    const Node knots = node.at("knots");
    std::vector<std::pair<double, double>> pts;
    for (const auto& kn : knots.items()) {
      const Vector p = kn.numbers();
      if (p.size() != 2) kn.fail("a knot is [probability, duration]");
      pts.emplace_back(p[0], p[1]);
    }
    return anchored(knots, [&] { return HoldingDistribution::tabulated(std::move(pts)); });
  }
  kind.fail("unknown holding kind \"" + k + "\" (exponential, uniform, point_mass, tabulated)");
}

SwitchingLaw parse_switching(const Node& node, std::size_t modes) {
  const Node cls_node = node.at("class");
  const std::string cls = cls_node.string();
  const Mode sigma0 = node.at("sigma0").mode(modes);
  auto read_q = [&] {
    const Node qn = node.at("q");
    Vector q = qn.numbers();
    if (q.size() != modes) qn.fail("expected " + std::to_string(modes) + " probabilities");
    return std::pair{qn, q};
  };
  if (cls == "EH") {
    const double rate = node.at("rate").positive();
    auto [qn, q] = read_q();
    return anchored(qn, [&] { return SwitchingLaw::eh(rate, std::move(q), sigma0); });
  }
  if (cls == "UH") {
    const double T = node.at("T").positive();
    auto [qn, q] = read_q();
    return anchored(qn, [&] { return SwitchingLaw::uh(T, std::move(q), sigma0); });
  }
  if (cls == "GH") {
    HoldingDistribution holding = parse_holding(node.at("holding"));
    const Node pn = node.at("transition");
    Matrix p = pn.matrix();
    if (p.rows() != modes || p.cols() != modes) pn.fail("expected an N x N transition matrix");
    return anchored(pn, [&] { return SwitchingLaw::gh(std::move(holding), std::move(p), sigma0); });
  }
  cls_node.fail("unknown class \"" + cls + "\" (EH, UH, GH)");
}

KInfinityBound parse_bound(const Node& node) {
  KInfinityBound b;
  b.coeff = node.at("coeff").positive();
  if (auto p = node.find("power")) b.power = p->positive();
  return b;
}

LyapunovSpec parse_lyapunov(const Node& node, std::size_t n) {
  if (auto q = node.find("quadratic")) {
    Matrix p = q->matrix();
    if (p.rows() != n || p.cols() != n) q->fail("expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
    return anchored(*q, [&] { return LyapunovSpec::quadratic(std::move(p)); });
  }
  if (auto poly = node.find("polynomial")) {
    Polynomial form = parse_polynomial(*poly, n);
    return anchored(*poly, [&] { return LyapunovSpec::polynomial(std::move(form)); });
  }
  node.fail("a Lyapunov function must be {\"quadratic\": matrix} or {\"polynomial\": [...]}");
}

CertificateInput parse_certificate(const Node& node, std::size_t modes, std::size_t n) {
  CertificateInput c;
  if (auto pn = node.find("P")) {
    for (const auto& p : pn->items()) {
      Matrix m = p.matrix();
      if (m.rows() != n || m.cols() != n) p.fail("expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
      c.V.push_back(anchored(p, [&] { return LyapunovSpec::quadratic(std::move(m)); }));
    }
    if (c.V.size() != modes) pn->fail("expected one matrix per mode");
  } else if (auto vn = node.find("V")) {
    for (const auto& v : vn->items()) c.V.push_back(parse_lyapunov(v, n));
    if (c.V.size() != modes) vn->fail("expected one Lyapunov function per mode");
  } else {
    node.fail("certificate needs \"P\" (quadratic matrices) or \"V\" (Lyapunov functions)");
  }
  if (auto ln = node.find("lambda")) {
    c.lambda = ln->numbers();
    if (c.lambda->size() != modes) ln->fail("expected one rate per mode");
  }
  if (auto lm = node.find("lambda_matrix")) {
    c.lambda_matrix = lm->matrix();
    if (c.lambda_matrix->rows() != modes || c.lambda_matrix->cols() != modes) lm->fail("expected an N x N matrix");
  }
  if (auto mn = node.find("mu")) {
    c.mu = mn->number();
    if (!(*c.mu > 1.0)) mn->fail("mu must be strictly greater than 1");
  }
  if (auto a = node.find("alpha1")) c.alpha1 = parse_bound(*a);
  if (auto a = node.find("alpha2")) c.alpha2 = parse_bound(*a);
  return c;
}

ControllerSpec parse_controller(const Node& node, const SubsystemFamily& family) {
  ControllerSpec spec;
  const Node kind = node.at("kind");
  const std::string k = kind.string();
  if (!family.has_control()) node.fail("a controller needs control fields in the system");
  if (k == "universal") {
    spec.kind = ControllerKind::Universal;
    if (auto ln = node.find("lambda")) {
      spec.lambda = ln->numbers();
      if (spec.lambda.size() != family.modes()) ln->fail("expected one target rate per mode");
    }
  } else if (k == "linear_gain") {
    spec.kind = ControllerKind::LinearGain;
    const Node kn = node.at("K");
    spec.gain = kn.matrix();
    if (spec.gain.rows() != family.inputs() || spec.gain.cols() != family.dimension())
      kn.fail("expected an m x n gain matrix");
  } else if (k == "polynomial") {
    spec.kind = ControllerKind::Polynomial;
    const Node cn = node.at("components");
    for (const auto& c : cn.items()) spec.components.push_back(parse_polynomial(c, family.dimension()));
    if (spec.components.size() != family.inputs()) cn.fail("expected one polynomial per input");
    for (std::size_t j = 0; j < spec.components.size(); ++j)
      if (spec.components[j].has_constant_term()) cn.items()[j].fail("k(0) must be 0");
  } else {
    kind.fail("unknown controller kind \"" + k + "\" (universal, linear_gain, polynomial)");
  }
  return spec;
}

RunConfig parse_run(const Node& node, std::size_t n) {
  RunConfig run;
  const Node xn = node.at("x0");
  run.x0 = xn.numbers();
  if (run.x0.size() != n) xn.fail("expected " + std::to_string(n) + " components");
  if (auto v = node.find("horizon")) {
    run.horizon = v->number();
    if (!(run.horizon > 0.0)) v->fail("must be positive");
  }
  if (auto v = node.find("step")) run.step = v->positive();
  if (auto v = node.find("trials")) {
    run.trials = v->unsigned_integer();
    if (run.trials == 0) v->fail("must be at least 1");
  }
  if (auto v = node.find("seed")) run.seed = v->unsigned_integer();
  if (auto v = node.find("tail_start")) {
    run.tail_start = v->number();
    if (!(run.tail_start >= 0.0 && run.tail_start <= run.horizon)) v->fail("must lie in [0, horizon]");
  }
  if (auto v = node.find("epsilons")) {
    run.epsilons = v->numbers();
    for (double e : run.epsilons)
      if (!(e > 0.0)) v->fail("epsilons must be positive");
  }
  if (auto v = node.find("report_points")) {
    run.report_points = v->unsigned_integer();
    if (run.report_points < 2) v->fail("must be at least 2");
  }
  return run;
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

ScenarioFile parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports the byte index just past the offending character.
    const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ScenarioError("syntax error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                            e.what(),
                        "", line, col);
  }
  const Node root(doc, "");
  if (!doc.is_object()) root.fail("top level must be an object");
  SubsystemFamily family = parse_system(root.at("system"));
  SwitchingLaw law = parse_switching(root.at("switching"), family.modes());
  ScenarioFile file{"", std::move(family), std::move(law), std::nullopt, std::nullopt, {}};
  if (auto nm = root.find("name")) file.name = nm->string();
  if (auto c = root.find("certificate")) file.certificate = parse_certificate(*c, file.family.modes(), file.family.dimension());
  if (auto c = root.find("controller")) file.controller = parse_controller(*c, file.family);
  file.run = parse_run(root.at("run"), file.family.dimension());
  return file;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot read scenario file " + path.string(), "");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

ResolvedCertificate resolve_certificate(const CertificateInput& input, const SubsystemFamily& family) {
  ResolvedCertificate out;
  CertificateFamily& cert = out.cert;
  const bool quadratic =
      std::all_of(input.V.begin(), input.V.end(), [](const LyapunovSpec& v) { return v.is_quadratic(); });
  const bool linear = family.all_linear();
  cert.V = input.V;

  if (input.lambda_matrix) cert.lambda_matrix = input.lambda_matrix;
  if (input.lambda) cert.lambda = input.lambda;
  if (!cert.lambda && !cert.lambda_matrix) {
    if (!(linear && quadratic))
      throw std::invalid_argument(
          "certificate: declare lambda (rates cannot be extracted for nonlinear fields or non-quadratic V)");
    out.extracted = true;
  }
  if (linear && quadratic && !cert.lambda_matrix) {
    cert.lambda_matrix = extract_lambda_matrix(cert.V, family);
    out.extracted = true;
  }
  if (!cert.lambda && cert.lambda_matrix) {
    Vector d(family.modes());
    for (Mode i = 0; i < d.size(); ++i) d[i] = (*cert.lambda_matrix)(i, i);
    cert.lambda = std::move(d);
  }

  if (input.mu) {
    cert.mu = *input.mu;
  } else if (quadratic) {
    cert.mu = strict_mu(extract_mu(cert.V));
    out.extracted = true;
  } else {
    throw std::invalid_argument("certificate: declare mu for non-quadratic Lyapunov functions");
  }

  if (quadratic) std::tie(cert.alpha1, cert.alpha2) = quadratic_sandwich(cert.V);
  if (input.alpha1) cert.alpha1 = *input.alpha1;
  if (input.alpha2) cert.alpha2 = *input.alpha2;
  if (!quadratic && !(input.alpha1 && input.alpha2))
    throw std::invalid_argument("certificate: declare alpha1 and alpha2 for non-quadratic Lyapunov functions");
  cert.validate(family.modes(), family.dimension());
  return out;
}

Scenario make_scenario(const ScenarioFile& file, std::optional<CertificateFamily> cert,
                       std::shared_ptr<const FeedbackLaw> controller) {
  return Scenario{file.family, file.law, std::move(cert), file.run.x0, file.run.horizon, file.run.step,
                  std::move(controller)};
}

}  // namespace switchstab
