// JSON problem documents. Layout (see docs/problem-format.md):
//   basis {family, domain}, variables [names],
//   equations [{terms: [...], rhs}], conditions [...], solve {...}

#include <cmath>
#include <set>
#include <string>

#include <json.hpp>

#include "tauspec/error.hpp"
#include "tauspec/problem.hpp"

namespace tauspec {

namespace {

using json = nlohmann::json;

std::string join(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string join(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

const json& require(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) throw ValidationError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(join(path, key), "required key is missing");
  return *it;
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  std::set<std::string> ok;
  for (const char* k : allowed) ok.insert(k);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!ok.count(it.key())) throw ValidationError(join(path, it.key()), "unknown key");
  }
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ValidationError(path, "expected a finite number");
  return d;
}

int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ValidationError(path, "expected an integer");
  return v.get<int>();
}

std::vector<double> number_list(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ValidationError(path, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], join(path, i)));
  return out;
}

Matrix number_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ValidationError(path, "expected a non-empty array of rows");
  std::size_t width = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_array() || v[i].empty()) throw ValidationError(join(path, i), "expected a non-empty row");
    width = std::max(width, v[i].size());
  }
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = 0; j < v[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = number(v[i][j], join(join(path, i), j));
    }
  }
  return m;
}

class Parser {
 public:
  Parser(const json& doc, const ParseOverrides& overrides) : doc_(doc), overrides_(overrides) {}

  ProblemSpec run();

 private:
  BasisSpec parse_basis(const json& b);
  std::size_t variable(const json& v, const std::string& path) const;
  Series polynomial(const json& v, const std::string& path) const;
  KernelPoly kernel(const json& v, const std::string& path) const;
  void parse_term(const json& t, const std::string& path, EquationSpec& eq) const;
  ConditionTerm condition_term(const json& t, const std::string& path) const;
  void parse_solve(const json& s, ProblemSpec& spec) const;

  const json& doc_;
  const ParseOverrides& overrides_;
  Family declared_family_ = Family::ChebyshevT;
  std::optional<BasisSpec> basis_;
  std::optional<BasisSpec> declared_;
  std::vector<std::string> names_;
};

BasisSpec Parser::parse_basis(const json& b) {
  const std::string path = "/basis";
  if (!b.is_object()) throw ValidationError(path, "expected an object");
  reject_unknown(b, path, {"family", "domain"});
  const json& fam = require(b, path, "family");
  if (!fam.is_string()) throw ValidationError(join(path, "family"), "expected a string");
  try {
    declared_family_ = parse_family(fam.get<std::string>());
  } catch (const ConfigError& e) {
    throw ValidationError(join(path, "family"), e.what());
  }
  const json& dom = require(b, path, "domain");
  const auto ends = number_list(dom, join(path, "domain"));
  if (ends.size() != 2 || !(ends[0] < ends[1])) {
    throw ValidationError(join(path, "domain"), "expected [a, b] with a < b");
  }
  declared_ = BasisSpec(declared_family_, ends[0], ends[1]);
  return BasisSpec(overrides_.family.value_or(declared_family_), ends[0], ends[1]);
}

std::size_t Parser::variable(const json& v, const std::string& path) const {
  if (v.is_string()) {
    const auto name = v.get<std::string>();
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == name) return i;
    }
    throw ValidationError(path, "unknown variable '" + name + "'");
  }
  if (v.is_number_unsigned()) {
    const auto i = v.get<std::size_t>();
    if (i >= names_.size()) throw ValidationError(path, "unknown variable index " + std::to_string(i));
    return i;
  }
  throw ValidationError(path, "expected a variable name");
}

// A polynomial is a bare number (constant), or {basis: "power"|"orthogonal", coeffs: [...]}.
// Orthogonal coefficients refer to the family the document declares.
Series Parser::polynomial(const json& v, const std::string& path) const {
  if (v.is_number()) return Series(*basis_, std::vector<double>{number(v, path)});
  if (!v.is_object()) throw ValidationError(path, "expected a number or {basis, coeffs}");
  reject_unknown(v, path, {"basis", "coeffs"});
  const json& kind = require(v, path, "basis");
  const auto coeffs = number_list(require(v, path, "coeffs"), join(path, "coeffs"));
  if (kind == "power") return from_power(*basis_, coeffs);
  if (kind == "orthogonal") {
    if (declared_->family() == basis_->family()) return Series(*basis_, coeffs);
    // Family override: re-express through the power basis.
    std::vector<double> power(coeffs.size(), 0.0);
    std::vector<double> older;
    std::vector<double> cur{1.0};  // P*_0 in monomials of x
    const double c1 = declared_->c1();
    const double c2 = declared_->c2();
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      for (std::size_t k = 0; k < cur.size(); ++k) power[k] += coeffs[i] * cur[k];
      const Recurrence r = recurrence_coeffs(declared_->family(), static_cast<int>(i));
      std::vector<double> next(cur.size() + 1, 0.0);
      for (std::size_t k = 0; k < cur.size(); ++k) {
        next[k + 1] += c1 * cur[k];
        next[k] += (c2 - r.beta) * cur[k];
        if (k < older.size()) next[k] -= r.gamma * older[k];
      }
      for (double& x : next) x /= r.alpha;
      older = std::move(cur);
      cur = std::move(next);
    }
    return from_power(*basis_, power);
  }
  throw ValidationError(join(path, "basis"), "expected \"power\" or \"orthogonal\"");
}

// Kernels are coefficient matrices in (x, t): row i, column j multiplies
// x^i t^j, or {basis: "orthogonal", coeffs: [[...]]}.
KernelPoly Parser::kernel(const json& v, const std::string& path) const {
  if (v.is_number()) {
    Matrix m(1, 1);
    m(0, 0) = number(v, path);
    return KernelPoly(*basis_, m);
  }
  if (v.is_array()) return KernelPoly::from_power(*basis_, number_matrix(v, path));
  if (!v.is_object()) throw ValidationError(path, "expected a coefficient matrix");
  reject_unknown(v, path, {"basis", "coeffs"});
  const json& kind = require(v, path, "basis");
  const Matrix coeffs = number_matrix(require(v, path, "coeffs"), join(path, "coeffs"));
  if (kind == "power") return KernelPoly::from_power(*basis_, coeffs);
  if (kind == "orthogonal") {
    if (declared_->family() != basis_->family()) {
      throw ValidationError(path, "orthogonal kernel coefficients cannot follow a basis override");
    }
    return KernelPoly(*basis_, coeffs);
  }
  throw ValidationError(join(path, "basis"), "expected \"power\" or \"orthogonal\"");
}

void Parser::parse_term(const json& t, const std::string& path, EquationSpec& eq) const {
  if (!t.is_object()) throw ValidationError(path, "expected an object");
  const json& kind_json = require(t, path, "kind");
  if (!kind_json.is_string()) throw ValidationError(join(path, "kind"), "expected a string");
  const std::string kind = kind_json.get<std::string>();

  if (kind == "product") {
    reject_unknown(t, path, {"kind", "weight", "factors", "integral", "augment", "aux_initial"});
    ProductTermSpec prod;
    if (t.contains("weight")) prod.weight = number(t["weight"], join(path, "weight"));
    const json& factors = require(t, path, "factors");
    if (!factors.is_array()) throw ValidationError(join(path, "factors"), "expected an array");
    for (std::size_t i = 0; i < factors.size(); ++i) {
      const std::string fp = join(join(path, "factors"), i);
      const json& f = factors[i];
      if (!f.is_object()) throw ValidationError(fp, "expected an object");
      reject_unknown(f, fp, {"var", "order"});
      Factor factor;
      factor.variable = variable(require(f, fp, "var"), join(fp, "var"));
      if (f.contains("order")) factor.order = integer(f["order"], join(fp, "order"));
      prod.factors.push_back(factor);
    }
    if (t.contains("integral")) {
      const std::string ip = join(path, "integral");
      const json& in = t["integral"];
      if (!in.is_object()) throw ValidationError(ip, "expected an object");
      reject_unknown(in, ip, {"kind", "kernel", "lower"});
      const json& ik = require(in, ip, "kind");
      if (ik == "volterra") {
        prod.integral = IntegralKind::Volterra;
        prod.lower = in.contains("lower") ? number(in["lower"], join(ip, "lower")) : basis_->a();
      } else if (ik == "fredholm") {
        prod.integral = IntegralKind::Fredholm;
      } else if (ik != "none") {
        throw ValidationError(join(ip, "kind"), "expected \"volterra\", \"fredholm\" or \"none\"");
      }
      if (prod.integral != IntegralKind::None) {
        prod.kernel = in.contains("kernel") ? kernel(in["kernel"], join(ip, "kernel"))
                                            : KernelPoly(*basis_, Matrix::Ones(1, 1));
      }
    }
    if (t.contains("augment")) {
      if (!t["augment"].is_boolean()) throw ValidationError(join(path, "augment"), "expected a boolean");
      prod.augment = t["augment"].get<bool>();
    }
    if (t.contains("aux_initial")) {
      const std::string ap = join(path, "aux_initial");
      const json& ai = t["aux_initial"];
      if (!ai.is_object()) throw ValidationError(ap, "expected {point, value}");
      reject_unknown(ai, ap, {"point", "value"});
      prod.aux_initial = std::make_pair(number(require(ai, ap, "point"), join(ap, "point")),
                                        number(require(ai, ap, "value"), join(ap, "value")));
    }
    eq.products.push_back(std::move(prod));
    return;
  }

  LinearTermSpec term;
  if (kind == "diff" || kind == "int") {
    reject_unknown(t, path, {"kind", "var", "order", "coeff"});
    term.kind = kind == "diff" ? TermKind::Diff : TermKind::Int;
    term.order = t.contains("order") ? integer(t["order"], join(path, "order")) : (kind == "diff" ? 0 : 1);
    term.coeff = t.contains("coeff") ? polynomial(t["coeff"], join(path, "coeff"))
                                     : Series(*basis_, std::vector<double>{1.0});
  } else if (kind == "volterra" || kind == "fredholm") {
    reject_unknown(t, path, {"kind", "var", "order", "kernel", "lower"});
    term.kind = kind == "volterra" ? TermKind::Volterra : TermKind::Fredholm;
    term.order = t.contains("order") ? integer(t["order"], join(path, "order")) : 0;
    term.kernel = kernel(require(t, path, "kernel"), join(path, "kernel"));
    if (kind == "volterra") {
      term.lower = t.contains("lower") ? number(t["lower"], join(path, "lower")) : basis_->a();
    } else if (t.contains("lower")) {
      throw ValidationError(join(path, "lower"), "fredholm terms integrate over the whole domain");
    }
  } else {
    throw ValidationError(join(path, "kind"), "unknown term kind '" + kind + "'");
  }
  term.variable = variable(require(t, path, "var"), join(path, "var"));
  eq.linear.push_back(std::move(term));
}

ConditionTerm Parser::condition_term(const json& t, const std::string& path) const {
  ConditionTerm term;
  term.variable = variable(require(t, path, "var"), join(path, "var"));
  term.point = number(require(t, path, "point"), join(path, "point"));
  if (t.contains("order")) term.derivative = integer(t["order"], join(path, "order"));
  if (t.contains("weight")) term.weight = number(t["weight"], join(path, "weight"));
  return term;
}

void Parser::parse_solve(const json& s, ProblemSpec& spec) const {
  const std::string path = "/solve";
  if (!s.is_object()) throw ValidationError(path, "expected an object");
  reject_unknown(s, path, {"n", "newton_tol", "max_iter", "initial", "damping", "refine", "grid"});
  SolverSettings& set = spec.settings;
  if (s.contains("n")) {
    const int n = integer(s["n"], join(path, "n"));
    if (n < 1) throw ValidationError(join(path, "n"), "must be positive");
    set.n = static_cast<std::size_t>(n);
  }
  if (s.contains("newton_tol")) set.newton_tol = number(s["newton_tol"], join(path, "newton_tol"));
  if (s.contains("max_iter")) set.max_iter = integer(s["max_iter"], join(path, "max_iter"));
  if (s.contains("grid")) {
    const int g = integer(s["grid"], join(path, "grid"));
    if (g < 1) throw ValidationError(join(path, "grid"), "must be positive");
    set.residual_grid = static_cast<std::size_t>(g);
  }
  if (s.contains("damping")) {
    if (!s["damping"].is_boolean()) throw ValidationError(join(path, "damping"), "expected a boolean");
    set.damping = s["damping"].get<bool>();
  }
  if (s.contains("refine")) {
    if (!s["refine"].is_boolean()) throw ValidationError(join(path, "refine"), "expected a boolean");
    set.refine = s["refine"].get<bool>();
  }
  if (s.contains("initial")) {
    const json& init = s["initial"];
    const std::string ip = join(path, "initial");
    if (init == "conditions") {
      set.initial = InitialPolicy::Conditions;
    } else if (init == "zero") {
      set.initial = InitialPolicy::Zero;
    } else if (init.is_array()) {
      set.initial = InitialPolicy::User;
      for (std::size_t i = 0; i < init.size(); ++i) set.initial_coeffs.push_back(number_list(init[i], join(ip, i)));
    } else {
      throw ValidationError(ip, "expected \"conditions\", \"zero\" or per-variable coefficient lists");
    }
  }
}

ProblemSpec Parser::run() {
  if (!doc_.is_object()) throw ValidationError("", "problem document must be a JSON object");
  reject_unknown(doc_, "", {"name", "description", "basis", "variables", "equations", "conditions", "solve"});
  basis_ = parse_basis(require(doc_, "", "basis"));
  ProblemSpec spec(*basis_);

  const json& vars = require(doc_, "", "variables");
  if (!vars.is_array() || vars.empty()) throw ValidationError("/variables", "expected a non-empty array");
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (!vars[i].is_string()) throw ValidationError(join("/variables", i), "expected a string");
    names_.push_back(vars[i].get<std::string>());
  }
  spec.variables = names_;

  const json& eqs = require(doc_, "", "equations");
  if (!eqs.is_array()) throw ValidationError("/equations", "expected an array");
  for (std::size_t e = 0; e < eqs.size(); ++e) {
    const std::string path = join("/equations", e);
    const json& eq = eqs[e];
    if (!eq.is_object()) throw ValidationError(path, "expected an object");
    reject_unknown(eq, path, {"terms", "rhs"});
    EquationSpec parsed{{}, {}, Series(*basis_, std::vector<double>{0.0})};
    const json& terms = require(eq, path, "terms");
    if (!terms.is_array() || terms.empty()) throw ValidationError(join(path, "terms"), "expected a non-empty array");
    for (std::size_t t = 0; t < terms.size(); ++t) parse_term(terms[t], join(join(path, "terms"), t), parsed);
    if (eq.contains("rhs")) parsed.rhs = polynomial(eq["rhs"], join(path, "rhs"));
    spec.equations.push_back(std::move(parsed));
  }

  if (doc_.contains("conditions")) {
    const json& conds = doc_["conditions"];
    if (!conds.is_array()) throw ValidationError("/conditions", "expected an array");
    for (std::size_t c = 0; c < conds.size(); ++c) {
      const std::string path = join("/conditions", c);
      const json& cj = conds[c];
      if (!cj.is_object()) throw ValidationError(path, "expected an object");
      ConditionSpec cond;
      if (cj.contains("terms")) {
        reject_unknown(cj, path, {"terms", "value", "equation"});
        const json& terms = cj["terms"];
        if (!terms.is_array()) throw ValidationError(join(path, "terms"), "expected an array");
        for (std::size_t k = 0; k < terms.size(); ++k) {
          const std::string tp = join(join(path, "terms"), k);
          if (!terms[k].is_object()) throw ValidationError(tp, "expected an object");
          reject_unknown(terms[k], tp, {"var", "order", "point", "weight"});
          cond.terms.push_back(condition_term(terms[k], tp));
        }
      } else {
        // Shorthand for a single point condition.
        reject_unknown(cj, path, {"var", "order", "point", "weight", "value", "equation"});
        cond.terms.push_back(condition_term(cj, path));
      }
      cond.value = number(require(cj, path, "value"), join(path, "value"));
      if (cj.contains("equation")) {
        const int e = integer(cj["equation"], join(path, "equation"));
        if (e < 0) throw ValidationError(join(path, "equation"), "must be non-negative");
        cond.equation = static_cast<std::size_t>(e);
      }
      spec.conditions.push_back(std::move(cond));
    }
  }

  if (doc_.contains("solve")) parse_solve(doc_["solve"], spec);
  if (overrides_.n) spec.settings.n = *overrides_.n;
  if (overrides_.newton_tol) spec.settings.newton_tol = *overrides_.newton_tol;
  if (overrides_.max_iter) spec.settings.max_iter = *overrides_.max_iter;
  if (overrides_.initial) spec.settings.initial = *overrides_.initial;
  if (overrides_.residual_grid) spec.settings.residual_grid = *overrides_.residual_grid;

  validate_problem(spec);

  bool has_derivative = false;
  for (const auto& eq : spec.equations) {
    for (const auto& t : eq.linear) has_derivative = has_derivative || (t.kind == TermKind::Diff && t.order > 0);
    for (const auto& p : eq.products) {
      for (const auto& f : p.factors) has_derivative = has_derivative || f.order > 0;
    }
  }
  if (has_derivative && spec.conditions.empty()) {
    spec.warnings.push_back("derivative terms present but no conditions given; the problem is likely ill-posed");
  }
  return spec;
}

}  // namespace

ProblemSpec parse_problem(std::string_view document, const ParseOverrides& overrides) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw ValidationError("", std::string("malformed JSON at byte ") + std::to_string(e.byte) + ": " + e.what());
  }
  try {
    return Parser(doc, overrides).run();
  } catch (const json::exception& e) {
    throw ValidationError("", e.what());
  }
}

}  // namespace tauspec
