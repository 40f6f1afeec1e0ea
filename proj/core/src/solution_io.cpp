#include "tauspec/solution_io.hpp"

#include <json.hpp>

#include "tauspec/error.hpp"

namespace tauspec {

using json = nlohmann::json;

std::string solution_to_json(const TauSolution& solution, std::string_view problem_name,
                             const ExactErrorSummary* exact_error) {
  if (solution.series.empty()) throw DomainError("solution has no variables");
  const BasisSpec& basis = solution.series.front().basis();

  json doc;
  doc["format"] = kSolutionFormat;
  doc["problem"] = std::string(problem_name);
  doc["basis"] = {{"family", family_name(basis.family())}, {"domain", {basis.a(), basis.b()}}};
  doc["converged"] = solution.converged;
  json vars = json::array();
  for (std::size_t v = 0; v < solution.series.size(); ++v) {
    vars.push_back({{"name", solution.variables.at(v)}, {"coeffs", solution.series[v].coeffs()}});
  }
  doc["variables"] = std::move(vars);
  json log = json::array();
  for (const NewtonState& s : solution.newton_log) {
    log.push_back({{"iteration", s.iteration}, {"update_norm", s.update_norm}, {"residual_norm", s.residual_norm}});
  }
  doc["newton_log"] = std::move(log);
  doc["residual"] = {{"grid_points", solution.residual.grid.size()},
                     {"equation_defects", solution.residual.equation_defects},
                     {"condition_defects", solution.residual.condition_defects}};
  if (exact_error) {
    doc["exact_error"] = {{"grid_points", exact_error->grid_points}, {"max_abs", exact_error->max_abs}};
  }
  doc["warnings"] = solution.warnings;
  return doc.dump(2) + "\n";
}

StoredSolution read_solution(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ValidationError("", std::string("malformed solution file: ") + e.what());
  }
  try {
    if (!doc.is_object() || doc.value("format", "") != kSolutionFormat) {
      throw ValidationError("/format", "expected \"" + std::string(kSolutionFormat) + "\"");
    }
    const json& b = doc.at("basis");
    const auto domain = b.at("domain").get<std::vector<double>>();
    if (domain.size() != 2) throw ValidationError("/basis/domain", "expected [a, b]");
    const BasisSpec basis(parse_family(b.at("family").get<std::string>()), domain[0], domain[1]);

    StoredSolution out;
    out.problem = doc.value("problem", "");
    out.converged = doc.value("converged", true);
    const json& vars = doc.at("variables");
    if (!vars.is_array() || vars.empty()) throw ValidationError("/variables", "expected a non-empty array");
    for (std::size_t v = 0; v < vars.size(); ++v) {
      auto coeffs = vars[v].at("coeffs").get<std::vector<double>>();
      if (coeffs.empty()) throw ValidationError("/variables/" + std::to_string(v) + "/coeffs", "empty");
      out.variables.push_back(vars[v].at("name").get<std::string>());
      out.series.emplace_back(basis, std::move(coeffs));
    }
    return out;
  } catch (const json::exception& e) {
    throw ValidationError("", std::string("malformed solution file: ") + e.what());
  } catch (const ConfigError& e) {
    throw ValidationError("/basis", e.what());
  }
}

}  // namespace tauspec
