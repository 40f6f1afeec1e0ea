#include "builtins.hpp"

#include <cmath>

#include <json.hpp>

namespace tauspec::cli {

namespace {

ExactSolution closed_form(std::string_view name) {
  if (name == "example1") return {[](double x) { return std::exp(-x); }};
  if (name == "example2") {
    return {[](double x) { return std::sinh(x); }, [](double x) { return std::cosh(x); }};
  }
  if (name == "exp-ode" || name == "volterra-exp") return {[](double x) { return std::exp(x); }};
  return {};
}

std::string description_of(std::string_view document) {
  const auto doc = nlohmann::json::parse(document.begin(), document.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return {};
  return doc.value("description", "");
}

}  // namespace

std::vector<std::string> builtin_names() {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < detail::kEmbeddedCount; ++i) names.emplace_back(detail::kEmbedded[i].name);
  return names;
}

std::optional<BuiltinProblem> find_builtin(std::string_view name) {
  for (std::size_t i = 0; i < detail::kEmbeddedCount; ++i) {
    const EmbeddedDocument& doc = detail::kEmbedded[i];
    if (doc.name != name) continue;
    return BuiltinProblem{std::string(doc.name), description_of(doc.text), doc.text, closed_form(name)};
  }
  return std::nullopt;
}

}  // namespace tauspec::cli
