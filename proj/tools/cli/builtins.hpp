#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <tauspec/solver.hpp>

namespace tauspec::cli {

struct EmbeddedDocument {
  std::string_view name;
  std::string_view text;
};

namespace detail {
// Generated at build time from problems/*.json.
extern const EmbeddedDocument kEmbedded[];
extern const std::size_t kEmbeddedCount;
}  // namespace detail

struct BuiltinProblem {
  std::string name;
  std::string description;
  std::string_view document;
  ExactSolution exact;  // empty when no closed form is known
};

std::vector<std::string> builtin_names();
std::optional<BuiltinProblem> find_builtin(std::string_view name);

}  // namespace tauspec::cli
