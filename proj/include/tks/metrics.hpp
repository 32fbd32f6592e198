#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tks {

// K x K counts, rows = true class, columns = predicted class.
struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::uint64_t> counts;  // row-major

  [[nodiscard]] std::size_t size() const noexcept { return classes.size(); }
  [[nodiscard]] std::uint64_t at(std::size_t truth, std::size_t pred) const { return counts[truth * size() + pred]; }
  [[nodiscard]] std::uint64_t& at(std::size_t truth, std::size_t pred) { return counts[truth * size() + pred]; }
  [[nodiscard]] std::uint64_t total() const noexcept;
};

ConfusionMatrix confusion(std::span<const std::string> truth, std::span<const std::string> pred,
                          std::span<const std::string> classes);

enum class F1Scope { failure, all };

std::string_view to_string(F1Scope scope);
std::optional<F1Scope> parse_f1_scope(std::string_view text);

struct EvalReport {
  ConfusionMatrix confusion;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> fpr;
  double f1 = 0.0;
  F1Scope f1_scope = F1Scope::failure;
  // Class excluded from the failure-scope F1; nullopt when scope is all.
  std::optional<std::size_t> negative_class;
  // One note per ratio that was 0/0 and reported as 0.
  std::vector<std::string> degenerate;
};

// Index of "nominal" or "success" in `classes`, else 0.
std::size_t default_negative_class(std::span<const std::string> classes);

// Per-class precision/recall/FPR and macro F1 (over the failure classes, or
// every class). Every 0/0 ratio is 0 and noted in `degenerate`.
EvalReport report(const ConfusionMatrix& conf, F1Scope scope = F1Scope::failure,
                  std::optional<std::size_t> negative_class = std::nullopt);

}  // namespace tks
