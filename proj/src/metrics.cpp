#include "tks/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "tks/error.hpp"

namespace tks {

std::uint64_t ConfusionMatrix::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

ConfusionMatrix confusion(std::span<const std::string> truth, std::span<const std::string> pred,
                          std::span<const std::string> classes) {
  if (truth.size() != pred.size()) {
    throw ValidationError("label length mismatch: " + std::to_string(truth.size()) + " true vs " +
                          std::to_string(pred.size()) + " predicted");
  }
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (!index.emplace(classes[i], i).second) throw ValidationError("duplicate class '" + classes[i] + "'");
  }
  auto lookup = [&](const std::string& label) {
    auto it = index.find(label);
    if (it == index.end()) throw ValidationError("unknown label '" + label + "'");
    return it->second;
  };

  ConfusionMatrix m;
  m.classes.assign(classes.begin(), classes.end());
  m.counts.assign(classes.size() * classes.size(), 0);
  for (std::size_t i = 0; i < truth.size(); ++i) ++m.at(lookup(truth[i]), lookup(pred[i]));
  return m;
}

std::string_view to_string(F1Scope scope) {
  return scope == F1Scope::failure ? "failure" : "all";
}

std::optional<F1Scope> parse_f1_scope(std::string_view text) {
  if (text == "failure") return F1Scope::failure;
  if (text == "all") return F1Scope::all;
  return std::nullopt;
}

std::size_t default_negative_class(std::span<const std::string> classes) {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == "nominal" || classes[i] == "success") return i;
  }
  return 0;
}

EvalReport report(const ConfusionMatrix& conf, F1Scope scope, std::optional<std::size_t> negative_class) {
  const std::size_t k = conf.size();
  if (conf.counts.size() != k * k) throw ValidationError("confusion matrix is not square");

  EvalReport r;
  r.confusion = conf;
  r.f1_scope = scope;
  r.precision.assign(k, 0.0);
  r.recall.assign(k, 0.0);
  r.fpr.assign(k, 0.0);
  if (scope == F1Scope::failure) r.negative_class = negative_class.value_or(default_negative_class(conf.classes));

  auto ratio = [&](std::uint64_t num, std::uint64_t den, const std::string& what) {
    if (den == 0) {
      r.degenerate.push_back(what);
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };

  const std::uint64_t total = conf.total();
  double f1_sum = 0.0;
  std::size_t f1_terms = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::uint64_t tp = conf.at(c, c);
    std::uint64_t row = 0;  // true == c
    std::uint64_t col = 0;  // pred == c
    for (std::size_t j = 0; j < k; ++j) {
      row += conf.at(c, j);
      col += conf.at(j, c);
    }
    const std::uint64_t fp = col - tp;
    const std::string& name = conf.classes[c];
    r.precision[c] = ratio(tp, col, "precision[" + name + "]");
    r.recall[c] = ratio(tp, row, "recall[" + name + "]");
    r.fpr[c] = ratio(fp, total - row, "fpr[" + name + "]");

    if (r.negative_class && *r.negative_class == c) continue;
    const double p = r.precision[c];
    const double rec = r.recall[c];
    double f1 = 0.0;
    if (p + rec > 0.0) {
      f1 = 2.0 * p * rec / (p + rec);
    } else {
      r.degenerate.push_back("f1[" + name + "]");
    }
    f1_sum += f1;
    ++f1_terms;
  }
  r.f1 = f1_terms == 0 ? 0.0 : f1_sum / static_cast<double>(f1_terms);
  return r;
}

}  // namespace tks
