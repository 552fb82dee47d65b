#include "erc/metrics.hpp"

#include <nlohmann/json.hpp>

#include "erc/errors.hpp"
#include "erc/text.hpp"

namespace erc {

namespace {

void check_inputs(std::span<const int> y_true, std::span<const int> y_pred, std::size_t num_classes) {
  if (y_true.empty()) throw ContractError("metrics: empty label vectors");
  if (y_true.size() != y_pred.size()) {
    throw ContractError("metrics: " + std::to_string(y_true.size()) + " gold labels vs " +
                        std::to_string(y_pred.size()) + " predictions");
  }
  auto check = [num_classes](int y) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw IndexError("metrics: label " + std::to_string(y) + " outside " + std::to_string(num_classes) +
                       " classes");
    }
  };
  for (int y : y_true) check(y);
  for (int y : y_pred) check(y);
}

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

std::vector<ClassScores> per_class_scores(const ConfusionMatrix& cm) {
  const std::size_t c = cm.size();
  std::vector<ClassScores> out(c);
  for (std::size_t k = 0; k < c; ++k) {
    std::size_t tp = cm[k][k], gold = 0, predicted = 0;
    for (std::size_t j = 0; j < c; ++j) {
      gold += cm[k][j];
      predicted += cm[j][k];
    }
    auto& s = out[k];
    s.support = gold;
    s.precision = safe_div(static_cast<double>(tp), static_cast<double>(predicted));
    s.recall = safe_div(static_cast<double>(tp), static_cast<double>(gold));
    s.f1 = safe_div(2.0 * s.precision * s.recall, s.precision + s.recall);
  }
  return out;
}

double weighted_from_scores(const std::vector<ClassScores>& scores, std::size_t total) {
  double f = 0.0;
  for (const auto& s : scores) f += static_cast<double>(s.support) * s.f1;
  return f / static_cast<double>(total);
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, std::size_t num_classes) {
  check_inputs(y_true, y_pred, num_classes);
  ConfusionMatrix cm(num_classes, std::vector<std::size_t>(num_classes, 0));
  for (std::size_t i = 0; i < y_true.size(); ++i)
    ++cm[static_cast<std::size_t>(y_true[i])][static_cast<std::size_t>(y_pred[i])];
  return cm;
}

double weighted_f1(std::span<const int> y_true, std::span<const int> y_pred, std::size_t num_classes) {
  const auto cm = confusion(y_true, y_pred, num_classes);
  return weighted_from_scores(per_class_scores(cm), y_true.size());
}

std::optional<double> micro_f1_excluding(std::span<const int> y_true, std::span<const int> y_pred,
                                         std::size_t num_classes, int excluded) {
  if (excluded < 0 || static_cast<std::size_t>(excluded) >= num_classes) {
    throw ConfigError("excluded label " + std::to_string(excluded) + " outside " + std::to_string(num_classes) +
                      " classes");
  }
  check_inputs(y_true, y_pred, num_classes);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int g = y_true[i], p = y_pred[i];
    if (g == p) {
      if (g != excluded) ++tp;
      continue;
    }
    if (p != excluded) ++fp;
    if (g != excluded) ++fn;
  }
  if (tp + fn == 0) return std::nullopt;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

EvalReport evaluate_predictions(std::span<const int> y_true, std::span<const int> y_pred, const LabelMap& labels) {
  EvalReport r;
  r.confusion = confusion(y_true, y_pred, labels.size());
  r.per_class = per_class_scores(r.confusion);
  for (std::size_t k = 0; k < r.per_class.size(); ++k) r.per_class[k].label = labels.names()[k];
  r.num_samples = y_true.size();
  r.weighted_avg_f1 = weighted_from_scores(r.per_class, r.num_samples);
  // Single-label micro-F1 over all classes reduces to accuracy.
  std::size_t correct = 0;
  for (std::size_t k = 0; k < r.confusion.size(); ++k) correct += r.confusion[k][k];
  r.micro_f1 = static_cast<double>(correct) / static_cast<double>(r.num_samples);
  if (auto ex = labels.excluded_id()) {
    r.micro_f1_excluding = EvalReport::Excluding{*labels.excluded_name(),
                                                 micro_f1_excluding(y_true, y_pred, labels.size(), *ex)};
  }
  return r;
}

double primary_score(const EvalReport& report) {
  if (report.micro_f1_excluding) return report.micro_f1_excluding->value.value_or(0.0);
  return report.weighted_avg_f1;
}

std::string primary_metric_name(const LabelMap& labels) {
  if (labels.excluded_name()) return "micro_f1_excluding_" + *labels.excluded_name();
  return "weighted_avg_f1";
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json j;
  j["num_samples"] = report.num_samples;
  j["weighted_avg_f1"] = report.weighted_avg_f1;
  j["micro_f1"] = report.micro_f1;
  if (report.micro_f1_excluding) {
    const auto& ex = *report.micro_f1_excluding;
    j["micro_f1_excluding"] = {{"label", ex.label},
                               {"value", ex.value ? nlohmann::json(*ex.value) : nlohmann::json(nullptr)}};
  } else {
    j["micro_f1_excluding"] = nullptr;
  }
  j["per_class"] = nlohmann::json::array();
  for (const auto& s : report.per_class) {
    j["per_class"].push_back({{"label", s.label},
                              {"precision", s.precision},
                              {"recall", s.recall},
                              {"f1", s.f1},
                              {"support", s.support}});
  }
  j["confusion"] = report.confusion;
  return j;
}

}  // namespace erc
