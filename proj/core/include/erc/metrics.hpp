#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace erc {

class LabelMap;

using ConfusionMatrix = std::vector<std::vector<std::size_t>>;

struct ClassScores {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvalReport {
  std::vector<ClassScores> per_class;
  double weighted_avg_f1 = 0.0;
  double micro_f1 = 0.0;
  /// Present when the label map names an excluded label. `value` is empty
  /// when no gold label falls outside the excluded class.
  struct Excluding {
    std::string label;
    std::optional<double> value;
  };
  std::optional<Excluding> micro_f1_excluding;
  ConfusionMatrix confusion;
  std::size_t num_samples = 0;
};

/// Entry [i][j] counts samples of gold class i predicted as j.
ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, std::size_t num_classes);

/// Support-weighted mean of per-class F1; a class with neither predictions
/// nor gold samples has F1 = 0.
double weighted_f1(std::span<const int> y_true, std::span<const int> y_pred, std::size_t num_classes);

/// Micro-F1 pooled over every class but `excluded`. Predicting the excluded
/// class for another gold label is a false negative; predicting another class
/// for excluded gold is a false positive. Empty when no gold sample is
/// outside the excluded class.
std::optional<double> micro_f1_excluding(std::span<const int> y_true, std::span<const int> y_pred,
                                         std::size_t num_classes, int excluded);

/// Full report, including the excluded-label micro-F1 when `labels` names one.
EvalReport evaluate_predictions(std::span<const int> y_true, std::span<const int> y_pred, const LabelMap& labels);

/// The model-selection score: micro-F1 excluding the label map's excluded
/// label when it has one, weighted-average F1 otherwise.
double primary_score(const EvalReport& report);
std::string primary_metric_name(const LabelMap& labels);

nlohmann::json to_json(const EvalReport& report);

}  // namespace erc
