#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include <json.hpp>

#include "sdi/error.hpp"

namespace sdi {

struct ClassificationScores {
  double accuracy = 0, precision = 0, recall = 0, f1 = 0, auc = 0.5;
  double balanced_accuracy = 0;
};

struct RegressionScores {
  double mae = 0, rmse = 0;
};

/// Area under the ROC curve as the normalized Mann-Whitney statistic with
/// average ranks for ties. 0.5 when a class is absent.
inline double roc_auc(std::span<const int> y, std::span<const double> scores) {
  if (y.size() != scores.size()) fail_validation("auc: length mismatch");
  const std::size_t n = y.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k)
      if (y[order[k]] == 1) {
        pos_rank_sum += rank;
        ++pos;
      }
    i = j;
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) return 0.5;
  const double p = static_cast<double>(pos), q = static_cast<double>(neg);
  return (pos_rank_sum - p * (p + 1) / 2) / (p * q);
}

/// Precision, recall and F1 are 0 when their denominator is 0.
inline ClassificationScores classification_metrics(std::span<const int> y_true, std::span<const int> y_pred,
                                                   std::span<const double> scores) {
  if (y_true.size() != y_pred.size() || y_true.size() != scores.size())
    fail_validation("classification metrics: length mismatch");
  if (y_true.empty()) fail_validation("classification metrics: no observations");
  double tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool t = y_true[i] == 1, p = y_pred[i] == 1;
    tp += t && p;
    fp += !t && p;
    fn += t && !p;
    tn += !t && !p;
  }
  ClassificationScores m;
  m.accuracy = (tp + tn) / static_cast<double>(y_true.size());
  m.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  const double tnr = tn + fp > 0 ? tn / (tn + fp) : 0.0;
  m.balanced_accuracy = 0.5 * (m.recall + tnr);
  m.auc = roc_auc(y_true, scores);
  return m;
}

inline RegressionScores regression_metrics(std::span<const double> y_true, std::span<const double> y_pred) {
  if (y_true.size() != y_pred.size()) fail_validation("regression metrics: length mismatch");
  if (y_true.empty()) fail_validation("regression metrics: no observations");
  double abs_sum = 0, sq_sum = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double e = y_pred[i] - y_true[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
  }
  const double n = static_cast<double>(y_true.size());
  return {abs_sum / n, std::sqrt(sq_sum / n)};
}

/// Mean and sample standard deviation over folds.
struct Summary {
  double mean = 0, std = 0;

  static Summary of(std::span<const double> v) {
    Summary s;
    if (v.empty()) return s;
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0;
      for (double x : v) ss += (x - s.mean) * (x - s.mean);
      s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return s;
  }
};

/// Fold-aggregated metrics. Only the block matching `classification` is
/// meaningful.
struct Metrics {
  bool classification = true;
  std::size_t folds = 0;
  Summary accuracy, precision, recall, f1, auc, balanced_accuracy;
  Summary mae, rmse;

  static Metrics aggregate(std::span<const ClassificationScores> per_fold) {
    Metrics m;
    m.classification = true;
    m.folds = per_fold.size();
    auto col = [&](auto member) {
      std::vector<double> v;
      for (const auto& f : per_fold) v.push_back(f.*member);
      return Summary::of(v);
    };
    m.accuracy = col(&ClassificationScores::accuracy);
    m.precision = col(&ClassificationScores::precision);
    m.recall = col(&ClassificationScores::recall);
    m.f1 = col(&ClassificationScores::f1);
    m.auc = col(&ClassificationScores::auc);
    m.balanced_accuracy = col(&ClassificationScores::balanced_accuracy);
    return m;
  }

  static Metrics aggregate(std::span<const RegressionScores> per_fold) {
    Metrics m;
    m.classification = false;
    m.folds = per_fold.size();
    std::vector<double> a, r;
    for (const auto& f : per_fold) {
      a.push_back(f.mae);
      r.push_back(f.rmse);
    }
    m.mae = Summary::of(a);
    m.rmse = Summary::of(r);
    return m;
  }
};

inline nlohmann::json to_json(const Summary& s) { return {{"mean", s.mean}, {"std", s.std}}; }

inline nlohmann::json to_json(const Metrics& m) {
  nlohmann::json j{{"folds", m.folds}};
  if (m.classification) {
    j["accuracy"] = to_json(m.accuracy);
    j["precision"] = to_json(m.precision);
    j["recall"] = to_json(m.recall);
    j["f1"] = to_json(m.f1);
    j["auc"] = to_json(m.auc);
    j["balanced_accuracy"] = to_json(m.balanced_accuracy);
  } else {
    j["mae"] = to_json(m.mae);
    j["rmse"] = to_json(m.rmse);
  }
  return j;
}

}  // namespace sdi
