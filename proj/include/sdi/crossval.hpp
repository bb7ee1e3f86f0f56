#pragma once

// k-fold cross-validation. Fold assignment depends only on subject ids, labels
// and the seed, never on input row order.

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sdi/dataset.hpp"
#include "sdi/error.hpp"
#include "sdi/metrics.hpp"
#include "sdi/models.hpp"
#include "sdi/rng.hpp"

namespace sdi {

struct CrossvalOptions {
  int k_folds = 5;
  std::uint64_t seed = 2025;
  bool balance_training = false;  // down-sample the majority class in training folds
};

namespace detail {

inline std::vector<std::size_t> id_order(std::span<const std::string> ids) {
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  for (std::size_t k = 1; k < order.size(); ++k)
    if (ids[order[k]] == ids[order[k - 1]]) fail_validation("duplicate subject id '" + ids[order[k]] + "'");
  return order;
}

inline void deal(std::vector<std::size_t> members, int k, Rng& rng, std::vector<int>& fold) {
  rng.shuffle(members);
  for (std::size_t i = 0; i < members.size(); ++i) fold[members[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
}

/// Rows restricted to `keep` where the majority class is down-sampled to the
/// minority count. Result is in id order.
inline std::vector<std::size_t> balance_down(std::span<const std::size_t> rows, std::span<const int> y,
                                             std::span<const std::string> ids, Rng& rng) {
  std::vector<std::size_t> cls[2];
  for (std::size_t r : rows) cls[y[r] == 1].push_back(r);
  for (auto& c : cls)
    std::sort(c.begin(), c.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  const std::size_t keep = std::min(cls[0].size(), cls[1].size());
  std::vector<std::size_t> out;
  for (auto& c : cls) {
    if (c.size() > keep) {
      rng.shuffle(c);
      c.resize(keep);
    }
    out.insert(out.end(), c.begin(), c.end());
  }
  std::sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  return out;
}

inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& x, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k)
    out.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(rows[k]));
  return out;
}

template <class T>
std::vector<T> take(std::span<const T> v, std::span<const std::size_t> rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(v[r]);
  return out;
}

inline std::uint64_t fold_seed(std::uint64_t seed, int fold) {
  return splitmix64(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(fold + 1));
}

}  // namespace detail

/// Stratified assignment: within each class, subjects in id order are
/// shuffled by the seed and dealt round-robin, so every fold holds each
/// class's count to within one.
inline std::vector<int> stratified_folds(std::span<const std::string> ids, std::span<const int> y, int k,
                                         std::uint64_t seed) {
  if (ids.size() != y.size()) fail_validation("folds: ids and labels disagree in length");
  if (k < 2) fail_validation("k_folds must be >= 2");
  const auto order = detail::id_order(ids);
  std::vector<std::size_t> cls[2];
  for (std::size_t r : order) cls[y[r] == 1].push_back(r);
  for (int c = 0; c < 2; ++c)
    if (cls[c].size() < static_cast<std::size_t>(k))
      fail_validation("class " + std::to_string(c) + " has " + std::to_string(cls[c].size()) +
                      " members, fewer than k_folds=" + std::to_string(k));
  std::vector<int> fold(ids.size(), 0);
  Rng rng = Rng::substream(seed ^ stream::folds, 0);
  detail::deal(std::move(cls[0]), k, rng, fold);
  detail::deal(std::move(cls[1]), k, rng, fold);
  return fold;
}

inline std::vector<int> plain_folds(std::span<const std::string> ids, int k, std::uint64_t seed) {
  if (k < 2) fail_validation("k_folds must be >= 2");
  if (ids.size() < static_cast<std::size_t>(k))
    fail_validation("need at least k_folds=" + std::to_string(k) + " subjects");
  std::vector<int> fold(ids.size(), 0);
  Rng rng = Rng::substream(seed ^ stream::folds, 1);
  detail::deal(detail::id_order(ids), k, rng, fold);
  return fold;
}

struct ClassifierOutput {
  std::vector<int> labels;
  std::vector<double> scores;
};

inline ClassifierOutput fit_predict_classifier(const ModelSpec& spec, const Eigen::MatrixXd& x_train,
                                               std::span<const int> y_train, const Eigen::MatrixXd& x_test) {
  switch (spec.kind) {
    case ModelKind::logreg: {
      const auto m = train_logreg(x_train, y_train, spec);
      return {m.predict(x_test), m.predict_proba(x_test)};
    }
    case ModelKind::random_forest_cls: {
      const auto m = train_forest(x_train, y_train, spec);
      return {m.predict(x_test), m.predict_value(x_test)};
    }
    default:
      fail_validation("model '" + spec.label() + "' is not a classifier");
  }
}

inline std::vector<double> fit_predict_regressor(const ModelSpec& spec, const Eigen::MatrixXd& x_train,
                                                 std::span<const double> y_train, const Eigen::MatrixXd& x_test) {
  switch (spec.kind) {
    case ModelKind::ridge:
      return train_ridge(x_train, y_train, spec).predict(x_test);
    case ModelKind::random_forest_reg:
      return train_forest(x_train, y_train, spec).predict_value(x_test);
    default:
      fail_validation("model '" + spec.label() + "' is not a regressor");
  }
}

/// Stratified k-fold classification; per-fold metrics averaged, fold std.
inline Metrics crossval(const FeatureMatrix& x, std::span<const int> y, const ModelSpec& spec,
                        const CrossvalOptions& opt = {}) {
  if (x.subjects() != y.size()) fail_validation("crossval: features and labels disagree in length");
  const auto fold = stratified_folds(x.subject_ids, y, opt.k_folds, opt.seed);
  const auto order = detail::id_order(x.subject_ids);
  std::vector<ClassificationScores> per_fold;
  for (int f = 0; f < opt.k_folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t r : order) (fold[r] == f ? test : train).push_back(r);
    if (opt.balance_training) {
      Rng rng = Rng::substream(opt.seed ^ stream::balance, static_cast<std::uint64_t>(f));
      train = detail::balance_down(train, y, x.subject_ids, rng);
    }
    ModelSpec s = spec;
    s.seed = detail::fold_seed(spec.seed, f);
    const auto ytr = detail::take(y, train);
    const auto yte = detail::take(y, test);
    const auto out = fit_predict_classifier(s, detail::take_rows(x.x, train), ytr, detail::take_rows(x.x, test));
    per_fold.push_back(classification_metrics(yte, out.labels, out.scores));
  }
  return Metrics::aggregate(std::span<const ClassificationScores>(per_fold));
}

/// Plain k-fold regression.
inline Metrics crossval(const FeatureMatrix& x, std::span<const double> y, const ModelSpec& spec,
                        const CrossvalOptions& opt = {}) {
  if (x.subjects() != y.size()) fail_validation("crossval: features and targets disagree in length");
  const auto fold = plain_folds(x.subject_ids, opt.k_folds, opt.seed);
  const auto order = detail::id_order(x.subject_ids);
  std::vector<RegressionScores> per_fold;
  for (int f = 0; f < opt.k_folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t r : order) (fold[r] == f ? test : train).push_back(r);
    ModelSpec s = spec;
    s.seed = detail::fold_seed(spec.seed, f);
    const auto ytr = detail::take(y, train);
    const auto yte = detail::take(y, test);
    const auto pred = fit_predict_regressor(s, detail::take_rows(x.x, train), ytr, detail::take_rows(x.x, test));
    per_fold.push_back(regression_metrics(yte, pred));
  }
  return Metrics::aggregate(std::span<const RegressionScores>(per_fold));
}

}  // namespace sdi
