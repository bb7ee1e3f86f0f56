#pragma once

// Desk-scale learners: L2 logistic regression, ridge regression, and bagged
// CART forests for classification and regression.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sdi/error.hpp"
#include "sdi/rng.hpp"

namespace sdi {

enum class ModelKind { logreg, ridge, random_forest_cls, random_forest_reg };

inline std::string_view model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::logreg: return "logreg";
    case ModelKind::ridge: return "ridge";
    case ModelKind::random_forest_cls: return "random_forest_cls";
    case ModelKind::random_forest_reg: return "random_forest_reg";
  }
  return "?";
}

inline std::optional<ModelKind> parse_model_kind(std::string_view s) {
  for (auto k : {ModelKind::logreg, ModelKind::ridge, ModelKind::random_forest_cls,
                 ModelKind::random_forest_reg})
    if (model_kind_name(k) == s) return k;
  if (s == "rf" || s == "forest") return ModelKind::random_forest_cls;
  if (s == "rf_reg") return ModelKind::random_forest_reg;
  return std::nullopt;
}

inline bool is_classifier(ModelKind k) {
  return k == ModelKind::logreg || k == ModelKind::random_forest_cls;
}

struct ModelSpec {
  ModelKind kind = ModelKind::logreg;
  std::string name;  // display label; defaults to the kind name

  // logreg
  double learning_rate = 0.5;
  double l2 = 1e-3;
  int epochs = 2000;
  double tolerance = 1e-7;  // stop when the gradient's max-norm drops below

  // ridge
  double lambda = 1.0;

  // forests
  int n_trees = 100;
  int max_depth = -1;  // -1: grow until pure
  int min_samples_split = 2;
  int max_features = 0;  // 0: sqrt(d) for classification, d/3 for regression
  bool bootstrap = true;

  std::uint64_t seed = 2025;

  std::string label() const { return name.empty() ? std::string(model_kind_name(kind)) : name; }

  void validate() const {
    if (kind == ModelKind::logreg) {
      if (!(learning_rate > 0)) fail_validation("logreg: learning_rate must be positive");
      if (!(l2 >= 0)) fail_validation("logreg: l2 must be non-negative");
      if (epochs < 1) fail_validation("logreg: epochs must be >= 1");
    }
    if (kind == ModelKind::ridge && !(lambda >= 0)) fail_validation("ridge: lambda must be non-negative");
    if (kind == ModelKind::random_forest_cls || kind == ModelKind::random_forest_reg) {
      if (n_trees < 1) fail_validation("forest: n_trees must be >= 1");
      if (max_depth < -1) fail_validation("forest: max_depth must be >= 0 or -1");
      if (min_samples_split < 2) fail_validation("forest: min_samples_split must be >= 2");
      if (max_features < 0) fail_validation("forest: max_features must be >= 0");
    }
  }

  static ModelSpec logistic() { return {}; }
  static ModelSpec ridge_reg() {
    ModelSpec s;
    s.kind = ModelKind::ridge;
    return s;
  }
  static ModelSpec forest(bool regression = false) {
    ModelSpec s;
    s.kind = regression ? ModelKind::random_forest_reg : ModelKind::random_forest_cls;
    return s;
  }
};

inline nlohmann::json to_json(const ModelSpec& s) {
  nlohmann::json j{{"kind", model_kind_name(s.kind)}, {"name", s.label()}, {"seed", s.seed}};
  switch (s.kind) {
    case ModelKind::logreg:
      j["learning_rate"] = s.learning_rate;
      j["l2"] = s.l2;
      j["epochs"] = s.epochs;
      j["tolerance"] = s.tolerance;
      break;
    case ModelKind::ridge:
      j["lambda"] = s.lambda;
      break;
    default:
      j["n_trees"] = s.n_trees;
      j["max_depth"] = s.max_depth;
      j["min_samples_split"] = s.min_samples_split;
      j["max_features"] = s.max_features;
      j["bootstrap"] = s.bootstrap;
  }
  return j;
}

namespace detail {

inline void check_xy(const Eigen::MatrixXd& x, std::size_t ny) {
  if (x.rows() == 0) fail_validation("empty training set");
  if (static_cast<std::size_t>(x.rows()) != ny) fail_validation("feature rows and targets disagree in length");
  if (!x.allFinite()) fail_validation("non-finite feature value");
}

inline void check_binary(std::span<const int> y) {
  bool seen[2] = {false, false};
  for (int v : y) {
    if (v != 0 && v != 1) fail_validation("labels must be 0 or 1");
    seen[v] = true;
  }
  if (!seen[0] || !seen[1]) fail_validation("training labels contain a single class");
}

/// Column means and stds (population); zero-variance columns get scale 0 so
/// they standardize to a constant 0.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd inv_std;

  static Standardizer fit(const Eigen::MatrixXd& x) {
    Standardizer s;
    s.mean = x.colwise().mean();
    s.inv_std.resize(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double var = (x.col(c).array() - s.mean(c)).square().mean();
      s.inv_std(c) = var > 0 ? 1.0 / std::sqrt(var) : 0.0;
    }
    return s;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - mean).array().rowwise() * inv_std.array();
  }
};

inline double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// log(1 + exp(t)) without overflow.
inline double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Logistic regression

/// Mean cross-entropy plus (l2/2)*|w|^2 (bias unpenalized) at theta = [b, w].
/// `grad` receives d/dtheta when non-null.
inline double logreg_objective(const Eigen::MatrixXd& x, std::span<const int> y,
                               const Eigen::VectorXd& theta, double l2,
                               Eigen::VectorXd* grad = nullptr) {
  const Eigen::Index n = x.rows();
  const double b = theta(0);
  const auto w = theta.tail(theta.size() - 1);
  const Eigen::VectorXd t = (x * w).array() + b;
  double loss = 0;
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double yi = y[static_cast<std::size_t>(i)];
    // -[y log s + (1-y) log(1-s)] = softplus(t) - y t
    loss += detail::softplus(t(i)) - yi * t(i);
    r(i) = detail::sigmoid(t(i)) - yi;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  loss = loss * inv_n + 0.5 * l2 * w.squaredNorm();
  if (grad) {
    grad->resize(theta.size());
    (*grad)(0) = r.sum() * inv_n;
    grad->tail(theta.size() - 1) = x.transpose() * r * inv_n + l2 * w;
  }
  return loss;
}

struct LogRegModel {
  detail::Standardizer scaler;
  Eigen::VectorXd theta;  // [bias, weights] in standardized space
  int epochs_run = 0;
  bool converged = false;
  std::vector<double> loss_history;  // objective before each update

  std::vector<double> predict_proba(const Eigen::MatrixXd& x) const {
    const Eigen::VectorXd t = (scaler.apply(x) * theta.tail(theta.size() - 1)).array() + theta(0);
    std::vector<double> p(static_cast<std::size_t>(t.size()));
    for (Eigen::Index i = 0; i < t.size(); ++i) p[static_cast<std::size_t>(i)] = detail::sigmoid(t(i));
    return p;
  }

  std::vector<int> predict(const Eigen::MatrixXd& x) const {
    const auto p = predict_proba(x);
    std::vector<int> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] >= 0.5;
    return out;
  }
};

/// Full-batch gradient descent on standardized features, from theta = 0.
inline LogRegModel train_logreg(const Eigen::MatrixXd& x, std::span<const int> y,
                                const ModelSpec& spec, bool keep_history = false) {
  spec.validate();
  detail::check_xy(x, y.size());
  detail::check_binary(y);
  LogRegModel m;
  m.scaler = detail::Standardizer::fit(x);
  const Eigen::MatrixXd xs = m.scaler.apply(x);
  m.theta = Eigen::VectorXd::Zero(x.cols() + 1);
  Eigen::VectorXd g;
  for (int e = 0; e < spec.epochs; ++e) {
    const double loss = logreg_objective(xs, y, m.theta, spec.l2, &g);
    if (keep_history) m.loss_history.push_back(loss);
    if (g.lpNorm<Eigen::Infinity>() < spec.tolerance) {
      m.converged = true;
      break;
    }
    m.theta -= spec.learning_rate * g;
    m.epochs_run = e + 1;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Ridge regression

struct RidgeModel {
  Eigen::RowVectorXd x_mean;
  double y_mean = 0;
  Eigen::VectorXd w;

  std::vector<double> predict(const Eigen::MatrixXd& x) const {
    const Eigen::VectorXd p = ((x.rowwise() - x_mean) * w).array() + y_mean;
    return {p.data(), p.data() + p.size()};
  }
};

/// Closed form on centered data; the intercept is not penalized.
inline RidgeModel train_ridge(const Eigen::MatrixXd& x, std::span<const double> y, const ModelSpec& spec) {
  spec.validate();
  detail::check_xy(x, y.size());
  RidgeModel m;
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  m.x_mean = x.colwise().mean();
  m.y_mean = yv.mean();
  const Eigen::MatrixXd xc = x.rowwise() - m.x_mean;
  Eigen::MatrixXd a = xc.transpose() * xc;
  a.diagonal().array() += spec.lambda;
  const Eigen::VectorXd rhs = xc.transpose() * (yv.array() - m.y_mean).matrix();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) fail_computation("ridge: normal equations are singular");
  m.w = ldlt.solve(rhs);
  return m;
}

// ---------------------------------------------------------------------------
// CART forests on quantile-binned features.

namespace detail {

inline constexpr int kMaxBins = 256;

/// Per-feature bin codes. A feature with at most kMaxBins distinct training
/// values gets one bin per value; otherwise bins hold roughly equal counts.
/// split_value[f][b] separates bin b from bin b+1 (midpoint of the nearest
/// training values on either side).
struct BinnedData {
  Eigen::Index rows = 0, cols = 0;
  std::vector<std::uint8_t> codes;                // column-major
  std::vector<std::vector<double>> split_value;  // per feature, bins-1 entries

  std::uint8_t at(Eigen::Index i, Eigen::Index f) const {
    return codes[static_cast<std::size_t>(f * rows + i)];
  }
  int bins(Eigen::Index f) const {
    return static_cast<int>(split_value[static_cast<std::size_t>(f)].size()) + 1;
  }
};

inline BinnedData bin_features(const Eigen::MatrixXd& x) {
  BinnedData b;
  b.rows = x.rows();
  b.cols = x.cols();
  b.codes.resize(static_cast<std::size_t>(b.rows * b.cols));
  b.split_value.resize(static_cast<std::size_t>(b.cols));
  std::vector<std::pair<double, Eigen::Index>> v(static_cast<std::size_t>(b.rows));
  for (Eigen::Index f = 0; f < b.cols; ++f) {
    for (Eigen::Index i = 0; i < b.rows; ++i) v[static_cast<std::size_t>(i)] = {x(i, f), i};
    std::sort(v.begin(), v.end());
    std::size_t distinct = 1;
    for (std::size_t k = 1; k < v.size(); ++k) distinct += v[k].first != v[k - 1].first;
    auto& splits = b.split_value[static_cast<std::size_t>(f)];
    const double per_bin = static_cast<double>(v.size()) / kMaxBins;
    int bin = 0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k > 0 && v[k].first != v[k - 1].first) {
        const bool cut = distinct <= static_cast<std::size_t>(kMaxBins) ||
                         (bin + 1 < kMaxBins && static_cast<double>(k) >= per_bin * (bin + 1));
        if (cut) {
          splits.push_back(0.5 * (v[k - 1].first + v[k].first));
          ++bin;
        }
      }
      b.codes[static_cast<std::size_t>(f * b.rows + v[k].second)] = static_cast<std::uint8_t>(bin);
    }
  }
  return b;
}

struct TreeNode {
  int feature = -1;  // -1 for a leaf
  double threshold = 0;  // go left when x <= threshold
  int left = -1, right = -1;
  double value = 0;  // class-1 proportion or mean target
};

}  // namespace detail

struct DecisionTree {
  std::vector<detail::TreeNode> nodes;

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    int k = 0;
    while (nodes[static_cast<std::size_t>(k)].feature >= 0) {
      const auto& n = nodes[static_cast<std::size_t>(k)];
      k = row(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(k)].value;
  }

  int depth() const {
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k)
      if (nodes[k].feature >= 0) {
        d[static_cast<std::size_t>(nodes[k].left)] = d[k] + 1;
        d[static_cast<std::size_t>(nodes[k].right)] = d[k] + 1;
        best = std::max(best, d[k] + 1);
      }
    return best;
  }
};

namespace detail {

struct TreeParams {
  bool regression = false;
  int max_depth = -1;
  int min_samples_split = 2;
  int max_features = 1;
};

/// Greedy CART growth over sample indices (duplicates allowed, for bagging).
/// Split choice maximizes the impurity decrease; among equal decreases the
/// lowest feature index, then the lowest threshold, wins. A zero decrease is
/// still a valid split on an impure node.
class TreeBuilder {
 public:
  TreeBuilder(const BinnedData& data, std::span<const double> y, const TreeParams& p, Rng& rng)
      : data_(data), y_(y), p_(p), rng_(rng) {}

  DecisionTree build(std::vector<std::size_t> samples) {
    tree_.nodes.clear();
    samples_ = std::move(samples);
    grow(0, samples_.size(), 0);
    return std::move(tree_);
  }

 private:
  struct Stats {
    double n = 0, s = 0, s2 = 0;  // count, sum, sum of squares (classification: sum = class-1 count)
  };

  struct Best {
    int feature = -1;
    int bin = -1;
    double score = -std::numeric_limits<double>::infinity();
  };

  // Larger is better. For Gini and SSE alike the child impurity is n - s^2/n
  // (classification with 0/1 targets: n - (c0^2 + c1^2)/n), so the score is the
  // sum over children of the "purity" term.
  double purity(const Stats& st) const {
    if (st.n == 0) return 0;
    if (p_.regression) return st.s * st.s / st.n;
    const double c0 = st.n - st.s;
    return (st.s * st.s + c0 * c0) / st.n;
  }

  bool pure(const Stats& st) const {
    if (p_.regression) return st.s2 * st.n - st.s * st.s <= 1e-12 * std::max(1.0, st.s2 * st.n);
    return st.s == 0 || st.s == st.n;
  }

  int grow(std::size_t lo, std::size_t hi, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    Stats st;
    for (std::size_t k = lo; k < hi; ++k) {
      const double v = y_[samples_[k]];
      st.n += 1;
      st.s += v;
      st.s2 += v * v;
    }
    tree_.nodes[static_cast<std::size_t>(id)].value = st.s / st.n;
    if (pure(st) || (p_.max_depth >= 0 && depth >= p_.max_depth) ||
        static_cast<int>(hi - lo) < p_.min_samples_split)
      return id;

    const Best best = find_split(lo, hi, st);
    if (best.feature < 0) return id;

    // Partition [lo, hi) so bins <= best.bin come first.
    const auto mid_it = std::stable_partition(
        samples_.begin() + static_cast<std::ptrdiff_t>(lo), samples_.begin() + static_cast<std::ptrdiff_t>(hi),
        [&](std::size_t s) { return data_.at(static_cast<Eigen::Index>(s), best.feature) <= best.bin; });
    const auto mid = static_cast<std::size_t>(mid_it - samples_.begin());
    const double thr = data_.split_value[static_cast<std::size_t>(best.feature)][static_cast<std::size_t>(best.bin)];
    const int left = grow(lo, mid, depth + 1);
    const int right = grow(mid, hi, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = thr;
    node.left = left;
    node.right = right;
    return id;
  }

  Best find_split(std::size_t lo, std::size_t hi, const Stats& total) {
    const auto d = static_cast<int>(data_.cols);
    // Features visited in a random order; the first max_features are the
    // candidate set, later ones only if no candidate can split at all.
    order_.resize(static_cast<std::size_t>(d));
    std::iota(order_.begin(), order_.end(), 0);
    Best best;
    int examined = 0;
    for (int k = 0; k < d; ++k) {
      const std::size_t pick = static_cast<std::size_t>(k) + rng_.index(static_cast<std::uint64_t>(d - k));
      std::swap(order_[static_cast<std::size_t>(k)], order_[pick]);
      const int f = order_[static_cast<std::size_t>(k)];
      if (examined >= p_.max_features && best.feature >= 0) break;
      if (scan_feature(f, lo, hi, total, best)) ++examined;
    }
    return best;
  }

  // Returns true when the feature takes more than one bin in the node.
  bool scan_feature(int f, std::size_t lo, std::size_t hi, const Stats& total, Best& best) {
    hist_.resize(static_cast<std::size_t>(kMaxBins));
    touched_.clear();
    for (std::size_t k = lo; k < hi; ++k) {
      const std::size_t s = samples_[k];
      const int b = data_.at(static_cast<Eigen::Index>(s), f);
      auto& h = hist_[static_cast<std::size_t>(b)];
      if (h.n == 0) touched_.push_back(b);
      const double v = y_[s];
      h.n += 1;
      h.s += v;
    }
    const bool splittable = touched_.size() > 1;
    if (splittable) {
      std::sort(touched_.begin(), touched_.end());
      Stats left;
      for (std::size_t t = 0; t + 1 < touched_.size(); ++t) {
        const auto& h = hist_[static_cast<std::size_t>(touched_[t])];
        left.n += h.n;
        left.s += h.s;
        const Stats right{total.n - left.n, total.s - left.s, 0};
        const double score = purity(left) + purity(right);
        const double tol = 1e-12 * std::max(1.0, std::abs(score));
        bool better = score > best.score + tol;
        if (!better && std::abs(score - best.score) <= tol)
          better = f < best.feature || (f == best.feature && touched_[t] < best.bin);
        if (better) {
          best.feature = f;
          best.bin = touched_[t];
          best.score = score;
        }
      }
    }
    for (int b : touched_) hist_[static_cast<std::size_t>(b)] = {};
    return splittable;
  }

  const BinnedData& data_;
  std::span<const double> y_;
  TreeParams p_;
  Rng& rng_;
  DecisionTree tree_;
  std::vector<std::size_t> samples_;
  std::vector<int> order_;
  std::vector<Stats> hist_;
  std::vector<int> touched_;
};

}  // namespace detail

struct ForestModel {
  bool regression = false;
  std::vector<DecisionTree> trees;

  /// Mean leaf value over trees: class-1 probability or regression estimate.
  std::vector<double> predict_value(const Eigen::MatrixXd& x) const {
    std::vector<double> out(static_cast<std::size_t>(x.rows()), 0.0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double acc = 0;
      for (const auto& t : trees) acc += t.predict_row(x.row(i));
      out[static_cast<std::size_t>(i)] = acc / static_cast<double>(trees.size());
    }
    return out;
  }

  /// Majority vote of per-tree labels; ties go to class 0.
  std::vector<int> predict(const Eigen::MatrixXd& x) const {
    std::vector<int> out(static_cast<std::size_t>(x.rows()), 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      std::size_t votes = 0;
      for (const auto& t : trees) votes += t.predict_row(x.row(i)) > 0.5;
      out[static_cast<std::size_t>(i)] = 2 * votes > trees.size();
    }
    return out;
  }
};

/// Trees are grown from independent substreams, so tree t does not depend on
/// how many trees precede it.
inline ForestModel train_forest(const Eigen::MatrixXd& x, std::span<const double> y, const ModelSpec& spec) {
  spec.validate();
  detail::check_xy(x, y.size());
  const bool regression = spec.kind == ModelKind::random_forest_reg;
  if (!regression)
    for (double v : y)
      if (v != 0.0 && v != 1.0) fail_validation("forest classifier labels must be 0 or 1");

  const detail::BinnedData data = detail::bin_features(x);
  detail::TreeParams p;
  p.regression = regression;
  p.max_depth = spec.max_depth;
  p.min_samples_split = spec.min_samples_split;
  const auto d = static_cast<int>(x.cols());
  p.max_features = spec.max_features > 0
                       ? std::min(spec.max_features, d)
                       : std::max(1, regression ? d / 3 : static_cast<int>(std::sqrt(static_cast<double>(d))));

  ForestModel m;
  m.regression = regression;
  const std::size_t n = y.size();
  for (int t = 0; t < spec.n_trees; ++t) {
    Rng rng = Rng::substream(spec.seed ^ stream::forest, static_cast<std::uint64_t>(t));
    std::vector<std::size_t> samples(n);
    if (spec.bootstrap)
      for (auto& s : samples) s = rng.index(n);
    else
      std::iota(samples.begin(), samples.end(), std::size_t{0});
    detail::TreeBuilder builder(data, y, p, rng);
    m.trees.push_back(builder.build(std::move(samples)));
  }
  return m;
}

inline ForestModel train_forest(const Eigen::MatrixXd& x, std::span<const int> y, const ModelSpec& spec) {
  std::vector<double> yd(y.begin(), y.end());
  return train_forest(x, std::span<const double>(yd), spec);
}

}  // namespace sdi
