#pragma once

// Feature-space outlier detectors (isolation forest, local outlier factor)
// and a harness that compares their 10% removals with discrepancy filtering.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdi/dataset.hpp"
#include "sdi/error.hpp"
#include "sdi/experiments.hpp"
#include "sdi/rng.hpp"
#include "sdi/text.hpp"

namespace sdi {

struct OutlierScores {
  std::string method;
  double contamination = 0.1;
  std::vector<std::string> subject_ids;
  std::vector<double> scores;                // larger = more anomalous
  std::vector<std::size_t> flagged_index;    // in flagging order
  std::vector<std::string> flagged_ids;

  std::vector<std::size_t> retained_index() const {
    std::vector<std::uint8_t> drop(subject_ids.size(), 0);
    for (std::size_t j : flagged_index) drop[j] = 1;
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < subject_ids.size(); ++j)
      if (!drop[j]) out.push_back(j);
    return out;
  }
};

/// Flags the floor(c*N) highest scores; ties broken by ascending subject id.
inline void flag_top(OutlierScores& s, double contamination) {
  if (!(contamination > 0 && contamination < 1)) fail_validation("contamination must lie in (0,1)");
  s.contamination = contamination;
  std::vector<std::size_t> order(s.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (s.scores[a] != s.scores[b]) return s.scores[a] > s.scores[b];
    return s.subject_ids[a] < s.subject_ids[b];
  });
  const auto k = static_cast<std::size_t>(std::floor(contamination * static_cast<double>(s.scores.size())));
  s.flagged_index.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  s.flagged_ids.clear();
  for (std::size_t j : s.flagged_index) s.flagged_ids.push_back(s.subject_ids[j]);
}

inline void write_outlier_csv(std::ostream& out, const OutlierScores& s,
                              std::span<const std::string> comment = {}) {
  for (const auto& c : comment) out << "# " << c << '\n';
  std::vector<std::uint8_t> flag(s.subject_ids.size(), 0);
  for (std::size_t j : s.flagged_index) flag[j] = 1;
  out << "subject_id,score,flagged\n";
  for (std::size_t j = 0; j < s.subject_ids.size(); ++j)
    out << s.subject_ids[j] << ',' << text::format_double(s.scores[j]) << ',' << int(flag[j]) << '\n';
}

// ---------------------------------------------------------------------------
// Isolation forest

/// Average unsuccessful-search path length in a binary search tree of n keys.
inline double average_path_length(double n) {
  if (n <= 1) return 0.0;
  if (n <= 2) return 1.0;
  constexpr double euler_gamma = 0.5772156649;
  const double h = std::log(n - 1) + euler_gamma;
  return 2.0 * h - 2.0 * (n - 1) / n;
}

/// s = 2^(-E[h] / c(psi)).
inline double isolation_score(double mean_path, double psi) {
  return std::exp2(-mean_path / average_path_length(psi));
}

struct IsolationSplit {
  int feature = -1;  // -1: no feature can split, node becomes external
  double value = 0;  // go left when x < value
};

/// Chooses a split for the node holding `rows` of `x`.
using SplitSampler =
    std::function<IsolationSplit(const Eigen::MatrixXd& x, std::span<const std::size_t> rows, Rng& rng)>;

/// Feature uniform among those with a non-zero range in the node, value
/// uniform in the open interval (min, max).
inline IsolationSplit uniform_split(const Eigen::MatrixXd& x, std::span<const std::size_t> rows, Rng& rng) {
  std::vector<int> usable;
  std::vector<std::pair<double, double>> range;
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t r : rows) {
      lo = std::min(lo, x(static_cast<Eigen::Index>(r), f));
      hi = std::max(hi, x(static_cast<Eigen::Index>(r), f));
    }
    if (hi > lo) {
      usable.push_back(static_cast<int>(f));
      range.emplace_back(lo, hi);
    }
  }
  if (usable.empty()) return {};
  const std::size_t k = rng.index(usable.size());
  const auto [lo, hi] = range[k];
  double v = rng.uniform(lo, hi);
  while (v <= lo) v = rng.uniform(lo, hi);
  return {usable[k], v};
}

struct IsolationTree {
  struct Node {
    int feature = -1;
    double value = 0;
    int left = -1, right = -1;
    std::size_t size = 0;  // training points that reached an external node
  };
  std::vector<Node> nodes;

  /// Depth of the external node reached plus c(size) for unresolved leaves.
  double path_length(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    int k = 0;
    int depth = 0;
    while (nodes[static_cast<std::size_t>(k)].feature >= 0) {
      const auto& n = nodes[static_cast<std::size_t>(k)];
      k = row(n.feature) < n.value ? n.left : n.right;
      ++depth;
    }
    return depth + average_path_length(static_cast<double>(nodes[static_cast<std::size_t>(k)].size));
  }
};

namespace detail {

inline int grow_isolation(IsolationTree& t, const Eigen::MatrixXd& x, std::vector<std::size_t>& rows,
                          std::size_t lo, std::size_t hi, int depth, int limit, const SplitSampler& sampler,
                          Rng& rng) {
  const int id = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  t.nodes.back().size = hi - lo;
  if (hi - lo <= 1 || depth >= limit) return id;
  const std::span<const std::size_t> node_rows(rows.data() + lo, hi - lo);
  const IsolationSplit s = sampler(x, node_rows, rng);
  if (s.feature < 0) return id;
  const auto mid = static_cast<std::size_t>(
      std::stable_partition(rows.begin() + static_cast<std::ptrdiff_t>(lo), rows.begin() + static_cast<std::ptrdiff_t>(hi),
                            [&](std::size_t r) { return x(static_cast<Eigen::Index>(r), s.feature) < s.value; }) -
      rows.begin());
  const int left = grow_isolation(t, x, rows, lo, mid, depth + 1, limit, sampler, rng);
  const int right = grow_isolation(t, x, rows, mid, hi, depth + 1, limit, sampler, rng);
  auto& n = t.nodes[static_cast<std::size_t>(id)];
  n.feature = s.feature;
  n.value = s.value;
  n.left = left;
  n.right = right;
  return id;
}

}  // namespace detail

/// Tree over the given rows of `x` with height limit ceil(log2(rows)).
inline IsolationTree build_isolation_tree(const Eigen::MatrixXd& x, std::vector<std::size_t> rows, Rng& rng,
                                          const SplitSampler& sampler = uniform_split) {
  IsolationTree t;
  const int limit = static_cast<int>(std::ceil(std::log2(std::max<double>(2, static_cast<double>(rows.size())))));
  detail::grow_isolation(t, x, rows, 0, rows.size(), 0, limit, sampler, rng);
  return t;
}

struct IsolationForestOptions {
  int n_trees = 100;
  std::size_t subsample = 256;
  std::uint64_t seed = 2025;
  double contamination = 0.1;
};

inline OutlierScores isolation_forest(const FeatureMatrix& fm, const IsolationForestOptions& opt = {},
                                      const SplitSampler& sampler = uniform_split) {
  const std::size_t n = fm.subjects();
  if (n < 2) fail_validation("isolation forest needs at least 2 points");
  if (opt.n_trees < 1) fail_validation("isolation forest needs at least one tree");
  if (opt.subsample < 2) fail_validation("isolation forest subsample must be >= 2");
  const std::size_t psi = std::min(opt.subsample, n);
  std::vector<double> total(n, 0.0);
  for (int t = 0; t < opt.n_trees; ++t) {
    Rng rng = Rng::substream(opt.seed ^ stream::iforest, static_cast<std::uint64_t>(t));
    // Subsample without replacement: partial Fisher-Yates.
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < psi; ++i) std::swap(pool[i], pool[i + rng.index(n - i)]);
    pool.resize(psi);
    std::sort(pool.begin(), pool.end());
    const IsolationTree tree = build_isolation_tree(fm.x, std::move(pool), rng, sampler);
    for (std::size_t j = 0; j < n; ++j) total[j] += tree.path_length(fm.x.row(static_cast<Eigen::Index>(j)));
  }
  OutlierScores s;
  s.method = "iforest";
  s.subject_ids = fm.subject_ids;
  s.scores.resize(n);
  for (std::size_t j = 0; j < n; ++j)
    s.scores[j] = isolation_score(total[j] / opt.n_trees, static_cast<double>(psi));
  flag_top(s, opt.contamination);
  return s;
}

// ---------------------------------------------------------------------------
// Local outlier factor

struct LofOptions {
  int k_neighbors = 20;
  double contamination = 0.1;
};

/// Exact-distance LOF. The k-neighborhood includes every point tied with the
/// k-th distance. A point whose mean reachability is 0 has infinite local
/// density; an infinite/infinite density ratio counts as 1.
inline OutlierScores lof(const FeatureMatrix& fm, const LofOptions& opt = {}) {
  const std::size_t n = fm.subjects();
  const int k = opt.k_neighbors;
  if (k < 1) fail_validation("lof: k_neighbors must be >= 1");
  if (n <= static_cast<std::size_t>(k))
    fail_validation("lof: need more than k_neighbors=" + std::to_string(k) + " points");
  const Eigen::MatrixXd& x = fm.x;
  const Eigen::VectorXd sq = x.rowwise().squaredNorm();

  std::vector<std::vector<std::pair<double, std::size_t>>> hood(n);
  std::vector<double> kdist(n);
  std::vector<std::pair<double, std::size_t>> d(n - 1);
  constexpr Eigen::Index block = 256;
  for (Eigen::Index b0 = 0; b0 < static_cast<Eigen::Index>(n); b0 += block) {
    const Eigen::Index bn = std::min<Eigen::Index>(block, static_cast<Eigen::Index>(n) - b0);
    const Eigen::MatrixXd gram = x.middleRows(b0, bn) * x.transpose();
    for (Eigen::Index bi = 0; bi < bn; ++bi) {
      const auto i = static_cast<std::size_t>(b0 + bi);
      std::size_t m = 0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        // Gram-form distance, refined exactly for candidate neighbours below.
        d[m++] = {std::max(0.0, sq(static_cast<Eigen::Index>(i)) + sq(static_cast<Eigen::Index>(j)) -
                                    2 * gram(bi, static_cast<Eigen::Index>(j))),
                  j};
      }
      // Keep a generous candidate set, then recompute distances exactly.
      const std::size_t cand = std::min(n - 1, static_cast<std::size_t>(4 * k + 16));
      std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(cand - 1), d.end());
      double cutoff = 0;
      for (std::size_t c = 0; c < cand; ++c) cutoff = std::max(cutoff, d[c].first);
      std::vector<std::pair<double, std::size_t>> exact;
      for (const auto& [g, j] : d)
        if (g <= cutoff * (1 + 1e-9) + 1e-12)
          exact.emplace_back((x.row(static_cast<Eigen::Index>(i)) - x.row(static_cast<Eigen::Index>(j))).norm(), j);
      std::sort(exact.begin(), exact.end());
      const double kd = exact[static_cast<std::size_t>(k - 1)].first;
      kdist[i] = kd;
      for (const auto& e : exact) {
        if (e.first > kd) break;
        hood[i].push_back(e);
      }
    }
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> lrd(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0;
    for (const auto& [dist, o] : hood[i]) sum += std::max(kdist[o], dist);
    const double mean = sum / static_cast<double>(hood[i].size());
    lrd[i] = mean > 0 ? 1.0 / mean : inf;
  }
  OutlierScores s;
  s.method = "lof";
  s.subject_ids = fm.subject_ids;
  s.scores.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0;
    for (const auto& [dist, o] : hood[i]) {
      (void)dist;
      if (std::isinf(lrd[i]))
        sum += std::isinf(lrd[o]) ? 1.0 : 0.0;
      else
        sum += lrd[o] / lrd[i];
    }
    s.scores[i] = sum / static_cast<double>(hood[i].size());
  }
  flag_top(s, opt.contamination);
  return s;
}

// ---------------------------------------------------------------------------
// Comparison harness

struct OutlierComparisonOptions {
  double contamination = 0.1;
  ExperimentOptions experiment;
  IsolationForestOptions iforest;
  LofOptions lof;
};

/// For each method, remove its flagged subjects and run the RBC
/// classification and the regression protocol with the given models. SDI
/// flags come from each factor's filter plan at q = contamination; the
/// baselines flag once on the feature matrix and apply to every factor.
inline ExperimentReport compare_outlier_methods(const SynthCohort& c, const std::vector<std::string>& factors,
                                                const ModelSpec& classifier, const ModelSpec& regressor,
                                                const OutlierComparisonOptions& opt = {}) {
  ExperimentReport rep;
  rep.name = "outliers";
  rep.provenance = detail::base_provenance(c, opt.experiment.cv.seed);
  rep.provenance.notes.push_back("baselines score the synthetic feature matrix; sdi scores item responses");

  auto iopt = opt.iforest;
  iopt.contamination = opt.contamination;
  auto lopt = opt.lof;
  lopt.contamination = opt.contamination;
  const OutlierScores iso = isolation_forest(c.features, iopt);
  const OutlierScores lofs = lof(c.features, lopt);
  detail::PlanCache plans(c, opt.experiment.filter_mode, rep.provenance);

  auto run = [&](const std::string& method, const std::string& factor, std::vector<std::size_t> kept) {
    std::sort(kept.begin(), kept.end());
    const std::size_t f = c.factor_index(factor);
    const LabelSet labels = binarize(bands_of(c.responses[f], c.specs[f]), LabelScheme::RBC);
    std::vector<std::size_t> rows;
    for (std::size_t r : kept)
      if (labels.retained[r]) rows.push_back(r);
    ReportRow cls = classification_cell(c, rows, labels, classifier, opt.experiment.cv);
    ReportRow reg = regression_cell(c, kept, detail::targets_of(c, f), regressor, opt.experiment.cv);
    for (ReportRow* r : {&cls, &reg}) {
      r->experiment = "outliers";
      r->method = method;
      r->factor = factor;
      r->q = opt.contamination;
      rep.rows.push_back(*r);
    }
  };

  for (const auto& factor : factors) {
    run("iforest", factor, iso.retained_index());
    run("lof", factor, lofs.retained_index());
    run("sdi", factor, plans.get(c.factor_index(factor), opt.contamination).retained_index);
  }
  ReportRow ocsvm;
  ocsvm.experiment = "outliers";
  ocsvm.method = "ocsvm";
  ocsvm.q = opt.contamination;
  ocsvm.status = "not implemented";
  ocsvm.message = "one-class SVM is out of scope";
  rep.rows.push_back(ocsvm);
  return rep;
}

/// Method x factor table: classification means from the RBC row, MAE/RMSE
/// from the regression row.
inline void write_outlier_grid_csv(std::ostream& out, const ExperimentReport& rep,
                                   std::span<const std::string> comment = {}) {
  for (const auto& c : comment) out << "# " << c << '\n';
  out << "method,factor,accuracy,precision,recall,f1,mae,rmse,status\n";
  auto num = [](double v) { return text::format_double(v); };
  for (const auto& r : rep.rows) {
    if (r.status == "not implemented") {
      out << r.method << ",,,,,,,," << r.status << '\n';
      continue;
    }
    if (r.scheme != "rbc") continue;
    const ReportRow* reg = nullptr;
    for (const auto& o : rep.rows)
      if (o.method == r.method && o.factor == r.factor && o.scheme == "regression") reg = &o;
    out << r.method << ',' << r.factor << ',';
    if (r.metrics)
      out << num(r.metrics->accuracy.mean) << ',' << num(r.metrics->precision.mean) << ','
          << num(r.metrics->recall.mean) << ',' << num(r.metrics->f1.mean) << ',';
    else
      out << ",,,,";
    if (reg && reg->metrics)
      out << num(reg->metrics->mae.mean) << ',' << num(reg->metrics->rmse.mean) << ',';
    else
      out << ",,";
    const bool ok = r.status == "ok" && reg && reg->status == "ok";
    out << (ok ? "ok" : "failed") << '\n';
  }
}

}  // namespace sdi
