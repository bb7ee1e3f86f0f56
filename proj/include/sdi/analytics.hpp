#pragma once

// Inter-factor correlation, interaction regression, k-means clustering and
// cluster validity indices over the three factor totals.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sdi/error.hpp"
#include "sdi/rng.hpp"
#include "sdi/scale.hpp"

namespace sdi {

/// N x 3 multiplied totals, columns depression, anxiety, stress.
using FactorScores = Eigen::MatrixXd;

inline FactorScores factor_scores(std::span<const ResponseMatrix> responses,
                                  std::span<const ScaleSpec> specs) {
  if (responses.size() != 3 || specs.size() != 3)
    fail_validation("factor scores need exactly three scales");
  const auto n = static_cast<Eigen::Index>(responses[0].subjects());
  FactorScores x(n, 3);
  for (Eigen::Index f = 0; f < 3; ++f) {
    const auto& r = responses[static_cast<std::size_t>(f)];
    if (static_cast<Eigen::Index>(r.subjects()) != n)
      fail_validation("factor scales disagree on subject count");
    const auto t = total_scores(r, specs[static_cast<std::size_t>(f)]);
    for (Eigen::Index j = 0; j < n; ++j) x(j, f) = t[static_cast<std::size_t>(j)];
  }
  return x;
}

/// Product-moment correlation.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail_validation("pearson: length mismatch");
  if (x.size() < 2) fail_validation("pearson: need at least two observations");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0)
    fail_validation("pearson: correlation undefined for a constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

struct RegressionFit {
  double intercept = 0.0;
  std::vector<double> main;         // one per predictor
  std::vector<double> interaction;  // one per unordered predictor pair
  std::vector<std::string> predictor_names;
  double r_squared = 0.0;
  std::vector<double> residuals;

  std::vector<double> coefficients() const {
    std::vector<double> c{intercept};
    c.insert(c.end(), main.begin(), main.end());
    c.insert(c.end(), interaction.begin(), interaction.end());
    return c;
  }
};

/// Least squares of y on [1, x1, x2, x1*x2].
inline RegressionFit ols_interactions(std::span<const double> y, std::span<const double> x1,
                                      std::span<const double> x2,
                                      std::string name1 = "x1", std::string name2 = "x2") {
  const std::size_t n = y.size();
  if (x1.size() != n || x2.size() != n) fail_validation("ols: length mismatch");
  constexpr int p = 4;
  if (n <= p)
    fail_validation("ols: need more than " + std::to_string(p) + " observations");

  Eigen::MatrixXd design(static_cast<Eigen::Index>(n), p);
  Eigen::VectorXd target(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    design(r, 0) = 1.0;
    design(r, 1) = x1[i];
    design(r, 2) = x2[i];
    design(r, 3) = x1[i] * x2[i];
    target(r) = y[i];
  }

  const std::vector<std::string> columns{"intercept", name1, name2, name1 + "*" + name2};
  // Name the first column that adds no rank.
  for (int c = 1; c <= p; ++c) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.leftCols(c));
    if (qr.rank() < c) {
      std::string others;
      for (int k = 0; k < c - 1; ++k) others += (k ? ", " : "") + columns[static_cast<std::size_t>(k)];
      fail_validation("ols: rank-deficient design; column '" +
                      columns[static_cast<std::size_t>(c - 1)] +
                      "' is collinear with {" + others + "}");
    }
  }

  const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(target);
  const Eigen::VectorXd resid = target - design * beta;

  RegressionFit fit;
  fit.intercept = beta(0);
  fit.main = {beta(1), beta(2)};
  fit.interaction = {beta(3)};
  fit.predictor_names = {std::move(name1), std::move(name2)};
  fit.residuals.assign(resid.data(), resid.data() + resid.size());
  const double ss_res = resid.squaredNorm();
  const double ss_tot = (target.array() - target.mean()).matrix().squaredNorm();
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

inline nlohmann::json to_json(const RegressionFit& fit) {
  return {{"intercept", fit.intercept},
          {"main", fit.main},
          {"interaction", fit.interaction},
          {"predictors", fit.predictor_names},
          {"r_squared", fit.r_squared}};
}

struct ValidityIndices {
  double silhouette = 0.0;
  double davies_bouldin = 0.0;
  double calinski_harabasz = 0.0;
};

struct ClusterResult {
  int k = 0;
  std::vector<int> assignments;
  Eigen::MatrixXd centroids;  // k x dims
  double inertia = 0.0;
  ValidityIndices validity;
  int best_restart = 0;
};

namespace detail {

inline double sq_dist(const Eigen::MatrixXd& x, Eigen::Index i, const Eigen::MatrixXd& c,
                      Eigen::Index k) {
  return (x.row(i) - c.row(k)).squaredNorm();
}

inline Eigen::MatrixXd kmeanspp_seed(const Eigen::MatrixXd& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd centroids(k, x.cols());
  std::vector<std::uint8_t> chosen(static_cast<std::size_t>(n), 0);
  Eigen::Index first = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n)));
  centroids.row(0) = x.row(first);
  chosen[static_cast<std::size_t>(first)] = 1;
  std::vector<double> d2(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) d2[static_cast<std::size_t>(i)] = sq_dist(x, i, centroids, 0);

  for (int c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[static_cast<std::size_t>(i)];
        if (u < acc && d2[static_cast<std::size_t>(i)] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0)
        for (Eigen::Index i = n - 1; i >= 0; --i)
          if (d2[static_cast<std::size_t>(i)] > 0.0) {
            pick = i;
            break;
          }
    }
    if (pick < 0) {
      // Every point coincides with a centroid: take an unused point.
      std::vector<Eigen::Index> free;
      for (Eigen::Index i = 0; i < n; ++i)
        if (!chosen[static_cast<std::size_t>(i)]) free.push_back(i);
      pick = free[rng.index(free.size())];
    }
    chosen[static_cast<std::size_t>(pick)] = 1;
    centroids.row(c) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], sq_dist(x, i, centroids, c));
  }
  return centroids;
}

inline double assign(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids,
                     std::vector<int>& assignment) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = 0;
    double best_d = sq_dist(x, i, centroids, 0);
    for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
      const double d = sq_dist(x, i, centroids, c);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(c);
      }
    }
    assignment[static_cast<std::size_t>(i)] = best;
    inertia += best_d;
  }
  return inertia;
}

inline Eigen::MatrixXd update_centroids(const Eigen::MatrixXd& x, int k, std::vector<int>& assignment,
                                        const Eigen::MatrixXd& previous) {
  Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
  std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    sums.row(assignment[static_cast<std::size_t>(i)]) += x.row(i);
    ++counts[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])];
  }
  // Empty cluster: move the point farthest from its own centroid into it.
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) continue;
    Eigen::Index far = -1;
    double far_d = -1.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const int own = assignment[static_cast<std::size_t>(i)];
      if (counts[static_cast<std::size_t>(own)] <= 1) continue;
      const double d = sq_dist(x, i, previous, own);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far < 0) continue;
    const int own = assignment[static_cast<std::size_t>(far)];
    sums.row(own) -= x.row(far);
    --counts[static_cast<std::size_t>(own)];
    sums.row(c) = x.row(far);
    counts[static_cast<std::size_t>(c)] = 1;
    assignment[static_cast<std::size_t>(far)] = c;
  }
  Eigen::MatrixXd centroids = previous;
  for (int c = 0; c < k; ++c)
    if (counts[static_cast<std::size_t>(c)] > 0)
      centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
  return centroids;
}

inline double inertia_of(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids,
                         const std::vector<int>& assignment) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    s += sq_dist(x, i, centroids, assignment[static_cast<std::size_t>(i)]);
  return s;
}

/// Single-point transfers: move a point whenever that lowers the inertia,
/// using exact centroid updates, until no move helps. Ends at a Lloyd fixed
/// point that is also stable under every single transfer.
inline Eigen::MatrixXd hartigan_refine(const Eigen::MatrixXd& x, int k, std::vector<int>& assignment,
                                       Eigen::MatrixXd centroids, std::vector<double>* history) {
  std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
  for (int a : assignment) counts[static_cast<std::size_t>(a)] += 1;
  for (bool moved = true; moved;) {
    moved = false;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const int a = assignment[static_cast<std::size_t>(i)];
      const double na = counts[static_cast<std::size_t>(a)];
      if (na <= 1) continue;
      const double leave = na / (na - 1) * sq_dist(x, i, centroids, a);
      int best = a;
      double best_gain = 0.0;
      for (int b = 0; b < k; ++b) {
        if (b == a) continue;
        const double nb = counts[static_cast<std::size_t>(b)];
        const double gain = leave - nb / (nb + 1) * sq_dist(x, i, centroids, b);
        if (gain > best_gain * (1 + 1e-12) + 1e-12) {
          best_gain = gain;
          best = b;
        }
      }
      if (best == a) continue;
      const double nb = counts[static_cast<std::size_t>(best)];
      centroids.row(a) = (centroids.row(a) * na - x.row(i)) / (na - 1);
      centroids.row(best) = (centroids.row(best) * nb + x.row(i)) / (nb + 1);
      counts[static_cast<std::size_t>(a)] -= 1;
      counts[static_cast<std::size_t>(best)] += 1;
      assignment[static_cast<std::size_t>(i)] = best;
      moved = true;
    }
    if (moved) {
      // Recompute means exactly to shed drift from the incremental updates.
      centroids = update_centroids(x, k, assignment, centroids);
      if (history) history->push_back(inertia_of(x, centroids, assignment));
    }
  }
  return centroids;
}

}  // namespace detail

/// Silhouette (mean over points, singleton clusters contribute 0),
/// Davies-Bouldin and Calinski-Harabasz for a hard assignment.
inline ValidityIndices validity_indices(const Eigen::MatrixXd& x, std::span<const int> assignment) {
  const Eigen::Index n = x.rows();
  if (static_cast<Eigen::Index>(assignment.size()) != n)
    fail_validation("validity: assignment length does not match data");
  const int k = assignment.empty() ? 0 : *std::max_element(assignment.begin(), assignment.end()) + 1;
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(k, 0)), 0);
  for (int a : assignment) {
    if (a < 0) fail_validation("validity: negative cluster index");
    ++counts[static_cast<std::size_t>(a)];
  }
  const auto used = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
  if (used < 2) fail_validation("validity indices need at least two non-empty clusters");
  for (std::size_t c = 0; c < counts.size(); ++c)
    if (counts[c] == 0)
      fail_validation("validity: cluster " + std::to_string(c) + " is empty");

  Eigen::MatrixXd centroids = Eigen::MatrixXd::Zero(k, x.cols());
  for (Eigen::Index i = 0; i < n; ++i) centroids.row(assignment[static_cast<std::size_t>(i)]) += x.row(i);
  for (int c = 0; c < k; ++c) centroids.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  const Eigen::RowVectorXd grand = x.colwise().mean();

  ValidityIndices out;

  // Silhouette.
  double sil_sum = 0.0;
  std::vector<double> dist_sum(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::fill(dist_sum.begin(), dist_sum.end(), 0.0);
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) dist_sum[static_cast<std::size_t>(assignment[static_cast<std::size_t>(j)])] += (x.row(i) - x.row(j)).norm();
    const int own = assignment[static_cast<std::size_t>(i)];
    const std::size_t own_n = counts[static_cast<std::size_t>(own)];
    if (own_n <= 1) continue;
    const double a = dist_sum[static_cast<std::size_t>(own)] / static_cast<double>(own_n - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c)
      if (c != own) b = std::min(b, dist_sum[static_cast<std::size_t>(c)] / static_cast<double>(counts[static_cast<std::size_t>(c)]));
    const double denom = std::max(a, b);
    sil_sum += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  out.silhouette = sil_sum / static_cast<double>(n);

  // Davies-Bouldin.
  std::vector<double> scatter(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = assignment[static_cast<std::size_t>(i)];
    scatter[static_cast<std::size_t>(c)] += (x.row(i) - centroids.row(c)).norm();
  }
  for (int c = 0; c < k; ++c) scatter[static_cast<std::size_t>(c)] /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  double db = 0.0;
  for (int c = 0; c < k; ++c) {
    double worst = 0.0;
    for (int o = 0; o < k; ++o) {
      if (o == c) continue;
      const double sep = (centroids.row(c) - centroids.row(o)).norm();
      const double r = sep > 0.0 ? (scatter[static_cast<std::size_t>(c)] + scatter[static_cast<std::size_t>(o)]) / sep
                                 : std::numeric_limits<double>::infinity();
      worst = std::max(worst, r);
    }
    db += worst;
  }
  out.davies_bouldin = db / k;

  // Calinski-Harabasz.
  double between = 0.0;
  double within = 0.0;
  for (int c = 0; c < k; ++c)
    between += static_cast<double>(counts[static_cast<std::size_t>(c)]) * (centroids.row(c) - grand).squaredNorm();
  for (Eigen::Index i = 0; i < n; ++i)
    within += (x.row(i) - centroids.row(assignment[static_cast<std::size_t>(i)])).squaredNorm();
  out.calinski_harabasz = within > 0.0 && n > k
                              ? (between / (k - 1)) / (within / static_cast<double>(n - k))
                              : std::numeric_limits<double>::infinity();
  return out;
}

struct KMeansOptions {
  int restarts = 30;
  int max_iterations = 300;
  /// When set, receives the inertia after every assignment step, one vector
  /// per restart.
  std::vector<std::vector<double>>* trace = nullptr;
};

/// Lloyd iterations from k-means++ seeds, then single-point transfer
/// refinement; best of several restarts (lowest inertia, ties to the earliest
/// restart). Each restart draws from its own substream of `seed`.
inline ClusterResult kmeans(const Eigen::MatrixXd& x, int k, std::uint64_t seed,
                            KMeansOptions options = {}) {
  if (k < 2) fail_validation("kmeans: k must be at least 2");
  if (x.rows() < k)
    fail_validation("kmeans: " + std::to_string(x.rows()) + " points cannot fill " +
                    std::to_string(k) + " clusters");
  if (options.restarts < 1) fail_validation("kmeans: need at least one restart");

  ClusterResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart < options.restarts; ++restart) {
    Rng rng = Rng::substream(seed ^ stream::kmeans, static_cast<std::uint64_t>(restart));
    Eigen::MatrixXd centroids = detail::kmeanspp_seed(x, k, rng);
    std::vector<int> assignment(static_cast<std::size_t>(x.rows()), 0);
    std::vector<double> history{detail::assign(x, centroids, assignment)};
    for (int it = 0; it < options.max_iterations; ++it) {
      centroids = detail::update_centroids(x, k, assignment, centroids);
      std::vector<int> next = assignment;
      history.push_back(detail::assign(x, centroids, next));
      if (next == assignment) break;
      assignment = std::move(next);
    }
    centroids = detail::hartigan_refine(x, k, assignment, centroids, &history);
    if (options.trace) options.trace->push_back(std::move(history));
    const double inertia = detail::inertia_of(x, centroids, assignment);
    if (inertia < best.inertia) {
      best.k = k;
      best.assignments = assignment;
      best.centroids = centroids;
      best.inertia = inertia;
      best.best_restart = restart;
    }
  }
  best.validity = validity_indices(x, best.assignments);
  return best;
}

/// Cluster2: the cluster whose centroid has the larger summed factor score is
/// abnormal. Cluster3Binary: clusters ordered by summed score, the middle one
/// dropped. Ties in the sum fall back to lexicographic centroid order.
inline LabelSet cluster_labelset(const ClusterResult& result, LabelScheme scheme) {
  if (scheme == LabelScheme::Cluster2 && result.k != 2)
    fail_validation("cluster2 labels need a 2-cluster solution, got k=" + std::to_string(result.k));
  if (scheme == LabelScheme::Cluster3Binary && result.k != 3)
    fail_validation("cluster3 labels need a 3-cluster solution, got k=" + std::to_string(result.k));
  if (scheme != LabelScheme::Cluster2 && scheme != LabelScheme::Cluster3Binary)
    fail_validation("cluster_labelset supports only cluster schemes");

  std::vector<int> order(static_cast<std::size_t>(result.k));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double sa = result.centroids.row(a).sum();
    const double sb = result.centroids.row(b).sum();
    if (sa != sb) return sa < sb;
    for (Eigen::Index d = 0; d < result.centroids.cols(); ++d)
      if (result.centroids(a, d) != result.centroids(b, d))
        return result.centroids(a, d) < result.centroids(b, d);
    return a < b;
  });
  std::vector<int> rank(static_cast<std::size_t>(result.k));
  for (int r = 0; r < result.k; ++r) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;

  LabelSet out;
  out.scheme = scheme;
  out.labels.resize(result.assignments.size(), 0);
  out.retained.resize(result.assignments.size(), 1);
  for (std::size_t j = 0; j < result.assignments.size(); ++j) {
    const int r = rank[static_cast<std::size_t>(result.assignments[j])];
    if (scheme == LabelScheme::Cluster2) {
      out.labels[j] = r == 1;
    } else if (r == 1) {
      out.retained[j] = 0;
    } else {
      out.labels[j] = r == 2;
    }
  }
  return out;
}

inline nlohmann::json to_json(const ClusterResult& r) {
  nlohmann::json centroids = nlohmann::json::array();
  for (Eigen::Index c = 0; c < r.centroids.rows(); ++c) {
    std::vector<double> row(r.centroids.cols());
    for (Eigen::Index d = 0; d < r.centroids.cols(); ++d) row[static_cast<std::size_t>(d)] = r.centroids(c, d);
    centroids.push_back(row);
  }
  std::vector<std::size_t> sizes(static_cast<std::size_t>(r.k), 0);
  for (int a : r.assignments) ++sizes[static_cast<std::size_t>(a)];
  return {{"k", r.k},
          {"inertia", r.inertia},
          {"sizes", sizes},
          {"centroids", centroids},
          {"silhouette", r.validity.silhouette},
          {"davies_bouldin", r.validity.davies_bouldin},
          {"calinski_harabasz", r.validity.calinski_harabasz}};
}

}  // namespace sdi
