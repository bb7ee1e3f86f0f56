#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <random>

#include "sdi/outliers.hpp"

using namespace sdi;

namespace {

FeatureMatrix from_points(const std::vector<std::vector<double>>& pts) {
  FeatureMatrix f;
  f.x.resize(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(pts[0].size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "q%03zu", i);
    f.subject_ids.emplace_back(id);
    for (std::size_t d = 0; d < pts[i].size(); ++d) f.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = pts[i][d];
  }
  return f;
}

double c_of(double n) {
  if (n <= 1) return 0;
  if (n <= 2) return 1;
  return 2 * (std::log(n - 1) + 0.5772156649) - 2 * (n - 1) / n;
}

// Expected path length of point p (sorted position) when every node cuts
// uniformly at one of its gaps, for the contiguous block [lo, hi).
double expected_path(int p, int lo, int hi, int depth, int limit) {
  const int size = hi - lo;
  if (size <= 1 || depth >= limit) return depth + c_of(size);
  double acc = 0;
  for (int cut = lo + 1; cut < hi; ++cut)
    acc += p < cut ? expected_path(p, lo, cut, depth + 1, limit) : expected_path(p, cut, hi, depth + 1, limit);
  return acc / (size - 1);
}

// Naive LOF: neighbourhood = all points within the k-distance.
std::vector<double> naive_lof(const Eigen::MatrixXd& x, int k) {
  const auto n = static_cast<std::size_t>(x.rows());
  auto dist = [&](std::size_t a, std::size_t b) { return (x.row(a) - x.row(b)).norm(); };
  std::vector<double> kd(n);
  std::vector<std::vector<std::size_t>> nb(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> d;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) d.push_back(dist(i, j));
    std::sort(d.begin(), d.end());
    kd[i] = d[k - 1];
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && dist(i, j) <= kd[i]) nb[i].push_back(j);
  }
  std::vector<double> lrd(n), out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (auto o : nb[i]) s += std::max(kd[o], dist(i, o));
    lrd[i] = nb[i].size() / s;
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (auto o : nb[i]) s += lrd[o] / lrd[i];
    out[i] = s / nb[i].size();
  }
  return out;
}

}  // namespace

TEST(IsolationForest, ScoreIsHalfWhenPathEqualsAverage) {
  for (double n : {2.0, 3.0, 16.0, 256.0, 1000.0}) EXPECT_EQ(isolation_score(average_path_length(n), n), 0.5);
  EXPECT_EQ(average_path_length(1), 0.0);
  EXPECT_EQ(average_path_length(2), 1.0);
  EXPECT_NEAR(average_path_length(256), c_of(256), 1e-15);
}

TEST(IsolationForest, ExhaustiveFivePointEnumeration) {
  const std::vector<double> v{-3.0, 0.5, 1.0, 4.0, 9.5};  // sorted
  Eigen::MatrixXd x(5, 1);
  for (int i = 0; i < 5; ++i) x(i, 0) = v[i];
  // Each contiguous block of size >= 2 is a node that picks one gap.
  std::vector<std::pair<int, int>> blocks;
  for (int size = 2; size <= 5; ++size)
    for (int lo = 0; lo + size <= 5; ++lo) blocks.emplace_back(lo, size);
  std::vector<int> radix;
  for (const auto& b : blocks) radix.push_back(b.second - 1);
  long tables = 1;
  for (int r : radix) tables *= r;
  ASSERT_EQ(tables, 288);

  std::vector<double> mean(5, 0.0);
  for (long t = 0; t < tables; ++t) {
    std::map<std::pair<int, int>, int> choice;
    long rest = t;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      choice[blocks[b]] = static_cast<int>(rest % radix[b]);
      rest /= radix[b];
    }
    SplitSampler pick = [&](const Eigen::MatrixXd&, std::span<const std::size_t> rows, Rng&) {
      const int lo = static_cast<int>(*std::min_element(rows.begin(), rows.end()));
      const int cut = lo + 1 + choice.at({lo, static_cast<int>(rows.size())});
      return IsolationSplit{0, 0.5 * (v[cut - 1] + v[cut])};
    };
    Rng rng(0);
    const auto tree = build_isolation_tree(x, {0, 1, 2, 3, 4}, rng, pick);
    for (int p = 0; p < 5; ++p) mean[p] += tree.path_length(x.row(p)) / tables;
  }
  const int limit = 3;  // ceil(log2 5)
  for (int p = 0; p < 5; ++p) {
    EXPECT_NEAR(mean[p], expected_path(p, 0, 5, 0, limit), 1e-6) << "point " << p;
    EXPECT_NEAR(isolation_score(mean[p], 5), std::exp2(-expected_path(p, 0, 5, 0, limit) / c_of(5)), 1e-6);
  }
}

TEST(IsolationForest, IsolatedPointScoresHighest) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 200; ++i) pts.push_back({nd(gen), nd(gen)});
  pts.push_back({12, -12});
  const auto s = isolation_forest(from_points(pts));
  EXPECT_EQ(std::max_element(s.scores.begin(), s.scores.end()) - s.scores.begin(), 200);
  EXPECT_EQ(s.flagged_index[0], 200u);
  const auto again = isolation_forest(from_points(pts));
  EXPECT_EQ(again.scores, s.scores);
}

TEST(IsolationForest, ConstantDataScoresUniformly) {
  const auto s = isolation_forest(from_points(std::vector<std::vector<double>>(30, {1.0, 2.0})));
  for (double v : s.scores) EXPECT_EQ(v, s.scores[0]);
  EXPECT_EQ(s.flagged_ids, (std::vector<std::string>{"q000", "q001", "q002"}));
}

TEST(Lof, InteriorOfUniformGridIsNearOne) {
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) pts.push_back({double(i), double(j)});
  for (int k : {5, 10, 20}) {
    LofOptions opt;
    opt.k_neighbors = k;
    const auto s = lof(from_points(pts), opt);
    for (int i = 2; i < 8; ++i)
      for (int j = 2; j < 8; ++j) {
        const double v = s.scores[i * 10 + j];
        EXPECT_GE(v, 0.9) << "k=" << k << " (" << i << "," << j << ")";
        EXPECT_LE(v, 1.1) << "k=" << k << " (" << i << "," << j << ")";
      }
  }
}

TEST(Lof, HandExampleOnALine) {
  LofOptions opt;
  opt.k_neighbors = 1;
  const auto s = lof(from_points({{0}, {1}, {2}, {10}}), opt);
  EXPECT_DOUBLE_EQ(s.scores[0], 1.0);
  EXPECT_DOUBLE_EQ(s.scores[1], 1.0);
  EXPECT_DOUBLE_EQ(s.scores[2], 1.0);
  EXPECT_DOUBLE_EQ(s.scores[3], 8.0);
}

TEST(Lof, MatchesNaiveImplementationWithTies) {
  std::mt19937_64 gen(2);
  std::uniform_int_distribution<int> ud(0, 6);
  for (int t = 0; t < 30; ++t) {
    std::vector<std::vector<double>> pts;
    std::set<std::pair<int, int>> seen;
    while (pts.size() < 25) {
      const int a = ud(gen), b = ud(gen);
      if (seen.insert({a, b}).second) pts.push_back({double(a), double(b)});
    }
    LofOptions opt;
    opt.k_neighbors = 1 + t % 6;
    const auto f = from_points(pts);
    const auto got = lof(f, opt);
    const auto want = naive_lof(f.x, opt.k_neighbors);
    for (std::size_t i = 0; i < pts.size(); ++i) ASSERT_NEAR(got.scores[i], want[i], 1e-12) << "trial " << t;
  }
}

TEST(Lof, DuplicatePointsHaveUnitScore) {
  LofOptions opt;
  opt.k_neighbors = 2;
  const auto s = lof(from_points({{0, 0}, {0, 0}, {0, 0}, {5, 5}}), opt);
  EXPECT_DOUBLE_EQ(s.scores[0], 1.0);
  EXPECT_TRUE(std::isinf(s.scores[3]));  // its neighbours have infinite density
  EXPECT_THROW(lof(from_points({{0}, {1}}), opt), Error);
}

TEST(Outliers, EachMethodFlagsFloorTenPercent) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  for (std::size_t n : {57u, 100u, 233u}) {
    std::vector<std::vector<double>> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back({nd(gen), nd(gen), nd(gen)});
    const auto f = from_points(pts);
    const std::size_t want = n / 10;
    EXPECT_EQ(isolation_forest(f).flagged_index.size(), want);
    LofOptions lo;
    lo.k_neighbors = 10;
    EXPECT_EQ(lof(f, lo).flagged_index.size(), want);
    EXPECT_EQ(exclusion_count(0.1, n), want);
  }
}

TEST(Outliers, LofInvariantToTranslationAndRowOrder) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> nd;
  std::vector<std::vector<double>> pts, moved;
  for (int i = 0; i < 80; ++i) {
    pts.push_back({nd(gen), nd(gen)});
    moved.push_back({pts.back()[0] + 4, pts.back()[1] - 4});
  }
  LofOptions opt;
  opt.k_neighbors = 7;
  const auto a = lof(from_points(pts), opt);
  const auto b = lof(from_points(moved), opt);
  for (int i = 0; i < 80; ++i) EXPECT_NEAR(a.scores[i], b.scores[i], 1e-9);
  EXPECT_EQ(a.flagged_ids, b.flagged_ids);

  auto f = from_points(pts);
  std::vector<std::size_t> perm(80);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), gen);
  const auto c = lof(f.select(perm), opt);
  for (int i = 0; i < 80; ++i) EXPECT_EQ(c.scores[i], a.scores[perm[i]]);
  auto sorted = c.flagged_ids;
  auto base = a.flagged_ids;
  std::sort(sorted.begin(), sorted.end());
  std::sort(base.begin(), base.end());
  EXPECT_EQ(sorted, base);
}

TEST(Outliers, FlagTieBreakAndCsv) {
  OutlierScores s;
  s.subject_ids = {"c", "a", "b", "d"};
  s.scores = {2, 2, 2, 1};
  flag_top(s, 0.5);
  EXPECT_EQ(s.flagged_ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(s.retained_index(), (std::vector<std::size_t>{0, 3}));
  std::ostringstream out;
  write_outlier_csv(out, s);
  EXPECT_EQ(out.str(), "subject_id,score,flagged\nc,2,0\na,2,1\nb,2,1\nd,1,0\n");
  EXPECT_THROW(flag_top(s, 0.0), Error);
}

TEST(Outliers, ComparisonGridShape) {
  SynthConfig cfg;
  cfg.n_subjects = 400;
  cfg.feature_dim = 10;
  const auto c = gen_cohort(cfg);
  OutlierComparisonOptions opt;
  opt.iforest.n_trees = 20;
  auto cls = ModelSpec::logistic();
  const auto rep = compare_outlier_methods(c, {"depression", "stress"}, cls, ModelSpec::ridge_reg(), opt);
  ASSERT_EQ(rep.rows.size(), 3u * 2u * 2u + 1u);
  EXPECT_FALSE(rep.any_failed());
  EXPECT_EQ(rep.rows.back().status, "not implemented");
  for (const auto& r : rep.rows)
    if (r.scheme == "regression") {
      EXPECT_EQ(r.train_size, 360u);
    }
  std::ostringstream grid;
  write_outlier_grid_csv(grid, rep);
  const auto text = grid.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 6 + 1);
}
