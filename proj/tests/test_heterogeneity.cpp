#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "sdi/heterogeneity.hpp"

using namespace sdi;

namespace {

// Straight-line reimplementation: population z-scores, groups by raw total,
// Euclidean distance to the group's mean z-row, GDI = mean + population std,
// SDI = size-weighted mean of GDI.
struct Oracle {
  std::vector<double> d;
  std::map<long long, double> gdi;
  double sdi = 0;
};

Oracle brute_force(const std::vector<std::vector<double>>& a) {
  const std::size_t n = a.size(), m = a[0].size();
  std::vector<std::vector<double>> z(n, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i) {
    double mu = 0;
    for (std::size_t j = 0; j < n; ++j) mu += a[j][i];
    mu /= n;
    double v = 0;
    for (std::size_t j = 0; j < n; ++j) v += (a[j][i] - mu) * (a[j][i] - mu);
    const double sd = std::sqrt(v / n);
    for (std::size_t j = 0; j < n; ++j) z[j][i] = sd > 0 ? (a[j][i] - mu) / sd : 0.0;
  }
  std::map<long long, std::vector<std::size_t>> groups;
  for (std::size_t j = 0; j < n; ++j) {
    double t = 0;
    for (double x : a[j]) t += x;
    groups[std::llround(t)].push_back(j);
  }
  Oracle o;
  o.d.assign(n, 0);
  double num = 0;
  for (const auto& [t, mem] : groups) {
    std::vector<double> c(m, 0);
    for (auto j : mem)
      for (std::size_t i = 0; i < m; ++i) c[i] += z[j][i] / mem.size();
    double s = 0;
    for (auto j : mem) {
      double q = 0;
      for (std::size_t i = 0; i < m; ++i) q += (z[j][i] - c[i]) * (z[j][i] - c[i]);
      o.d[j] = std::sqrt(q);
      s += o.d[j];
    }
    const double mean = s / mem.size();
    double v = 0;
    for (auto j : mem) v += (o.d[j] - mean) * (o.d[j] - mean);
    o.gdi[t] = mean + std::sqrt(v / mem.size());
    num += mem.size() * o.gdi[t];
  }
  o.sdi = num / n;
  return o;
}

ResponseMatrix make(const std::vector<std::vector<int>>& rows) {
  std::vector<std::string> ids;
  std::vector<int> v;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    ids.push_back("s" + std::to_string(j));
    v.insert(v.end(), rows[j].begin(), rows[j].end());
  }
  return ResponseMatrix(ids, rows[0].size(), v);
}

std::vector<std::vector<double>> as_real(const ResponseMatrix& r) {
  std::vector<std::vector<double>> a(r.subjects(), std::vector<double>(r.items()));
  for (std::size_t j = 0; j < r.subjects(); ++j)
    for (std::size_t i = 0; i < r.items(); ++i) a[j][i] = r.at(j, i);
  return a;
}

ResponseMatrix random_matrix(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> nd(2, 40), md(1, 8), vd(0, 3);
  const int n = nd(gen), m = md(gen);
  std::vector<std::vector<int>> rows(n, std::vector<int>(m));
  for (auto& r : rows)
    for (auto& x : r) x = vd(gen);
  return make(rows);
}

ScaleSpec toy_spec() {
  ScaleSpec s;
  s.name = s.factor = "toy";
  s.item_count = 2;
  s.score_multiplier = 1;
  s.cutoffs = {1, 2, 4, 5};
  return s;
}

}  // namespace

TEST(Sdi, ToyMatrix) {
  const auto r = make({{0, 0}, {3, 3}, {1, 2}, {2, 1}});
  const auto rep = analyze(r);
  EXPECT_NEAR(rep.gdi.at(3), std::sqrt(0.4), 1e-12);
  EXPECT_NEAR(rep.gdi.at(3), 0.63246, 1e-5);
  EXPECT_NEAR(rep.sdi, 0.31623, 1e-5);
  EXPECT_DOUBLE_EQ(rep.gdi.at(0), 0.0);
  EXPECT_DOUBLE_EQ(rep.gdi.at(6), 0.0);
  const auto o = brute_force(as_real(r));
  EXPECT_NEAR(rep.sdi, o.sdi, 1e-12);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(rep.distances[j], o.d[j], 1e-12);
}

TEST(Sdi, ToyBandBreakdown) {
  const auto rep = analyze(make({{0, 0}, {3, 3}, {1, 2}, {2, 1}}), toy_spec());
  EXPECT_EQ(rep.band_sizes.at(SeverityBand::Moderate), 2u);
  EXPECT_NEAR(rep.band_sdi.at(SeverityBand::Moderate), std::sqrt(0.4), 1e-12);
  EXPECT_DOUBLE_EQ(rep.band_sdi.at(SeverityBand::Normal), 0.0);
}

TEST(Sdi, MatchesBruteForceOnRandomMatrices) {
  std::mt19937_64 gen(7);
  for (int t = 0; t < 300; ++t) {
    const auto r = random_matrix(gen);
    const auto rep = analyze(r);
    const auto o = brute_force(as_real(r));
    ASSERT_NEAR(rep.sdi, o.sdi, 1e-10);
    for (const auto& [k, g] : o.gdi) ASSERT_NEAR(rep.gdi.at(k), g, 1e-10);
  }
}

TEST(Sdi, ConstantItemsStandardizeToZero) {
  const auto z = standardize(make({{1, 0}, {1, 3}, {1, 1}}));
  EXPECT_TRUE(z.z.col(0).isZero());
  EXPECT_DOUBLE_EQ(z.item_stds(0), 0.0);
  EXPECT_NEAR(z.z.col(1).mean(), 0.0, 1e-15);
}

TEST(SdiProperties, AffineInvariance) {
  std::mt19937_64 gen(11);
  std::uniform_int_distribution<int> kd(2, 5), cd(-3, 7);
  for (int t = 0; t < 1000; ++t) {
    const auto r = random_matrix(gen);
    const int k = kd(gen), c = cd(gen);
    std::vector<int> v = r.values();
    for (int& x : v) x = k * x + c;
    const ResponseMatrix s(r.subject_ids(), r.items(), v);
    ASSERT_NEAR(analyze(r).sdi, analyze(s).sdi, 1e-9) << "trial " << t << " k=" << k << " c=" << c;
  }
}

TEST(SdiProperties, PermutationInvarianceIsExact) {
  std::mt19937_64 gen(13);
  for (int t = 0; t < 1000; ++t) {
    const auto r = random_matrix(gen);
    const double base = analyze(r).sdi;

    std::vector<std::size_t> rows(r.subjects());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::shuffle(rows.begin(), rows.end(), gen);
    ASSERT_EQ(analyze(r.select(rows)).sdi, base) << "subject permutation, trial " << t;

    std::vector<std::size_t> items(r.items());
    std::iota(items.begin(), items.end(), std::size_t{0});
    std::shuffle(items.begin(), items.end(), gen);
    std::vector<int> v;
    for (std::size_t j = 0; j < r.subjects(); ++j)
      for (std::size_t i : items) v.push_back(r.at(j, i));
    ASSERT_EQ(analyze(ResponseMatrix(r.subject_ids(), r.items(), v)).sdi, base) << "item permutation, trial " << t;
  }
}

TEST(Filter, ExcludesFloorQNByDistanceThenId) {
  // Group total 3 holds two identical-distance members; ids decide.
  const ResponseMatrix r({"b", "a", "c", "d"}, 2, {1, 2, 2, 1, 0, 0, 3, 3});
  const auto rep = analyze(r);
  EXPECT_EQ(exclusion_count(0.5, 4), 2u);
  EXPECT_EQ(exclusion_count(0.1, 1000), 100u);
  EXPECT_EQ(exclusion_count(0.24, 4), 0u);
  const auto plan = filter_top(rep, 0.25);
  ASSERT_EQ(plan.excluded_ids.size(), 1u);
  EXPECT_EQ(plan.excluded_ids[0], "a");
  EXPECT_EQ(plan.retained_ids, (std::vector<std::string>{"b", "c", "d"}));
  const auto two = filter_top(rep, 0.5);
  EXPECT_EQ(two.excluded_ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_THROW(filter_top(rep, 1.0), Error);
  EXPECT_THROW(filter_top(rep, -0.1), Error);
}

TEST(Filter, PlanDigestDependsOnExcludedSetOnly) {
  const auto r = make({{0, 0}, {3, 3}, {1, 2}, {2, 1}, {0, 3}, {3, 0}, {1, 1}});
  const auto a = filter_top(analyze(r), 0.3);
  const auto b = filter_top(analyze(r), 0.3);
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_NE(a.digest(), filter_top(analyze(r), 0.0).digest());
}

TEST(Filter, IterativeRemovesCountAndStartsLikeOneShot) {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 20; ++t) {
    const auto r = random_matrix(gen);
    const auto one = filter_top(analyze(r), 0.2);
    const auto it = filter_top_iterative(r, 0.2);
    ASSERT_EQ(one.excluded_index.size(), it.excluded_index.size());
    if (!one.excluded_index.empty()) {
      EXPECT_EQ(one.excluded_index[0], it.excluded_index[0]);
    }
    EXPECT_EQ(it.retained_index.size() + it.excluded_index.size(), r.subjects());
  }
}

TEST(Sweep, DefaultFractionsAndBaseline) {
  const auto f = default_sweep_fractions();
  ASSERT_EQ(f.size(), 9u);
  EXPECT_DOUBLE_EQ(f.front(), 0.0);
  EXPECT_NEAR(f.back(), 0.40, 1e-12);
  std::mt19937_64 gen(3);
  std::vector<std::vector<int>> rows(60, std::vector<int>(2));
  for (auto& row : rows)
    for (auto& x : row) x = static_cast<int>(gen() % 4);
  const auto r = make(rows);
  const auto pts = sdi_sweep(r, toy_spec(), f);
  ASSERT_EQ(pts.size(), 9u);
  EXPECT_EQ(pts[0].sdi, analyze(r).sdi);
  EXPECT_EQ(pts[0].retained, 60u);
  EXPECT_EQ(pts[8].retained, 36u);
  const std::vector<double> bad{0.2, 0.1};
  EXPECT_THROW(sdi_sweep(r, toy_spec(), bad), Error);
}

TEST(Serialization, DiscrepancyCsvLayout) {
  const auto r = make({{0, 0}, {3, 3}, {1, 2}, {2, 1}});
  const auto rep = analyze(r);
  const auto plan = filter_top(rep, 0.25);
  std::ostringstream out;
  write_discrepancy_csv(out, rep, &plan);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "subject_id,total,group_size,d_j,excluded_flag");
  std::getline(in, line);
  EXPECT_EQ(line, "s0,0,1,0,0");
  const auto j = to_json(rep);
  EXPECT_EQ(j["n"], 4);
  EXPECT_EQ(j["groups"].size(), 3u);
  EXPECT_EQ(to_json(plan)["excluded_ids"].size(), 1u);
}
