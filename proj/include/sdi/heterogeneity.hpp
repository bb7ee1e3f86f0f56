#pragma once

// Symptom Discrepancy Index: z-standardize item responses, group subjects by
// identical raw total, measure each subject's distance to its group's mean
// z-profile, summarize per group (GDI) and overall (SDI), and filter the most
// discrepant subjects.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sdi/error.hpp"
#include "sdi/scale.hpp"
#include "sdi/text.hpp"

namespace sdi {

struct ZMatrix {
  Eigen::MatrixXd z;  // N x m
  Eigen::VectorXd item_means;
  Eigen::VectorXd item_stds;
};

namespace detail {

/// Sum of the values in ascending order. Every reduction in the pipeline goes
/// through this, so results are bit-identical under any subject or item
/// permutation.
inline double sorted_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace detail

/// Population (1/N) statistics per item; zero-variance items become zero
/// columns.
inline ZMatrix standardize(const Eigen::MatrixXd& a) {
  if (a.rows() < 1) fail_validation("standardize needs at least one subject");
  ZMatrix out;
  const double n = static_cast<double>(a.rows());
  out.item_means.resize(a.cols());
  out.item_stds.resize(a.cols());
  out.z.resize(a.rows(), a.cols());
  std::vector<double> buf(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    for (Eigen::Index j = 0; j < a.rows(); ++j) buf[static_cast<std::size_t>(j)] = a(j, i);
    const double mean = detail::sorted_sum(buf) / n;
    for (Eigen::Index j = 0; j < a.rows(); ++j) {
      const double c = a(j, i) - mean;
      buf[static_cast<std::size_t>(j)] = c * c;
    }
    const double sd = std::sqrt(detail::sorted_sum(buf) / n);
    out.item_means(i) = mean;
    out.item_stds(i) = sd;
    for (Eigen::Index j = 0; j < a.rows(); ++j) out.z(j, i) = sd > 0.0 ? (a(j, i) - mean) / sd : 0.0;
  }
  return out;
}

inline Eigen::MatrixXd to_real(const ResponseMatrix& r) {
  Eigen::MatrixXd a(static_cast<Eigen::Index>(r.subjects()),
                    static_cast<Eigen::Index>(r.items()));
  for (std::size_t j = 0; j < r.subjects(); ++j)
    for (std::size_t i = 0; i < r.items(); ++i)
      a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = r.at(j, i);
  return a;
}

inline ZMatrix standardize(const ResponseMatrix& r) { return standardize(to_real(r)); }

/// Raw total -> member indices (ascending).
using GroupIndex = std::map<long long, std::vector<std::size_t>>;

template <class Int>
GroupIndex group_by_total(std::span<const Int> totals) {
  GroupIndex groups;
  for (std::size_t j = 0; j < totals.size(); ++j)
    groups[static_cast<long long>(totals[j])].push_back(j);
  return groups;
}

inline GroupIndex group_by_total(const std::vector<int>& totals) {
  return group_by_total(std::span<const int>(totals));
}

struct GroupDiscrepancy {
  std::vector<double> distances;  // aligned with the member list
  double gdi = 0.0;
};

/// Distances of each member's z-row to the within-group mean row, and
/// GDI = mean(d) + population std(d).
inline GroupDiscrepancy group_discrepancy(const Eigen::MatrixXd& z,
                                          std::span<const std::size_t> members) {
  if (members.empty()) fail_validation("group_discrepancy needs a non-empty group");
  const auto m = z.cols();
  const double n = static_cast<double>(members.size());
  std::vector<double> buf(members.size());
  Eigen::RowVectorXd center(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < members.size(); ++k) buf[k] = z(static_cast<Eigen::Index>(members[k]), i);
    center(i) = detail::sorted_sum(buf) / n;
  }

  GroupDiscrepancy out;
  out.distances.reserve(members.size());
  std::vector<double> sq(static_cast<std::size_t>(m));
  for (std::size_t j : members) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const double e = z(static_cast<Eigen::Index>(j), i) - center(i);
      sq[static_cast<std::size_t>(i)] = e * e;
    }
    out.distances.push_back(std::sqrt(detail::sorted_sum(sq)));
  }

  const double mean = detail::sorted_sum(out.distances) / n;
  for (std::size_t k = 0; k < members.size(); ++k) buf[k] = (out.distances[k] - mean) * (out.distances[k] - mean);
  out.gdi = mean + std::sqrt(detail::sorted_sum(buf) / n);
  return out;
}

/// Group-size weighted mean of GDI. Sums run in ascending key order.
inline double weighted_sdi(const std::map<long long, double>& gdi,
                           const std::map<long long, std::size_t>& sizes) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& [key, g] : gdi) {
    auto it = sizes.find(key);
    if (it == sizes.end())
      fail_validation("group " + std::to_string(key) + " has a GDI but no size");
    num += static_cast<double>(it->second) * g;
    den += static_cast<double>(it->second);
  }
  return den > 0.0 ? num / den : 0.0;
}

struct DiscrepancyReport {
  std::string factor;
  std::size_t items = 0;
  std::vector<std::string> subject_ids;
  std::vector<int> totals;          // raw totals (group keys)
  std::vector<double> distances;    // d_j
  std::map<long long, double> gdi;
  std::map<long long, std::size_t> group_sizes;
  double sdi = 0.0;
  /// SDI restricted to groups whose multiplied total falls in each band.
  /// Only filled when a ScaleSpec is supplied.
  std::map<SeverityBand, double> band_sdi;
  std::map<SeverityBand, std::size_t> band_sizes;

  std::size_t subjects() const { return subject_ids.size(); }
  /// sdi / sqrt(m); a scale-free companion for comparing scales of different
  /// length. Not part of the index definition.
  double sdi_per_sqrt_item() const {
    return items ? sdi / std::sqrt(static_cast<double>(items)) : 0.0;
  }
};

inline DiscrepancyReport analyze(const ResponseMatrix& r) {
  DiscrepancyReport rep;
  rep.items = r.items();
  rep.subject_ids = r.subject_ids();
  rep.totals = raw_totals(r);
  rep.distances.assign(r.subjects(), 0.0);

  const ZMatrix z = standardize(r);
  const GroupIndex groups = group_by_total(rep.totals);
  for (const auto& [total, members] : groups) {
    const auto g = group_discrepancy(z.z, members);
    for (std::size_t k = 0; k < members.size(); ++k) rep.distances[members[k]] = g.distances[k];
    rep.gdi[total] = g.gdi;
    rep.group_sizes[total] = members.size();
  }
  rep.sdi = weighted_sdi(rep.gdi, rep.group_sizes);
  return rep;
}

/// Full pipeline for one scale, including the per-band breakdown.
inline DiscrepancyReport analyze(const ResponseMatrix& r, const ScaleSpec& spec) {
  r.check_conforms(spec);
  DiscrepancyReport rep = analyze(r);
  rep.factor = spec.factor;
  std::map<SeverityBand, std::map<long long, double>> gdi_by_band;
  std::map<SeverityBand, std::map<long long, std::size_t>> size_by_band;
  for (const auto& [total, g] : rep.gdi) {
    const SeverityBand b = band_of(static_cast<int>(total) * spec.score_multiplier, spec);
    gdi_by_band[b][total] = g;
    size_by_band[b][total] = rep.group_sizes.at(total);
  }
  for (const auto& [band, g] : gdi_by_band) {
    rep.band_sdi[band] = weighted_sdi(g, size_by_band[band]);
    std::size_t n = 0;
    for (const auto& [_, s] : size_by_band[band]) n += s;
    rep.band_sizes[band] = n;
  }
  return rep;
}

enum class FilterMode { one_shot, iterative };

struct FilterPlan {
  double fraction = 0.0;
  FilterMode mode = FilterMode::one_shot;
  std::string tag;  // factor / scale the plan was computed for
  std::vector<std::string> excluded_ids;   // in exclusion order
  std::vector<std::string> retained_ids;   // in input order
  std::vector<std::size_t> excluded_index;
  std::vector<std::size_t> retained_index;

  /// Stable fingerprint of (fraction, tag, excluded set).
  std::string digest() const {
    std::vector<std::string> sorted = excluded_ids;
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t h = text::fnv1a(tag);
    h = text::fnv1a(text::format_double(fraction), h);
    for (const auto& id : sorted) {
      h = text::fnv1a(id, h);
      h = text::fnv1a("\n", h);
    }
    return text::hex64(h);
  }
};

namespace detail {

inline void check_fraction(double q) {
  if (!(q >= 0.0 && q < 1.0))
    fail_validation("filter fraction " + text::format_double(q) + " outside [0,1)");
}

/// Indices sorted by distance descending, ties by ascending subject id.
inline std::vector<std::size_t> discrepancy_order(std::span<const double> d,
                                                  std::span<const std::string> ids) {
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (d[a] != d[b]) return d[a] > d[b];
    return ids[a] < ids[b];
  });
  return order;
}

inline FilterPlan make_plan(double q, FilterMode mode, std::string tag,
                            std::span<const std::string> ids,
                            std::vector<std::size_t> excluded) {
  FilterPlan plan;
  plan.fraction = q;
  plan.mode = mode;
  plan.tag = std::move(tag);
  std::vector<std::uint8_t> dropped(ids.size(), 0);
  for (std::size_t j : excluded) dropped[j] = 1;
  plan.excluded_index = std::move(excluded);
  for (std::size_t j : plan.excluded_index) plan.excluded_ids.push_back(ids[j]);
  for (std::size_t j = 0; j < ids.size(); ++j)
    if (!dropped[j]) {
      plan.retained_index.push_back(j);
      plan.retained_ids.push_back(ids[j]);
    }
  return plan;
}

}  // namespace detail

inline std::size_t exclusion_count(double q, std::size_t n) {
  return static_cast<std::size_t>(std::floor(q * static_cast<double>(n)));
}

/// One-shot filter: drop the floor(q*N) subjects with the largest d_j.
inline FilterPlan filter_top(const DiscrepancyReport& report, double q) {
  detail::check_fraction(q);
  const auto order = detail::discrepancy_order(report.distances, report.subject_ids);
  const std::size_t k = exclusion_count(q, report.subjects());
  return detail::make_plan(q, FilterMode::one_shot, report.factor, report.subject_ids,
                           {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k)});
}

/// Iterative filter: remove the single most discrepant subject, re-run the
/// whole pipeline on the remainder, repeat until floor(q*N) are gone.
inline FilterPlan filter_top_iterative(const ResponseMatrix& r, double q,
                                       const std::string& tag = {}) {
  detail::check_fraction(q);
  const std::size_t k = exclusion_count(q, r.subjects());
  std::vector<std::size_t> alive(r.subjects());
  std::iota(alive.begin(), alive.end(), std::size_t{0});
  std::vector<std::size_t> excluded;
  excluded.reserve(k);
  for (std::size_t step = 0; step < k; ++step) {
    const DiscrepancyReport rep = analyze(r.select(alive));
    const auto order = detail::discrepancy_order(rep.distances, rep.subject_ids);
    const std::size_t victim = alive[order.front()];
    excluded.push_back(victim);
    alive.erase(std::find(alive.begin(), alive.end(), victim));
  }
  return detail::make_plan(q, FilterMode::iterative, tag, r.subject_ids(), std::move(excluded));
}

inline FilterPlan make_filter_plan(const ResponseMatrix& r, const ScaleSpec& spec, double q,
                                   FilterMode mode = FilterMode::one_shot) {
  if (mode == FilterMode::iterative) {
    r.check_conforms(spec);
    return filter_top_iterative(r, q, spec.factor);
  }
  return filter_top(analyze(r, spec), q);
}

struct SweepPoint {
  double fraction = 0.0;
  double sdi = 0.0;
  std::size_t retained = 0;
};

inline std::vector<double> default_sweep_fractions() {
  std::vector<double> f;
  for (int i = 0; i <= 8; ++i) f.push_back(0.05 * i);
  return f;
}

/// SDI of the retained subset after filtering at each fraction. The subset is
/// re-standardized and re-grouped from scratch.
inline std::vector<SweepPoint> sdi_sweep(const ResponseMatrix& r, const ScaleSpec& spec,
                                         std::span<const double> fractions,
                                         FilterMode mode = FilterMode::one_shot) {
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    detail::check_fraction(fractions[i]);
    if (i > 0 && fractions[i] < fractions[i - 1])
      fail_validation("sweep fractions must be ascending");
  }
  const DiscrepancyReport full = analyze(r, spec);
  std::vector<SweepPoint> out;
  for (double q : fractions) {
    const FilterPlan plan =
        mode == FilterMode::one_shot ? filter_top(full, q) : filter_top_iterative(r, q, spec.factor);
    SweepPoint p;
    p.fraction = q;
    p.retained = plan.retained_index.size();
    p.sdi = plan.excluded_index.empty() ? full.sdi : analyze(r.select(plan.retained_index)).sdi;
    out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const DiscrepancyReport& rep) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& [total, g] : rep.gdi)
    groups.push_back({{"total", total}, {"size", rep.group_sizes.at(total)}, {"gdi", g}});
  nlohmann::json bands = nlohmann::json::array();
  for (const auto& [band, s] : rep.band_sdi)
    bands.push_back({{"band", band_name(band)}, {"size", rep.band_sizes.at(band)}, {"sdi", s}});
  nlohmann::json subjects = nlohmann::json::array();
  for (std::size_t j = 0; j < rep.subjects(); ++j)
    subjects.push_back({{"subject_id", rep.subject_ids[j]},
                        {"total", rep.totals[j]},
                        {"d", rep.distances[j]}});
  return {{"factor", rep.factor},
          {"items", rep.items},
          {"n", rep.subjects()},
          {"sdi", rep.sdi},
          {"sdi_per_sqrt_item", rep.sdi_per_sqrt_item()},
          {"groups", groups},
          {"bands", bands},
          {"subjects", subjects}};
}

inline nlohmann::json to_json(const FilterPlan& plan) {
  return {{"fraction", plan.fraction},
          {"mode", plan.mode == FilterMode::one_shot ? "one_shot" : "iterative"},
          {"tag", plan.tag},
          {"digest", plan.digest()},
          {"excluded_ids", plan.excluded_ids},
          {"retained_ids", plan.retained_ids}};
}

/// Flat per-subject table: subject_id,total,group_size,d_j,excluded_flag.
/// `total` is the raw (unmultiplied) sum, i.e. the group key.
inline void write_discrepancy_csv(std::ostream& out, const DiscrepancyReport& rep,
                                  const FilterPlan* plan = nullptr) {
  std::vector<std::uint8_t> excluded(rep.subjects(), 0);
  if (plan)
    for (std::size_t j : plan->excluded_index) excluded.at(j) = 1;
  out << "subject_id,total,group_size,d_j,excluded_flag\n";
  for (std::size_t j = 0; j < rep.subjects(); ++j)
    out << rep.subject_ids[j] << ',' << rep.totals[j] << ','
        << rep.group_sizes.at(rep.totals[j]) << ',' << text::format_double(rep.distances[j])
        << ',' << static_cast<int>(excluded[j]) << '\n';
}

}  // namespace sdi
