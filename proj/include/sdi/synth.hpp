#pragma once

// Seeded synthetic cohorts: correlated latent severities, prototype-driven
// item responses, planted profile heterogeneity and feature vectors.
//
// A heterogeneous subject self-reports through a scrambled profile: the
// recorded row is a uniformly random redistribution of a total drawn at a
// "reported" latent that only partly tracks the true one. Features embed the
// coherent row at the true latent, so these subjects carry noisy labels that
// the discrepancy index can find from the item profile alone.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sdi/dataset.hpp"
#include "sdi/error.hpp"
#include "sdi/rng.hpp"
#include "sdi/scale.hpp"
#include "sdi/text.hpp"

namespace sdi {

struct SynthConfig {
  std::size_t n_subjects = 5000;
  std::uint64_t seed = 2025;
  /// Depression, anxiety, stress.
  Eigen::Matrix3d factor_correlations = (Eigen::Matrix3d() << 1.0, 0.780, 0.777,  //
                                         0.780, 1.0, 0.825,                      //
                                         0.777, 0.825, 1.0)
                                            .finished();
  int prototypes_per_band = 2;
  double heterogeneity_rate = 0.2;
  int feature_dim = 64;
  double feature_noise = 0.5;

  /// Population share of each severity band, Normal first.
  std::array<double, 5> band_prevalence{0.75, 0.08, 0.09, 0.04, 0.04};
  /// Correlation between a heterogeneous subject's reported and true latent.
  double report_fidelity = 0.5;
  /// Log-normal spread of per-item propensities; larger means more peaked
  /// (more Guttman-like) coherent profiles.
  double prototype_concentration = 1.5;
  /// Log-normal perturbation separating the prototypes of one band.
  double prototype_perturbation = 0.3;
  /// Half-width of the uniform per-item jitter before rounding.
  double response_jitter = 0.35;
  /// Scale of the embedding-to-feature map.
  double signal_scale = 3.0;

  void validate() const {
    if (n_subjects == 0) fail_validation("synth: n_subjects must be positive");
    if (prototypes_per_band <= 0) fail_validation("synth: prototypes_per_band must be positive");
    if (!(heterogeneity_rate >= 0.0 && heterogeneity_rate <= 1.0))
      fail_validation("synth: heterogeneity_rate must lie in [0,1]");
    if (feature_dim <= 0) fail_validation("synth: feature_dim must be positive");
    if (!(feature_noise >= 0.0)) fail_validation("synth: feature_noise must be non-negative");
    if (!(report_fidelity >= -1.0 && report_fidelity <= 1.0))
      fail_validation("synth: report_fidelity must lie in [-1,1]");
    if (!(response_jitter >= 0.0 && response_jitter < 0.5))
      fail_validation("synth: response_jitter must lie in [0,0.5)");
    double total = 0.0;
    for (double p : band_prevalence) {
      if (!(p >= 0.0)) fail_validation("synth: band_prevalence entries must be non-negative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) fail_validation("synth: band_prevalence must sum to 1");
    const Eigen::Matrix3d& r = factor_correlations;
    if (!r.allFinite()) fail_validation("synth: factor_correlations must be finite");
    if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      fail_validation("synth: factor_correlations must be symmetric");
    for (int i = 0; i < 3; ++i)
      if (std::abs(r(i, i) - 1.0) > 1e-12)
        fail_validation("synth: factor_correlations must have a unit diagonal");
    Eigen::LLT<Eigen::Matrix3d> llt(r);
    if (llt.info() != Eigen::Success || llt.matrixL().toDenseMatrix().diagonal().minCoeff() <= 1e-12)
      fail_validation("synth: factor_correlations is not positive definite");
  }
};

inline void to_json(nlohmann::json& j, const SynthConfig& c) {
  nlohmann::json corr = nlohmann::json::array();
  for (int i = 0; i < 3; ++i)
    corr.push_back({c.factor_correlations(i, 0), c.factor_correlations(i, 1), c.factor_correlations(i, 2)});
  j = {{"n_subjects", c.n_subjects},
       {"seed", c.seed},
       {"factor_correlations", corr},
       {"prototypes_per_band", c.prototypes_per_band},
       {"heterogeneity_rate", c.heterogeneity_rate},
       {"feature_dim", c.feature_dim},
       {"feature_noise", c.feature_noise},
       {"band_prevalence", c.band_prevalence},
       {"report_fidelity", c.report_fidelity},
       {"prototype_concentration", c.prototype_concentration},
       {"prototype_perturbation", c.prototype_perturbation},
       {"response_jitter", c.response_jitter},
       {"signal_scale", c.signal_scale}};
}

/// Missing fields keep their defaults.
inline void from_json(const nlohmann::json& j, SynthConfig& c) {
  try {
    c.n_subjects = j.value("n_subjects", c.n_subjects);
    c.seed = j.value("seed", c.seed);
    if (j.contains("factor_correlations")) {
      const auto& m = j.at("factor_correlations");
      if (!m.is_array() || m.size() != 3)
        fail_validation("synth: factor_correlations must be a 3x3 array");
      for (int r = 0; r < 3; ++r) {
        const auto& row = m.at(static_cast<std::size_t>(r));
        if (!row.is_array() || row.size() != 3)
          fail_validation("synth: factor_correlations must be a 3x3 array");
        for (int k = 0; k < 3; ++k) c.factor_correlations(r, k) = row.at(static_cast<std::size_t>(k)).get<double>();
      }
    }
    c.prototypes_per_band = j.value("prototypes_per_band", c.prototypes_per_band);
    c.heterogeneity_rate = j.value("heterogeneity_rate", c.heterogeneity_rate);
    c.feature_dim = j.value("feature_dim", c.feature_dim);
    c.feature_noise = j.value("feature_noise", c.feature_noise);
    if (j.contains("band_prevalence")) {
      const auto& p = j.at("band_prevalence");
      if (!p.is_array() || p.size() != 5) fail_validation("synth: band_prevalence needs five entries");
      for (std::size_t b = 0; b < 5; ++b) c.band_prevalence[b] = p.at(b).get<double>();
    }
    c.report_fidelity = j.value("report_fidelity", c.report_fidelity);
    c.prototype_concentration = j.value("prototype_concentration", c.prototype_concentration);
    c.prototype_perturbation = j.value("prototype_perturbation", c.prototype_perturbation);
    c.response_jitter = j.value("response_jitter", c.response_jitter);
    c.signal_scale = j.value("signal_scale", c.signal_scale);
  } catch (const nlohmann::json::exception& e) {
    fail_validation(std::string("synth config: ") + e.what());
  }
}

inline std::string config_hash(const SynthConfig& c) {
  return text::hex64(text::fnv1a(nlohmann::json(c).dump()));
}

/// Correlated standard-normal latents, one row per subject. Row j is drawn from
/// subject j's own substream, so rows do not depend on generation order.
inline Eigen::MatrixXd correlated_latents(const SynthConfig& config) {
  config.validate();
  const Eigen::Matrix3d chol = config.factor_correlations.llt().matrixL();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(config.n_subjects), 3);
  for (std::size_t j = 0; j < config.n_subjects; ++j) {
    Rng rng = Rng::substream(config.seed ^ stream::subjects, j);
    Eigen::Vector3d g(rng.normal(), rng.normal(), rng.normal());
    out.row(static_cast<Eigen::Index>(j)) = (chol * g).transpose();
  }
  return out;
}

/// Per-band item-propensity vectors for one scale, fixed by (seed, scale slot).
struct PrototypeBank {
  std::array<std::vector<std::vector<double>>, 5> by_band;
  /// Raw totals whose multiplied score falls in each band.
  std::array<std::vector<int>, 5> band_totals;
};

inline PrototypeBank make_prototypes(const ScaleSpec& spec, const SynthConfig& config,
                                     std::uint64_t slot) {
  spec.validate();
  PrototypeBank bank;
  Rng rng = Rng::substream(config.seed ^ stream::prototypes, slot);
  const auto m = static_cast<std::size_t>(spec.item_count);
  std::vector<double> base(m);
  for (double& w : base) w = std::exp(config.prototype_concentration * rng.normal());
  for (std::size_t b = 0; b < 5; ++b)
    for (int p = 0; p < config.prototypes_per_band; ++p) {
      std::vector<double> w(m);
      for (std::size_t i = 0; i < m; ++i) w[i] = base[i] * std::exp(config.prototype_perturbation * rng.normal());
      bank.by_band[b].push_back(std::move(w));
    }
  for (int raw = spec.min_raw_total(); raw <= spec.max_raw_total(); ++raw)
    bank.band_totals[static_cast<std::size_t>(band_of(raw * spec.score_multiplier, spec))].push_back(raw);
  return bank;
}

namespace detail {

/// x_i = min(cap, lambda * w_i) with sum x = total.
inline std::vector<double> water_fill(std::span<const double> w, double total, double cap) {
  const std::size_t m = w.size();
  std::vector<double> x(m, 0.0);
  if (total <= 0.0) return x;
  if (total >= cap * static_cast<double>(m)) return std::vector<double>(m, cap);
  std::vector<std::uint8_t> saturated(m, 0);
  while (true) {
    double free_weight = 0.0;
    double budget = total;
    for (std::size_t i = 0; i < m; ++i) {
      if (saturated[i])
        budget -= cap;
      else
        free_weight += w[i];
    }
    const double lambda = budget / free_weight;
    bool changed = false;
    for (std::size_t i = 0; i < m; ++i)
      if (!saturated[i] && lambda * w[i] > cap) {
        saturated[i] = 1;
        changed = true;
      }
    if (!changed) {
      for (std::size_t i = 0; i < m; ++i) x[i] = saturated[i] ? cap : lambda * w[i];
      return x;
    }
  }
}

/// Integer vector in [0,cap] summing to `total`, closest to x by largest
/// remainder. Ties go to the lower item index.
inline std::vector<int> round_to_total(std::span<const double> x, int total, int cap) {
  const std::size_t m = x.size();
  std::vector<int> out(m);
  std::vector<double> frac(m);
  int sum = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double f = std::floor(x[i]);
    out[i] = std::clamp(static_cast<int>(f), 0, cap);
    frac[i] = x[i] - f;
    sum += out[i];
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t step = 0; sum < total; ++step) {
    const std::size_t i = order[step % m];
    if (out[i] < cap) {
      ++out[i];
      ++sum;
    }
  }
  for (std::size_t step = 0; sum > total; ++step) {
    const std::size_t i = order[m - 1 - step % m];
    if (out[i] > 0) {
      --out[i];
      --sum;
    }
  }
  return out;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace detail

/// One item row for a subject at `latent`: the latent's quantile picks a band
/// (by `band_prevalence`) and a position inside it, a band prototype spreads
/// that total over the items, jitter perturbs the spread, and rounding keeps
/// the total.
inline std::vector<int> responses_from_latent(double latent, const ScaleSpec& spec,
                                              const PrototypeBank& bank,
                                              const SynthConfig& config, Rng& rng) {
  if (std::isnan(latent)) fail_validation("responses_from_latent: latent is NaN");
  const double u = detail::normal_cdf(latent);
  double lo = 0.0;
  std::size_t band = 4;
  for (std::size_t b = 0; b < 5; ++b) {
    const double hi = lo + config.band_prevalence[b];
    if (u < hi || b == 4) {
      band = b;
      break;
    }
    lo = hi;
  }
  const double width = config.band_prevalence[band];
  const double v = width > 0.0 ? std::clamp((u - lo) / width, 0.0, 1.0) : 0.5;

  // Bands with no reachable total borrow the nearest non-empty one.
  std::size_t use = band;
  for (std::size_t off = 0; off < 5; ++off) {
    if (band >= off && !bank.band_totals[band - off].empty()) {
      use = band - off;
      break;
    }
    if (band + off < 5 && !bank.band_totals[band + off].empty()) {
      use = band + off;
      break;
    }
  }
  const auto& totals = bank.band_totals[use];
  const auto idx = std::min(static_cast<std::size_t>(v * static_cast<double>(totals.size())), totals.size() - 1);
  const int cap = spec.likert_max - spec.likert_min;
  const int target = totals[idx] - spec.min_raw_total();

  const auto& protos = bank.by_band[use];
  const auto& weights = protos[rng.index(protos.size())];
  std::vector<double> x = detail::water_fill(weights, target, cap);
  for (double& xi : x) xi = std::clamp(xi + rng.uniform(-config.response_jitter, config.response_jitter), 0.0, static_cast<double>(cap));
  std::vector<int> row = detail::round_to_total(x, target, cap);
  for (int& a : row) a += spec.likert_min;
  return row;
}

/// Uniformly random composition of the row's total over the same items and
/// bounds. Exact sampling from a composition-count table.
inline std::vector<int> scramble_profile(std::span<const int> row, const ScaleSpec& spec, Rng& rng) {
  const int m = static_cast<int>(row.size());
  const int cap = spec.likert_max - spec.likert_min;
  int total = 0;
  for (int a : row) {
    if (a < spec.likert_min || a > spec.likert_max)
      fail_validation("scramble_profile: value outside the Likert range");
    total += a - spec.likert_min;
  }
  // count[k][t]: compositions of t into k parts, each in [0,cap].
  std::vector<std::vector<double>> count(static_cast<std::size_t>(m + 1),
                                         std::vector<double>(static_cast<std::size_t>(total + 1), 0.0));
  count[0][0] = 1.0;
  for (int k = 1; k <= m; ++k)
    for (int t = 0; t <= total; ++t)
      for (int v = 0; v <= std::min(cap, t); ++v)
        count[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)] +=
            count[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(t - v)];

  std::vector<int> out(static_cast<std::size_t>(m));
  int rem = total;
  for (int i = 0; i < m; ++i) {
    const int left = m - i - 1;
    const double all = count[static_cast<std::size_t>(left + 1)][static_cast<std::size_t>(rem)];
    double u = rng.uniform() * all;
    int pick = -1;
    int last_feasible = 0;
    for (int v = 0; v <= std::min(cap, rem); ++v) {
      const double c = count[static_cast<std::size_t>(left)][static_cast<std::size_t>(rem - v)];
      if (c <= 0.0) continue;
      last_feasible = v;
      if (u < c) {
        pick = v;
        break;
      }
      u -= c;
    }
    if (pick < 0) pick = last_feasible;
    out[static_cast<std::size_t>(i)] = pick + spec.likert_min;
    rem -= pick;
  }
  return out;
}

struct GroundTruth {
  std::vector<std::array<std::uint8_t, 3>> scrambled;
  Eigen::MatrixXd latents;  // N x 3, true latents
  std::vector<std::string> sex;
};

struct SynthCohort {
  SynthConfig config;
  std::array<ScaleSpec, 3> specs;
  std::array<ResponseMatrix, 3> responses;
  FeatureMatrix features;
  GroundTruth truth;

  std::size_t subjects() const { return features.subjects(); }
  const std::vector<std::string>& subject_ids() const { return features.subject_ids; }

  /// Index of a factor by name; throws for unknown names.
  std::size_t factor_index(std::string_view factor) const {
    for (std::size_t f = 0; f < 3; ++f)
      if (specs[f].factor == factor) return f;
    fail_validation("cohort has no factor '" + std::string(factor) + "'");
  }

  SynthCohort select(std::span<const std::size_t> rows) const {
    SynthCohort out;
    out.config = config;
    out.specs = specs;
    for (std::size_t f = 0; f < 3; ++f) out.responses[f] = responses[f].select(rows);
    out.features = features.select(rows);
    out.truth.latents.resize(static_cast<Eigen::Index>(rows.size()), 3);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      if (!truth.scrambled.empty()) out.truth.scrambled.push_back(truth.scrambled[rows[k]]);
      if (truth.latents.rows() > 0)
        out.truth.latents.row(static_cast<Eigen::Index>(k)) = truth.latents.row(static_cast<Eigen::Index>(rows[k]));
      if (!truth.sex.empty()) out.truth.sex.push_back(truth.sex[rows[k]]);
    }
    return out;
  }
};

inline std::string subject_id(std::size_t j, std::size_t n) {
  std::string digits = std::to_string(j + 1);
  const std::size_t width = std::max<std::size_t>(5, std::to_string(n).size());
  return "s" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

inline SynthCohort gen_cohort(const SynthConfig& config,
                              const std::array<ScaleSpec, 3>& specs = dass21::all()) {
  config.validate();
  const std::size_t n = config.n_subjects;
  std::array<PrototypeBank, 3> banks;
  std::size_t total_items = 0;
  std::size_t embed_dim = 0;
  for (std::size_t f = 0; f < 3; ++f) {
    banks[f] = make_prototypes(specs[f], config, f);
    total_items += static_cast<std::size_t>(specs[f].item_count);
    embed_dim += static_cast<std::size_t>(specs[f].item_count * specs[f].levels());
  }

  // Feature map: column (f, item, level) of W is the feature-space image of
  // that item sitting at that level.
  const auto d = static_cast<Eigen::Index>(config.feature_dim);
  Eigen::MatrixXd w(d, static_cast<Eigen::Index>(embed_dim));
  {
    Rng rng = Rng::substream(config.seed ^ stream::feature_map, 0);
    const double scale = config.signal_scale / std::sqrt(static_cast<double>(total_items));
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < d; ++r) w(r, c) = scale * rng.normal();
  }

  const Eigen::Matrix3d chol = config.factor_correlations.llt().matrixL();
  const double fidelity = config.report_fidelity;
  const double fresh = std::sqrt(std::max(0.0, 1.0 - fidelity * fidelity));

  SynthCohort cohort;
  cohort.config = config;
  cohort.specs = specs;
  cohort.features.x.resize(static_cast<Eigen::Index>(n), d);
  cohort.truth.latents.resize(static_cast<Eigen::Index>(n), 3);
  cohort.truth.scrambled.resize(n);
  cohort.truth.sex.resize(n);
  std::array<std::vector<int>, 3> recorded;
  std::vector<std::string> ids(n);

  for (std::size_t j = 0; j < n; ++j) {
    ids[j] = subject_id(j, n);
    Rng rng = Rng::substream(config.seed ^ stream::subjects, j);
    const Eigen::Vector3d g(rng.normal(), rng.normal(), rng.normal());
    const Eigen::Vector3d latent = chol * g;
    cohort.truth.latents.row(static_cast<Eigen::Index>(j)) = latent.transpose();

    Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
    std::size_t offset = 0;
    for (std::size_t f = 0; f < 3; ++f) {
      const ScaleSpec& spec = specs[f];
      const std::vector<int> coherent = responses_from_latent(latent(static_cast<Eigen::Index>(f)), spec, banks[f], config, rng);
      std::vector<int> row = coherent;
      if (rng.bernoulli(config.heterogeneity_rate)) {
        const double reported = fidelity * latent(static_cast<Eigen::Index>(f)) + fresh * rng.normal();
        row = scramble_profile(responses_from_latent(reported, spec, banks[f], config, rng), spec, rng);
        cohort.truth.scrambled[j][f] = 1;
      }
      recorded[f].insert(recorded[f].end(), row.begin(), row.end());
      for (std::size_t i = 0; i < coherent.size(); ++i) {
        const auto col = offset + i * static_cast<std::size_t>(spec.levels()) +
                         static_cast<std::size_t>(coherent[i] - spec.likert_min);
        x += w.col(static_cast<Eigen::Index>(col));
      }
      offset += static_cast<std::size_t>(spec.item_count * spec.levels());
    }
    for (Eigen::Index c = 0; c < d; ++c) x(c) += config.feature_noise * rng.normal();
    cohort.features.x.row(static_cast<Eigen::Index>(j)) = x.transpose();
    cohort.truth.sex[j] = rng.bernoulli(0.5) ? "female" : "male";
  }
  for (std::size_t f = 0; f < 3; ++f)
    cohort.responses[f] = ResponseMatrix(ids, static_cast<std::size_t>(specs[f].item_count), std::move(recorded[f]));
  cohort.features.subject_ids = std::move(ids);
  return cohort;
}

// ---------------------------------------------------------------------------
// Cohort directory: <factor>.csv x3, features.csv, ground_truth.csv,
// provenance.json.

inline void write_ground_truth(std::ostream& out, const SynthCohort& c,
                               std::span<const std::string> comment = {}) {
  for (const auto& line : comment) out << "# " << line << '\n';
  out << "subject_id";
  for (const auto& s : c.specs) out << ",scrambled_" << s.factor;
  for (const auto& s : c.specs) out << ",latent_" << s.factor;
  out << ",sex\n";
  for (std::size_t j = 0; j < c.subjects(); ++j) {
    out << c.subject_ids()[j];
    for (std::size_t f = 0; f < 3; ++f) out << ',' << static_cast<int>(c.truth.scrambled[j][f]);
    for (Eigen::Index f = 0; f < 3; ++f) out << ',' << text::format_double(c.truth.latents(static_cast<Eigen::Index>(j), f));
    out << ',' << c.truth.sex[j] << '\n';
  }
}

inline GroundTruth read_ground_truth(std::istream& in, const std::vector<std::string>& ids,
                                     const std::string& source) {
  GroundTruth t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto v = text::trim_cr(line);
    if (!v.empty() && v.front() != '#') break;
  }
  std::vector<std::array<double, 3>> latents;
  std::size_t j = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto v = text::trim_cr(line);
    if (v.empty()) continue;
    const auto cells = text::split(v, ',');
    if (cells.size() != 8)
      throw Error(ErrorKind::validation, "ground truth rows need 8 cells", source, line_no, {});
    if (j >= ids.size() || cells[0] != ids[j])
      throw Error(ErrorKind::validation, "ground truth subject order differs from responses", source, line_no, 1);
    std::array<std::uint8_t, 3> flags{};
    std::array<double, 3> lat{};
    for (std::size_t f = 0; f < 3; ++f) {
      const auto b = text::parse_int(cells[1 + f]);
      const auto l = text::parse_double(cells[4 + f]);
      if (!b || (*b != 0 && *b != 1))
        throw Error(ErrorKind::validation, "scrambled flag must be 0 or 1", source, line_no, 2 + f);
      if (!l) throw Error(ErrorKind::validation, "latent must be numeric", source, line_no, 5 + f);
      flags[f] = static_cast<std::uint8_t>(*b);
      lat[f] = *l;
    }
    t.scrambled.push_back(flags);
    latents.push_back(lat);
    t.sex.emplace_back(cells[7]);
    ++j;
  }
  if (j != ids.size())
    throw Error(ErrorKind::validation, "ground truth has " + std::to_string(j) + " rows, expected " +
                                           std::to_string(ids.size()),
                source, line_no, {});
  t.latents.resize(static_cast<Eigen::Index>(j), 3);
  for (std::size_t k = 0; k < j; ++k)
    for (std::size_t f = 0; f < 3; ++f) t.latents(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(f)) = latents[k][f];
  return t;
}

inline void write_cohort(const std::filesystem::path& dir, const SynthCohort& c,
                         const nlohmann::json& provenance) {
  std::filesystem::create_directories(dir);
  const std::vector<std::string> comment{"provenance " + provenance.dump()};
  auto open = [&](const std::string& name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorKind::computation, "cannot write file", (dir / name).string(), {}, {});
    return out;
  };
  for (std::size_t f = 0; f < 3; ++f) {
    auto out = open(c.specs[f].factor + ".csv");
    write_responses(out, c.responses[f], comment);
  }
  {
    auto out = open("features.csv");
    write_features(out, c.features, comment);
  }
  {
    auto out = open("ground_truth.csv");
    write_ground_truth(out, c, comment);
  }
  {
    auto out = open("provenance.json");
    out << provenance.dump(2) << '\n';
  }
}

/// Reads a cohort directory. The ground-truth file is optional; without it the
/// truth block stays empty.
inline SynthCohort load_cohort(const std::filesystem::path& dir,
                               const std::array<ScaleSpec, 3>& specs = dass21::all()) {
  SynthCohort c;
  c.specs = specs;
  for (std::size_t f = 0; f < 3; ++f)
    c.responses[f] = load_responses((dir / (specs[f].factor + ".csv")).string(), specs[f]);
  {
    const auto path = (dir / "features.csv").string();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::validation, "cannot open file", path, {}, {});
    c.features = read_features(in, path);
  }
  for (std::size_t f = 0; f < 3; ++f)
    if (c.responses[f].subject_ids() != c.features.subject_ids)
      fail_validation("cohort files disagree on subjects or their order (" + specs[f].factor + ".csv vs features.csv)");
  const auto truth_path = dir / "ground_truth.csv";
  if (std::filesystem::exists(truth_path)) {
    std::ifstream in(truth_path, std::ios::binary);
    c.truth = read_ground_truth(in, c.features.subject_ids, truth_path.string());
  }
  const auto prov_path = dir / "provenance.json";
  if (std::filesystem::exists(prov_path)) {
    std::ifstream in(prov_path);
    try {
      const auto j = nlohmann::json::parse(in);
      if (j.contains("config")) c.config = j.at("config").get<SynthConfig>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::validation, std::string("invalid provenance: ") + e.what(), prov_path.string(), {}, {});
    }
  }
  return c;
}

}  // namespace sdi
