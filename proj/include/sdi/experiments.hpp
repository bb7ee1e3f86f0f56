#pragma once

// Experiment runners over a cohort: label-scheme grids under discrepancy
// filtering, train-on-retained / test-on-excluded validation, regression
// grids and per-subgroup runs. Every grid cell is present in the report,
// either with metrics or with a status explaining why not.

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdi/crossval.hpp"
#include "sdi/heterogeneity.hpp"
#include "sdi/metrics.hpp"
#include "sdi/models.hpp"
#include "sdi/scale.hpp"
#include "sdi/synth.hpp"
#include "sdi/text.hpp"

namespace sdi {

struct ReportRow {
  std::string experiment;  // threshold | excluded | regression | outliers
  std::string subgroup;    // empty unless from subgroup_metrics
  std::string method;      // filter source: sdi, iforest, lof, ...
  std::string model;
  std::string factor;
  std::string scheme;  // bc | rbc | regression
  double q = 0;
  std::size_t train_size = 0;
  std::optional<std::size_t> test_size;
  std::string status = "ok";  // ok | failed | skipped | not implemented
  std::string message;
  std::optional<Metrics> metrics;
};

struct Provenance {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::map<std::string, std::string> filter_plans;  // "<factor>@<q>" -> plan digest
  std::vector<std::string> notes;
  std::optional<double> wall_clock_seconds;
};

struct ExperimentReport {
  std::string name;
  std::vector<ReportRow> rows;
  Provenance provenance;

  bool any_failed() const {
    return std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.status == "failed"; });
  }

  const ReportRow* find(std::string_view model, std::string_view factor, std::string_view scheme, double q,
                        std::string_view method = {}) const {
    for (const auto& r : rows)
      if (r.model == model && r.factor == factor && r.scheme == scheme && r.q == q &&
          (method.empty() || r.method == method))
        return &r;
    return nullptr;
  }

  void append(const ExperimentReport& other) {
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
    for (const auto& [k, v] : other.provenance.filter_plans) provenance.filter_plans[k] = v;
    for (const auto& n : other.provenance.notes) provenance.notes.push_back(n);
  }
};

inline std::string plan_key(std::string_view factor, double q) {
  return std::string(factor) + "@" + text::format_double(q);
}

inline nlohmann::json to_json(const ReportRow& r) {
  nlohmann::json j{{"experiment", r.experiment}, {"method", r.method},   {"model", r.model},
                   {"factor", r.factor},         {"scheme", r.scheme},   {"q", r.q},
                   {"train_size", r.train_size}, {"status", r.status}};
  if (!r.subgroup.empty()) j["subgroup"] = r.subgroup;
  if (r.test_size) j["test_size"] = *r.test_size;
  if (!r.message.empty()) j["message"] = r.message;
  if (r.metrics) j["metrics"] = to_json(*r.metrics);
  return j;
}

inline nlohmann::json to_json(const ExperimentReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rep.rows) rows.push_back(to_json(r));
  nlohmann::json prov{{"seed", rep.provenance.seed},
                      {"config_hash", rep.provenance.config_hash},
                      {"filter_plans", rep.provenance.filter_plans},
                      {"std_meaning", "sample standard deviation over cross-validation folds"}};
  if (!rep.provenance.notes.empty()) prov["notes"] = rep.provenance.notes;
  if (rep.provenance.wall_clock_seconds) prov["wall_clock_seconds"] = *rep.provenance.wall_clock_seconds;
  return {{"report", rep.name}, {"provenance", prov}, {"rows", rows}};
}

inline const std::vector<std::string>& report_csv_columns() {
  static const std::vector<std::string> cols{
      "experiment", "subgroup", "method", "model", "factor", "scheme", "q", "train_size", "test_size",
      "status", "folds", "accuracy_mean", "accuracy_std", "precision_mean", "precision_std", "recall_mean",
      "recall_std", "f1_mean", "f1_std", "auc_mean", "auc_std", "balanced_accuracy_mean",
      "balanced_accuracy_std", "mae_mean", "mae_std", "rmse_mean", "rmse_std", "message"};
  return cols;
}

/// One line per grid cell; metric cells left empty where they do not apply.
inline void write_report_csv(std::ostream& out, const ExperimentReport& rep,
                             std::span<const std::string> comment = {}) {
  for (const auto& c : comment) out << "# " << c << '\n';
  const auto& cols = report_csv_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  auto num = [](double v) { return text::format_double(v); };
  auto pair = [&](const Summary& s) { return num(s.mean) + "," + num(s.std); };
  for (const auto& r : rep.rows) {
    out << r.experiment << ',' << r.subgroup << ',' << r.method << ',' << r.model << ',' << r.factor << ','
        << r.scheme << ',' << num(r.q) << ',' << r.train_size << ','
        << (r.test_size ? std::to_string(*r.test_size) : "") << ',' << r.status << ',';
    if (r.metrics) {
      const auto& m = *r.metrics;
      out << m.folds << ',';
      if (m.classification)
        out << pair(m.accuracy) << ',' << pair(m.precision) << ',' << pair(m.recall) << ',' << pair(m.f1) << ','
            << pair(m.auc) << ',' << pair(m.balanced_accuracy) << ",,,,";
      else
        out << ",,,,,,,,,,,," << pair(m.mae) << ',' << pair(m.rmse);
    } else {
      out << ",,,,,,,,,,,,,,,,";
    }
    std::string msg = r.message;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out << ',' << msg << '\n';
  }
}

struct ExperimentOptions {
  CrossvalOptions cv;
  FilterMode filter_mode = FilterMode::one_shot;
};

namespace detail {

inline Provenance base_provenance(const SynthCohort& c, std::uint64_t seed) {
  Provenance p;
  p.seed = seed;
  p.config_hash = config_hash(c.config);
  return p;
}

/// Filter plan for (factor, q), memoized per report and recorded in its
/// provenance. q = 0 yields the empty plan.
class PlanCache {
 public:
  PlanCache(const SynthCohort& c, FilterMode mode, Provenance& prov) : c_(c), mode_(mode), prov_(prov) {}

  const FilterPlan& get(std::size_t f, double q) {
    const auto key = plan_key(c_.specs[f].factor, q);
    auto it = plans_.find(key);
    if (it == plans_.end()) {
      it = plans_.emplace(key, make_filter_plan(c_.responses[f], c_.specs[f], q, mode_)).first;
      prov_.filter_plans[key] = it->second.digest();
    }
    return it->second;
  }

 private:
  const SynthCohort& c_;
  FilterMode mode_;
  Provenance& prov_;
  std::map<std::string, FilterPlan> plans_;
};

inline std::vector<int> labels_of(const LabelSet& ls, std::span<const std::size_t> rows) {
  std::vector<int> y;
  y.reserve(rows.size());
  for (std::size_t r : rows) y.push_back(ls.labels[r]);
  return y;
}

/// Plan-retained rows that also survive the label scheme, in cohort order.
inline std::vector<std::size_t> usable_rows(const FilterPlan& plan, const LabelSet& ls) {
  std::vector<std::size_t> rows;
  for (std::size_t r : plan.retained_index)
    if (ls.retained[r]) rows.push_back(r);
  std::sort(rows.begin(), rows.end());
  return rows;
}

inline std::vector<double> targets_of(const SynthCohort& c, std::size_t f) {
  const auto t = total_scores(c.responses[f], c.specs[f]);
  return {t.begin(), t.end()};
}

}  // namespace detail

/// Classification grid rows for one (factor, scheme, q) over a fixed row set.
inline ReportRow classification_cell(const SynthCohort& c, std::span<const std::size_t> rows,
                                     const LabelSet& labels, const ModelSpec& model,
                                     const CrossvalOptions& cv) {
  ReportRow row;
  row.model = model.label();
  row.scheme = std::string(scheme_name(labels.scheme));
  row.train_size = rows.size();
  try {
    const auto y = detail::labels_of(labels, rows);
    row.metrics = crossval(c.features.select(rows), y, model, cv);
  } catch (const Error& e) {
    row.status = "failed";
    row.message = e.what();
  }
  return row;
}

inline ReportRow regression_cell(const SynthCohort& c, std::span<const std::size_t> rows,
                                 std::span<const double> targets, const ModelSpec& model,
                                 const CrossvalOptions& cv) {
  ReportRow row;
  row.model = model.label();
  row.scheme = "regression";
  row.train_size = rows.size();
  try {
    const auto y = detail::take(targets, rows);
    row.metrics = crossval(c.features.select(rows), std::span<const double>(y), model, cv);
  } catch (const Error& e) {
    row.status = "failed";
    row.message = e.what();
  }
  return row;
}

/// For each (factor, scheme, q): labels from the full cohort's bands, the
/// factor's filter plan at q removes the most discrepant subjects, the scheme
/// then drops its excluded band, and every classifier is cross-validated.
inline ExperimentReport threshold_experiment(const SynthCohort& c, const std::vector<std::string>& factors,
                                             const std::vector<LabelScheme>& schemes,
                                             const std::vector<double>& q_list,
                                             const std::vector<ModelSpec>& models,
                                             const ExperimentOptions& opt = {}) {
  ExperimentReport rep;
  rep.name = "threshold";
  rep.provenance = detail::base_provenance(c, opt.cv.seed);
  detail::PlanCache plans(c, opt.filter_mode, rep.provenance);
  for (const auto& factor : factors) {
    const std::size_t f = c.factor_index(factor);
    const auto bands = bands_of(c.responses[f], c.specs[f]);
    for (const auto scheme : schemes) {
      const LabelSet labels = binarize(bands, scheme);
      for (const double q : q_list) {
        const auto rows = detail::usable_rows(plans.get(f, q), labels);
        for (const auto& m : models) {
          ReportRow row = classification_cell(c, rows, labels, m, opt.cv);
          row.experiment = "threshold";
          row.method = "sdi";
          row.factor = factor;
          row.q = q;
          rep.rows.push_back(std::move(row));
        }
      }
    }
  }
  return rep;
}

/// Train on the plan's retained subjects, test on the excluded ones; both
/// sides down-sampled to balanced classes. One row, folds = 1.
inline ExperimentReport excluded_validation(const SynthCohort& c, const std::string& factor, double q,
                                            const ModelSpec& model, LabelScheme scheme = LabelScheme::BC,
                                            const ExperimentOptions& opt = {}) {
  ExperimentReport rep;
  rep.name = "excluded";
  rep.provenance = detail::base_provenance(c, opt.cv.seed);
  ReportRow row;
  row.experiment = "excluded";
  row.method = "sdi";
  row.model = model.label();
  row.factor = factor;
  row.scheme = std::string(scheme_name(scheme));
  row.q = q;
  try {
    if (!(q > 0)) fail_validation("excluded validation needs q > 0");
    const std::size_t f = c.factor_index(factor);
    detail::PlanCache plans(c, opt.filter_mode, rep.provenance);
    const FilterPlan& plan = plans.get(f, q);
    const LabelSet labels = binarize(bands_of(c.responses[f], c.specs[f]), scheme);
    std::vector<int> all_y(labels.labels.begin(), labels.labels.end());
    const auto& ids = c.subject_ids();

    std::vector<std::size_t> train = detail::usable_rows(plan, labels);
    std::vector<std::size_t> test;
    for (std::size_t r : plan.excluded_index)
      if (labels.retained[r]) test.push_back(r);
    std::size_t pos = 0;
    for (std::size_t r : test) pos += all_y[r];
    if (pos == 0 || pos == test.size()) fail_validation("excluded set holds a single class");

    Rng rng_train = Rng::substream(opt.cv.seed ^ stream::balance, 1000);
    Rng rng_test = Rng::substream(opt.cv.seed ^ stream::balance, 1001);
    train = detail::balance_down(train, all_y, ids, rng_train);
    test = detail::balance_down(test, all_y, ids, rng_test);
    row.train_size = train.size();
    row.test_size = test.size();

    ModelSpec s = model;
    s.seed = detail::fold_seed(model.seed, 0);
    const auto ytr = detail::take(std::span<const int>(all_y), train);
    const auto yte = detail::take(std::span<const int>(all_y), test);
    const auto out = fit_predict_classifier(s, detail::take_rows(c.features.x, train), ytr,
                                            detail::take_rows(c.features.x, test));
    const ClassificationScores one = classification_metrics(yte, out.labels, out.scores);
    row.metrics = Metrics::aggregate(std::span<const ClassificationScores>(&one, 1));
  } catch (const Error& e) {
    row.status = "failed";
    row.message = e.what();
  }
  rep.rows.push_back(std::move(row));
  return rep;
}

/// Targets are the multiplied factor totals.
inline ExperimentReport regression_experiment(const SynthCohort& c, const std::vector<std::string>& factors,
                                              const std::vector<double>& q_list,
                                              const std::vector<ModelSpec>& models,
                                              const ExperimentOptions& opt = {}) {
  ExperimentReport rep;
  rep.name = "regression";
  rep.provenance = detail::base_provenance(c, opt.cv.seed);
  detail::PlanCache plans(c, opt.filter_mode, rep.provenance);
  for (const auto& factor : factors) {
    const std::size_t f = c.factor_index(factor);
    const auto targets = detail::targets_of(c, f);
    for (const double q : q_list) {
      std::vector<std::size_t> rows = plans.get(f, q).retained_index;
      std::sort(rows.begin(), rows.end());
      for (const auto& m : models) {
        ReportRow row = regression_cell(c, rows, targets, m, opt.cv);
        row.experiment = "regression";
        row.method = "sdi";
        row.factor = factor;
        row.q = q;
        rep.rows.push_back(std::move(row));
      }
    }
  }
  return rep;
}

/// Runs `run` independently on each subgroup (sorted by name); subgroups
/// below `min_size` get a skipped row instead.
inline ExperimentReport subgroup_metrics(const SynthCohort& c, const std::vector<std::string>& grouping,
                                         const std::function<ExperimentReport(const SynthCohort&)>& run,
                                         std::size_t min_size = 50) {
  if (grouping.size() != c.subjects()) fail_validation("subgroup labels do not match the cohort size");
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t j = 0; j < grouping.size(); ++j) groups[grouping[j]].push_back(j);
  ExperimentReport rep;
  rep.name = "subgroup";
  rep.provenance = detail::base_provenance(c, 0);
  bool first = true;
  for (const auto& [name, rows] : groups) {
    if (rows.size() < min_size) {
      ReportRow skip;
      skip.experiment = "subgroup";
      skip.subgroup = name;
      skip.train_size = rows.size();
      skip.status = "skipped";
      skip.message = "subgroup has " + std::to_string(rows.size()) + " subjects, below the minimum " +
                     std::to_string(min_size);
      rep.rows.push_back(std::move(skip));
      continue;
    }
    ExperimentReport sub = run(c.select(rows));
    for (auto& r : sub.rows) r.subgroup = name;
    if (first) rep.provenance.seed = sub.provenance.seed;
    first = false;
    ExperimentReport tagged;
    tagged.rows = std::move(sub.rows);
    for (const auto& [k, v] : sub.provenance.filter_plans) tagged.provenance.filter_plans[name + "/" + k] = v;
    rep.append(tagged);
  }
  return rep;
}

}  // namespace sdi
