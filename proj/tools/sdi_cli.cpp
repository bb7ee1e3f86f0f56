// sdi: command-line front end.
//
//   sdi synth   [--config cfg.json] [--n N]            -> cohort directory
//   sdi audit   depression=dep.csv ... | --cohort DIR   -> discrepancy reports
//   sdi sweep   depression=dep.csv ... | --cohort DIR   -> SDI per exclusion fraction
//   sdi bench   --cohort DIR [--scheme rbc --q 0 0.1]   -> experiment grid
//   sdi compare-outliers --cohort DIR                   -> method x factor grid
//
// Exit status: 0 ok, 1 validation error, 2 computation failure. Errors go to
// stderr as one `error kind=... file=... row=... column=... message="..."` line.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdi/sdi.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "sdi 1.0.0";

struct Global {
  std::uint64_t seed = 2025;
  bool seed_given = false;
  std::string out_dir = "sdi-out";
  std::string format = "both";
  bool record_timing = false;

  bool csv() const { return format != "json"; }
  bool json_out() const { return format != "csv"; }
};

std::ofstream open_out(const fs::path& path) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw sdi::Error(sdi::ErrorKind::computation, "cannot write file", path.string(), {}, {});
  return out;
}

json provenance_block(const Global& g, const std::string& command, const std::string& config_hash) {
  return {{"tool", kToolVersion}, {"command", command}, {"seed", g.seed}, {"config_hash", config_hash}};
}

std::vector<std::string> csv_comment(const json& prov) { return {"provenance " + prov.dump()}; }

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Inputs: factor=path pairs or a cohort directory, with optional custom
// scale definitions.

struct FactorInput {
  sdi::ScaleSpec spec;
  std::string path;
  sdi::ResponseMatrix responses;
};

std::map<std::string, sdi::ScaleSpec> load_custom_specs(const std::string& path) {
  std::map<std::string, sdi::ScaleSpec> out;
  if (path.empty()) return out;
  std::ifstream in(path);
  if (!in) throw sdi::Error(sdi::ErrorKind::validation, "cannot open scale spec", path, {}, {});
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw sdi::Error(sdi::ErrorKind::validation, std::string("invalid JSON: ") + e.what(), path, {}, {});
  }
  const json arr = j.is_array() ? j : json::array({j});
  for (const auto& item : arr) {
    sdi::ScaleSpec s;
    try {
      s = item.get<sdi::ScaleSpec>();
    } catch (const sdi::Error& e) {
      throw sdi::Error(sdi::ErrorKind::validation, e.what(), path, {}, {});
    }
    out[s.factor] = s;
  }
  return out;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return sdi::text::hex64(sdi::text::fnv1a(ss.str()));
}

std::vector<FactorInput> resolve_inputs(const std::vector<std::string>& pairs, const std::string& cohort,
                                        const std::string& spec_file) {
  const auto custom = load_custom_specs(spec_file);
  auto spec_for = [&](const std::string& factor) {
    if (auto it = custom.find(factor); it != custom.end()) return it->second;
    if (auto s = sdi::dass21::by_name(factor)) return *s;
    sdi::fail_validation("unknown factor '" + factor + "' (use depression|anxiety|stress or --spec-file)");
  };
  std::vector<FactorInput> out;
  if (!cohort.empty()) {
    if (!pairs.empty()) sdi::fail_validation("give either factor=path inputs or --cohort, not both");
    for (const auto& s : sdi::dass21::all()) {
      const auto spec = spec_for(s.factor);
      const auto path = (fs::path(cohort) / (s.factor + ".csv")).string();
      out.push_back({spec, path, sdi::load_responses(path, spec)});
    }
    return out;
  }
  if (pairs.empty()) sdi::fail_validation("no inputs: give factor=path pairs or --cohort DIR");
  for (const auto& p : pairs) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == p.size())
      sdi::fail_validation("input '" + p + "' is not of the form factor=path");
    const std::string factor = p.substr(0, eq), path = p.substr(eq + 1);
    const auto spec = spec_for(factor);
    out.push_back({spec, path, sdi::load_responses(path, spec)});
  }
  return out;
}

std::string inputs_hash(const std::vector<FactorInput>& inputs, const std::string& extra) {
  std::uint64_t h = sdi::text::fnv1a(extra);
  for (const auto& in : inputs) {
    h = sdi::text::fnv1a(json(in.spec).dump(), h);
    h = sdi::text::fnv1a(file_digest(in.path), h);
  }
  return sdi::text::hex64(h);
}

// ---------------------------------------------------------------------------

struct AuditArgs {
  std::vector<std::string> inputs;
  std::string cohort, spec_file;
  double q = 0.1;
  bool iterative = false;
};

int cmd_audit(const Global& g, const AuditArgs& a) {
  const auto inputs = resolve_inputs(a.inputs, a.cohort, a.spec_file);
  const auto mode = a.iterative ? sdi::FilterMode::iterative : sdi::FilterMode::one_shot;
  const auto prov = provenance_block(
      g, "audit", inputs_hash(inputs, "audit q=" + sdi::text::format_double(a.q) + (a.iterative ? " iterative" : "")));
  for (const auto& in : inputs) {
    const auto rep = sdi::analyze(in.responses, in.spec);
    const auto plan = sdi::make_filter_plan(in.responses, in.spec, a.q, mode);
    const fs::path base = fs::path(g.out_dir) / ("audit_" + in.spec.factor);
    if (g.csv()) {
      auto out = open_out(base.string() + ".csv");
      out << "# " << csv_comment(prov)[0] << '\n';
      sdi::write_discrepancy_csv(out, rep, &plan);
    }
    if (g.json_out()) write_json(base.string() + ".json", {{"provenance", prov}, {"report", sdi::to_json(rep)}, {"filter_plan", sdi::to_json(plan)}});
    std::cout << "factor=" << in.spec.factor << " n=" << rep.subjects() << " groups=" << rep.gdi.size()
              << " sdi=" << sdi::text::format_fixed(rep.sdi, 5)
              << " sdi_per_sqrt_item=" << sdi::text::format_fixed(rep.sdi_per_sqrt_item(), 5) << '\n';
    for (const auto& [band, s] : rep.band_sdi)
      std::cout << "  band=" << sdi::band_name(band) << " n=" << rep.band_sizes.at(band)
                << " sdi=" << sdi::text::format_fixed(s, 5) << '\n';
  }
  return 0;
}

struct SweepArgs {
  std::vector<std::string> inputs;
  std::string cohort, spec_file;
  std::vector<double> fractions;
  bool iterative = false;
};

int cmd_sweep(const Global& g, const SweepArgs& a) {
  const auto inputs = resolve_inputs(a.inputs, a.cohort, a.spec_file);
  const auto fractions = a.fractions.empty() ? sdi::default_sweep_fractions() : a.fractions;
  const auto mode = a.iterative ? sdi::FilterMode::iterative : sdi::FilterMode::one_shot;
  std::string extra = "sweep";
  for (double f : fractions) extra += " " + sdi::text::format_double(f);
  if (a.iterative) extra += " iterative";
  const auto prov = provenance_block(g, "sweep", inputs_hash(inputs, extra));
  for (const auto& in : inputs) {
    const auto points = sdi::sdi_sweep(in.responses, in.spec, fractions, mode);
    const fs::path base = fs::path(g.out_dir) / ("sweep_" + in.spec.factor);
    if (g.csv()) {
      auto out = open_out(base.string() + ".csv");
      out << "# " << csv_comment(prov)[0] << '\n';
      out << "fraction,sdi,retained\n";
      for (const auto& p : points)
        out << sdi::text::format_double(p.fraction) << ',' << sdi::text::format_double(p.sdi) << ',' << p.retained
            << '\n';
    }
    if (g.json_out()) {
      json rows = json::array();
      for (const auto& p : points) rows.push_back({{"fraction", p.fraction}, {"sdi", p.sdi}, {"retained", p.retained}});
      write_json(base.string() + ".json", {{"provenance", prov}, {"factor", in.spec.factor}, {"sweep", rows}});
    }
    std::cout << "factor=" << in.spec.factor << '\n';
    for (const auto& p : points)
      std::cout << "  fraction=" << sdi::text::format_fixed(p.fraction, 2)
                << " sdi=" << sdi::text::format_fixed(p.sdi, 5) << " retained=" << p.retained << '\n';
  }
  return 0;
}

struct SynthArgs {
  std::string config;
  std::optional<std::size_t> n;
};

int cmd_synth(const Global& g, const SynthArgs& a) {
  sdi::SynthConfig cfg;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw sdi::Error(sdi::ErrorKind::validation, "cannot open config", a.config, {}, {});
    try {
      cfg = json::parse(in).get<sdi::SynthConfig>();
    } catch (const json::exception& e) {
      throw sdi::Error(sdi::ErrorKind::validation, std::string("invalid JSON: ") + e.what(), a.config, {}, {});
    } catch (const sdi::Error& e) {
      throw sdi::Error(sdi::ErrorKind::validation, e.what(), a.config, {}, {});
    }
  }
  if (g.seed_given) cfg.seed = g.seed;
  if (a.n) cfg.n_subjects = *a.n;
  try {
    cfg.validate();
  } catch (const sdi::Error& e) {
    throw sdi::Error(sdi::ErrorKind::validation, e.what(), a.config, {}, {});
  }
  Global eff = g;
  eff.seed = cfg.seed;
  json prov = provenance_block(eff, "synth", sdi::config_hash(cfg));
  prov["config"] = cfg;
  const auto cohort = sdi::gen_cohort(cfg);
  sdi::write_cohort(g.out_dir, cohort, prov);
  std::cout << "wrote " << cohort.subjects() << " subjects to " << g.out_dir << " (config_hash "
            << sdi::config_hash(cfg) << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string cohort;
  std::vector<std::string> schemes{"rbc"};
  std::vector<double> q{0.0, 0.1};
  std::vector<std::string> models{"logreg", "random_forest_cls"};
  std::vector<std::string> factors{"depression", "anxiety", "stress"};
  bool regression = false;
  std::vector<std::string> regression_models{"ridge", "random_forest_reg"};
  bool excluded = false;
  std::string excluded_scheme = "bc";
  std::string subgroup;
  std::size_t min_subgroup = 50;
  bool balance = false;
  bool iterative = false;
  int folds = 5;
  int trees = 100;
};

std::vector<sdi::ModelSpec> make_models(const std::vector<std::string>& names, const Global& g, int trees) {
  std::vector<sdi::ModelSpec> out;
  for (const auto& n : names) {
    const auto kind = sdi::parse_model_kind(n);
    if (!kind) sdi::fail_validation("unknown model '" + n + "'");
    sdi::ModelSpec s;
    s.kind = *kind;
    s.seed = g.seed;
    s.n_trees = trees;
    out.push_back(s);
  }
  return out;
}

void emit_report(const Global& g, const sdi::ExperimentReport& rep, const std::string& stem, const json& prov) {
  json p = prov;
  const json body = sdi::to_json(rep);
  p["filter_plans"] = body["provenance"]["filter_plans"];
  if (body["provenance"].contains("notes")) p["notes"] = body["provenance"]["notes"];
  p["std_meaning"] = body["provenance"]["std_meaning"];
  if (rep.provenance.wall_clock_seconds) p["wall_clock_seconds"] = *rep.provenance.wall_clock_seconds;
  if (g.csv()) {
    auto out = open_out(fs::path(g.out_dir) / (stem + ".csv"));
    sdi::write_report_csv(out, rep, csv_comment(p));
  }
  if (g.json_out()) write_json(fs::path(g.out_dir) / (stem + ".json"), {{"provenance", p}, {"report", rep.name}, {"rows", body["rows"]}});
}

void print_rows(const sdi::ExperimentReport& rep) {
  for (const auto& r : rep.rows) {
    std::cout << r.experiment << (r.subgroup.empty() ? "" : " subgroup=" + r.subgroup) << " method=" << r.method
              << " model=" << r.model << " factor=" << r.factor << " scheme=" << r.scheme
              << " q=" << sdi::text::format_double(r.q) << " n=" << r.train_size;
    if (r.test_size) std::cout << " test=" << *r.test_size;
    if (r.metrics) {
      const auto& m = *r.metrics;
      if (m.classification)
        std::cout << " acc=" << sdi::text::format_fixed(m.accuracy.mean, 3) << " f1="
                  << sdi::text::format_fixed(m.f1.mean, 3) << "+-" << sdi::text::format_fixed(m.f1.std, 3)
                  << " auc=" << sdi::text::format_fixed(m.auc.mean, 3);
      else
        std::cout << " mae=" << sdi::text::format_fixed(m.mae.mean, 3) << " rmse=" << sdi::text::format_fixed(m.rmse.mean, 3);
    }
    if (r.status != "ok") std::cout << " status=" << r.status << " (" << r.message << ")";
    std::cout << '\n';
  }
}

int cmd_bench(const Global& g, const BenchArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cohort = sdi::load_cohort(a.cohort);
  sdi::ExperimentOptions opt;
  opt.cv.k_folds = a.folds;
  opt.cv.seed = g.seed;
  opt.cv.balance_training = a.balance;
  opt.filter_mode = a.iterative ? sdi::FilterMode::iterative : sdi::FilterMode::one_shot;
  std::vector<sdi::LabelScheme> schemes;
  for (const auto& s : a.schemes) {
    const auto p = sdi::parse_scheme(s);
    if (!p || (*p != sdi::LabelScheme::BC && *p != sdi::LabelScheme::RBC))
      sdi::fail_validation("scheme must be bc or rbc, got '" + s + "'");
    schemes.push_back(*p);
  }
  const auto excl_scheme = sdi::parse_scheme(a.excluded_scheme);
  if (!excl_scheme || (*excl_scheme != sdi::LabelScheme::BC && *excl_scheme != sdi::LabelScheme::RBC))
    sdi::fail_validation("excluded scheme must be bc or rbc");
  const auto models = make_models(a.models, g, a.trees);
  const auto reg_models = make_models(a.regression_models, g, a.trees);
  for (const auto& m : models)
    if (!sdi::is_classifier(m.kind)) sdi::fail_validation("--models takes classifiers; use --regression-models");
  for (const auto& m : reg_models)
    if (sdi::is_classifier(m.kind)) sdi::fail_validation("--regression-models takes regressors");

  auto run = [&](const sdi::SynthCohort& c) {
    sdi::ExperimentReport rep = sdi::threshold_experiment(c, a.factors, schemes, a.q, models, opt);
    if (a.regression) rep.append(sdi::regression_experiment(c, a.factors, a.q, reg_models, opt));
    if (a.excluded) {
      double qx = 0;
      for (double q : a.q)
        if (q > 0) {
          qx = q;
          break;
        }
      if (qx <= 0) sdi::fail_validation("--excluded-validation needs a positive --q");
      sdi::ModelSpec rf;
      rf.kind = sdi::ModelKind::random_forest_cls;
      rf.seed = g.seed;
      rf.n_trees = a.trees;
      for (const auto& f : a.factors) rep.append(sdi::excluded_validation(c, f, qx, rf, *excl_scheme, opt));
    }
    rep.name = "bench";
    return rep;
  };

  sdi::ExperimentReport rep;
  if (!a.subgroup.empty()) {
    if (a.subgroup != "sex") sdi::fail_validation("unknown subgroup column '" + a.subgroup + "' (available: sex)");
    if (cohort.truth.sex.size() != cohort.subjects())
      sdi::fail_validation("cohort has no '" + a.subgroup + "' column (ground_truth.csv missing)");
    rep = sdi::subgroup_metrics(cohort, cohort.truth.sex, run, a.min_subgroup);
    rep.name = "bench";
  } else {
    rep = run(cohort);
  }
  if (g.record_timing)
    rep.provenance.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  emit_report(g, rep, "bench", provenance_block(g, "bench", sdi::config_hash(cohort.config)));
  print_rows(rep);
  if (rep.any_failed()) {
    std::cerr << "error kind=computation message=\"one or more grid cells failed\"\n";
    return 2;
  }
  return 0;
}

struct CompareArgs {
  std::string cohort;
  double contamination = 0.1;
  std::vector<std::string> factors{"depression", "anxiety", "stress"};
  int trees = 100;
  int iforest_trees = 100;
  std::size_t subsample = 256;
  int k_neighbors = 20;
};

int cmd_compare(const Global& g, const CompareArgs& a) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cohort = sdi::load_cohort(a.cohort);
  sdi::OutlierComparisonOptions opt;
  opt.contamination = a.contamination;
  opt.experiment.cv.seed = g.seed;
  opt.iforest.seed = g.seed;
  opt.iforest.n_trees = a.iforest_trees;
  opt.iforest.subsample = a.subsample;
  opt.lof.k_neighbors = a.k_neighbors;
  sdi::ModelSpec cls, reg;
  cls.kind = sdi::ModelKind::random_forest_cls;
  reg.kind = sdi::ModelKind::random_forest_reg;
  cls.seed = reg.seed = g.seed;
  cls.n_trees = reg.n_trees = a.trees;
  auto rep = sdi::compare_outlier_methods(cohort, a.factors, cls, reg, opt);
  if (g.record_timing)
    rep.provenance.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto prov = provenance_block(g, "compare-outliers", sdi::config_hash(cohort.config));
  emit_report(g, rep, "outliers", prov);
  if (g.csv()) {
    json p = prov;
    p["filter_plans"] = rep.provenance.filter_plans;
    auto out = open_out(fs::path(g.out_dir) / "outliers_grid.csv");
    sdi::write_outlier_grid_csv(out, rep, csv_comment(p));
  }
  print_rows(rep);
  if (rep.any_failed()) {
    std::cerr << "error kind=computation message=\"one or more grid cells failed\"\n";
    return 2;
  }
  return 0;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

void report_error(const sdi::Error& e) {
  std::cerr << "error kind=" << (e.kind() == sdi::ErrorKind::validation ? "validation" : "computation");
  if (!e.file().empty()) std::cerr << " file=" << quote(e.file());
  if (e.row()) std::cerr << " row=" << *e.row();
  if (e.column()) std::cerr << " column=" << *e.column();
  std::cerr << " message=" << quote(e.what()) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symptom discrepancy audit, filtering and benchmark tool"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  Global g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Master seed (default 2025)");
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--format", g.format, "Emitted formats")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->capture_default_str();
  app.add_flag("--record-timing", g.record_timing, "Add wall-clock seconds to report provenance");

  AuditArgs audit;
  auto* c_audit = app.add_subcommand("audit", "SDI / GDI report per factor");
  c_audit->add_option("inputs", audit.inputs, "factor=responses.csv pairs");
  c_audit->add_option("--cohort", audit.cohort, "Cohort directory with <factor>.csv files");
  c_audit->add_option("--spec-file", audit.spec_file, "JSON scale definition(s) for custom factors");
  c_audit->add_option("--q", audit.q, "Fraction marked in the excluded_flag column")->capture_default_str();
  c_audit->add_flag("--iterative", audit.iterative, "Re-run the pipeline after each removal");

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep", "Retained-set SDI across exclusion fractions");
  c_sweep->add_option("inputs", sweep.inputs, "factor=responses.csv pairs");
  c_sweep->add_option("--cohort", sweep.cohort, "Cohort directory");
  c_sweep->add_option("--spec-file", sweep.spec_file, "JSON scale definition(s)");
  c_sweep->add_option("--fractions", sweep.fractions, "Ascending fractions (default 0..0.40 step 0.05)");
  c_sweep->add_flag("--iterative", sweep.iterative, "Iterative removal");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic cohort");
  c_synth->add_option("--config", synth.config, "Generator config JSON (defaults if omitted)");
  std::size_t n_override = 0;
  auto* n_opt = c_synth->add_option("--n", n_override, "Override the subject count");

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "Classification / regression grids under filtering");
  c_bench->add_option("--cohort", bench.cohort, "Cohort directory")->required();
  c_bench->add_option("--scheme", bench.schemes, "Label schemes: bc, rbc")->capture_default_str();
  c_bench->add_option("--q", bench.q, "Filter fractions")->capture_default_str();
  c_bench->add_option("--models", bench.models, "Classifiers: logreg, random_forest_cls")->capture_default_str();
  c_bench->add_option("--factors", bench.factors, "Factors")->capture_default_str();
  c_bench->add_flag("--regression", bench.regression, "Also run the regression grid");
  c_bench->add_option("--regression-models", bench.regression_models, "Regressors: ridge, random_forest_reg")
      ->capture_default_str();
  c_bench->add_flag("--excluded-validation", bench.excluded, "Train on retained, test on excluded (first q > 0)");
  c_bench->add_option("--excluded-scheme", bench.excluded_scheme, "Scheme for excluded validation")
      ->capture_default_str();
  c_bench->add_option("--subgroup", bench.subgroup, "Run per subgroup of this column (sex)");
  c_bench->add_option("--min-subgroup", bench.min_subgroup, "Minimum subgroup size")->capture_default_str();
  c_bench->add_flag("--balance", bench.balance, "Down-sample the majority class in training folds");
  c_bench->add_flag("--iterative", bench.iterative, "Iterative filtering");
  c_bench->add_option("--folds", bench.folds, "Cross-validation folds")->capture_default_str();
  c_bench->add_option("--trees", bench.trees, "Trees per forest")->capture_default_str();

  CompareArgs cmp;
  auto* c_cmp = app.add_subcommand("compare-outliers", "Isolation forest / LOF / SDI removal comparison");
  c_cmp->add_option("--cohort", cmp.cohort, "Cohort directory")->required();
  c_cmp->add_option("--contamination", cmp.contamination, "Fraction removed by every method")->capture_default_str();
  c_cmp->add_option("--factors", cmp.factors, "Factors")->capture_default_str();
  c_cmp->add_option("--trees", cmp.trees, "Trees per evaluation forest")->capture_default_str();
  c_cmp->add_option("--iforest-trees", cmp.iforest_trees, "Isolation trees")->capture_default_str();
  c_cmp->add_option("--subsample", cmp.subsample, "Isolation subsample size")->capture_default_str();
  c_cmp->add_option("--k-neighbors", cmp.k_neighbors, "LOF neighbours")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error kind=validation message=" << quote(e.what()) << '\n';
    return 1;
  }
  g.seed_given = seed_opt->count() > 0;
  if (n_opt->count() > 0) synth.n = n_override;

  try {
    if (*c_audit) return cmd_audit(g, audit);
    if (*c_sweep) return cmd_sweep(g, sweep);
    if (*c_synth) return cmd_synth(g, synth);
    if (*c_bench) return cmd_bench(g, bench);
    if (*c_cmp) return cmd_compare(g, cmp);
  } catch (const sdi::Error& e) {
    report_error(e);
    return e.kind() == sdi::ErrorKind::validation ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error kind=computation message=" << quote(e.what()) << '\n';
    return 2;
  }
  return 0;
}
