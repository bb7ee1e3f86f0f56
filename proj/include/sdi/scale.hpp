#pragma once

// Scoring, severity banding and label construction for multi-item Likert
// sub-scales, plus the response CSV format.

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sdi/error.hpp"
#include "sdi/text.hpp"

namespace sdi {

/// Immutable description of one sub-scale.
struct ScaleSpec {
  std::string name;
  std::string factor;
  int item_count = 0;
  int likert_min = 0;
  int likert_max = 3;
  int score_multiplier = 2;
  /// Lower edges of Mild, Moderate, Severe and Extremely Severe on the
  /// multiplied score.
  std::array<int, 4> cutoffs{};

  int levels() const { return likert_max - likert_min + 1; }
  int min_raw_total() const { return item_count * likert_min; }
  int max_raw_total() const { return item_count * likert_max; }
  int min_score() const { return min_raw_total() * score_multiplier; }
  int max_score() const { return max_raw_total() * score_multiplier; }

  void validate() const {
    if (item_count <= 0)
      fail_validation("scale '" + name + "': item_count must be positive");
    if (likert_min >= likert_max)
      fail_validation("scale '" + name + "': likert_min must be below likert_max");
    if (score_multiplier <= 0)
      fail_validation("scale '" + name + "': score_multiplier must be positive");
    for (std::size_t i = 1; i < cutoffs.size(); ++i)
      if (cutoffs[i - 1] >= cutoffs[i])
        fail_validation("scale '" + name + "': cutoffs must be strictly ascending");
    if (cutoffs.back() > max_score())
      fail_validation("scale '" + name + "': last cutoff " +
                      std::to_string(cutoffs.back()) + " exceeds maximum score " +
                      std::to_string(max_score()));
  }
};

inline bool operator==(const ScaleSpec& a, const ScaleSpec& b) {
  return a.name == b.name && a.factor == b.factor &&
         a.item_count == b.item_count && a.likert_min == b.likert_min &&
         a.likert_max == b.likert_max &&
         a.score_multiplier == b.score_multiplier && a.cutoffs == b.cutoffs;
}

/// The three DASS-21 sub-scales, 7 items each, 0..3, doubled before banding.
namespace dass21 {

inline ScaleSpec make(std::string factor, std::array<int, 4> cutoffs) {
  ScaleSpec spec;
  spec.name = "dass21-" + factor;
  spec.factor = std::move(factor);
  spec.item_count = 7;
  spec.likert_min = 0;
  spec.likert_max = 3;
  spec.score_multiplier = 2;
  spec.cutoffs = cutoffs;
  return spec;
}

inline ScaleSpec depression() { return make("depression", {10, 14, 21, 28}); }
inline ScaleSpec anxiety() { return make("anxiety", {8, 10, 15, 20}); }
inline ScaleSpec stress() { return make("stress", {15, 19, 26, 34}); }

inline std::array<ScaleSpec, 3> all() { return {depression(), anxiety(), stress()}; }

/// Lookup by factor name; nullopt for unknown names.
inline std::optional<ScaleSpec> by_name(std::string_view factor) {
  if (factor == "depression") return depression();
  if (factor == "anxiety") return anxiety();
  if (factor == "stress") return stress();
  return std::nullopt;
}

}  // namespace dass21

inline void to_json(nlohmann::json& j, const ScaleSpec& s) {
  j = nlohmann::json{{"name", s.name},
                     {"factor", s.factor},
                     {"item_count", s.item_count},
                     {"likert_min", s.likert_min},
                     {"likert_max", s.likert_max},
                     {"score_multiplier", s.score_multiplier},
                     {"cutoffs", s.cutoffs}};
}

/// likert_min, likert_max and score_multiplier are optional (defaults 0, 3, 2).
inline void from_json(const nlohmann::json& j, ScaleSpec& s) {
  try {
    s = ScaleSpec{};
    j.at("name").get_to(s.name);
    j.at("factor").get_to(s.factor);
    j.at("item_count").get_to(s.item_count);
    s.likert_min = j.value("likert_min", 0);
    s.likert_max = j.value("likert_max", 3);
    s.score_multiplier = j.value("score_multiplier", 2);
    const auto& cut = j.at("cutoffs");
    if (!cut.is_array() || cut.size() != 4)
      fail_validation("scale spec: 'cutoffs' must be an array of four integers");
    for (std::size_t i = 0; i < 4; ++i) cut[i].get_to(s.cutoffs[i]);
  } catch (const nlohmann::json::exception& e) {
    fail_validation(std::string("scale spec: ") + e.what());
  }
  s.validate();
}

inline ScaleSpec load_scale_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::validation, "cannot open scale spec", path, {}, {});
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::validation, std::string("invalid JSON: ") + e.what(),
                path, {}, {});
  }
  return j.get<ScaleSpec>();
}

enum class SeverityBand : int { Normal = 0, Mild, Moderate, Severe, ExtremelySevere };

inline constexpr std::array<SeverityBand, 5> all_bands{
    SeverityBand::Normal, SeverityBand::Mild, SeverityBand::Moderate,
    SeverityBand::Severe, SeverityBand::ExtremelySevere};

inline std::string_view band_name(SeverityBand b) {
  switch (b) {
    case SeverityBand::Normal: return "normal";
    case SeverityBand::Mild: return "mild";
    case SeverityBand::Moderate: return "moderate";
    case SeverityBand::Severe: return "severe";
    case SeverityBand::ExtremelySevere: return "extremely_severe";
  }
  return "unknown";
}

/// N x m integer item responses, rows are subjects.
class ResponseMatrix {
 public:
  ResponseMatrix() = default;

  ResponseMatrix(std::vector<std::string> subject_ids, std::size_t items,
                 std::vector<int> values)
      : ids_(std::move(subject_ids)), items_(items), values_(std::move(values)) {
    if (ids_.empty()) fail_validation("response matrix needs at least one subject");
    if (items_ == 0) fail_validation("response matrix needs at least one item");
    if (values_.size() != ids_.size() * items_)
      fail_validation("response matrix: " + std::to_string(values_.size()) +
                      " values do not fill " + std::to_string(ids_.size()) + "x" +
                      std::to_string(items_));
    std::set<std::string_view> seen;
    for (const auto& id : ids_)
      if (!seen.insert(id).second)
        fail_validation("duplicate subject_id '" + id + "'");
  }

  std::size_t subjects() const { return ids_.size(); }
  std::size_t items() const { return items_; }
  const std::vector<std::string>& subject_ids() const { return ids_; }
  const std::vector<int>& values() const { return values_; }

  std::span<const int> row(std::size_t j) const {
    return {values_.data() + j * items_, items_};
  }
  int at(std::size_t subject, std::size_t item) const {
    return values_[subject * items_ + item];
  }

  /// Rows in the given order (duplicates not allowed).
  ResponseMatrix select(std::span<const std::size_t> rows) const {
    std::vector<std::string> ids;
    std::vector<int> vals;
    ids.reserve(rows.size());
    vals.reserve(rows.size() * items_);
    for (std::size_t j : rows) {
      ids.push_back(ids_[j]);
      auto r = row(j);
      vals.insert(vals.end(), r.begin(), r.end());
    }
    return ResponseMatrix(std::move(ids), items_, std::move(vals));
  }

  /// Throws unless every cell is inside the spec's Likert range and the item
  /// count matches.
  void check_conforms(const ScaleSpec& spec) const {
    if (static_cast<int>(items_) != spec.item_count)
      fail_validation("response matrix has " + std::to_string(items_) +
                      " items but scale '" + spec.name + "' expects " +
                      std::to_string(spec.item_count));
    for (std::size_t j = 0; j < subjects(); ++j)
      for (std::size_t i = 0; i < items_; ++i) {
        const int v = at(j, i);
        if (v < spec.likert_min || v > spec.likert_max)
          throw Error(ErrorKind::validation,
                      "value " + std::to_string(v) + " outside [" +
                          std::to_string(spec.likert_min) + "," +
                          std::to_string(spec.likert_max) + "] for subject '" +
                          ids_[j] + "'",
                      "", j + 1, i + 1);
      }
  }

  friend bool operator==(const ResponseMatrix&, const ResponseMatrix&) = default;

 private:
  std::vector<std::string> ids_;
  std::size_t items_ = 0;
  std::vector<int> values_;
};

/// Unmultiplied item sums; the grouping key for heterogeneity analysis.
inline std::vector<int> raw_totals(const ResponseMatrix& r) {
  std::vector<int> out(r.subjects(), 0);
  for (std::size_t j = 0; j < r.subjects(); ++j)
    for (int v : r.row(j)) out[j] += v;
  return out;
}

/// Multiplied totals, the scores that severity cutoffs apply to.
inline std::vector<int> total_scores(const ResponseMatrix& r, const ScaleSpec& spec) {
  if (static_cast<int>(r.items()) != spec.item_count)
    fail_validation("response matrix has " + std::to_string(r.items()) +
                    " items but scale '" + spec.name + "' expects " +
                    std::to_string(spec.item_count));
  auto out = raw_totals(r);
  for (int& t : out) t *= spec.score_multiplier;
  return out;
}

/// Half-open bands: Normal below c1, Mild in [c1,c2), ..., ExtremelySevere
/// from c4 up.
inline SeverityBand band_of(int score, const ScaleSpec& spec) {
  if (score < spec.min_score() || score > spec.max_score())
    fail_validation("score " + std::to_string(score) + " outside [" +
                    std::to_string(spec.min_score()) + "," +
                    std::to_string(spec.max_score()) + "] for scale '" +
                    spec.name + "'");
  int band = 0;
  for (int c : spec.cutoffs)
    if (score >= c) ++band;
  return static_cast<SeverityBand>(band);
}

inline std::vector<SeverityBand> bands_of(const ResponseMatrix& r, const ScaleSpec& spec) {
  std::vector<SeverityBand> out;
  out.reserve(r.subjects());
  for (int s : total_scores(r, spec)) out.push_back(band_of(s, spec));
  return out;
}

enum class LabelScheme { BC, RBC, Cluster2, Cluster3Binary };

inline std::string_view scheme_name(LabelScheme s) {
  switch (s) {
    case LabelScheme::BC: return "bc";
    case LabelScheme::RBC: return "rbc";
    case LabelScheme::Cluster2: return "cluster2";
    case LabelScheme::Cluster3Binary: return "cluster3";
  }
  return "unknown";
}

inline std::optional<LabelScheme> parse_scheme(std::string_view s) {
  if (s == "bc") return LabelScheme::BC;
  if (s == "rbc") return LabelScheme::RBC;
  if (s == "cluster2") return LabelScheme::Cluster2;
  if (s == "cluster3") return LabelScheme::Cluster3Binary;
  return std::nullopt;
}

/// Binary labels with a retention mask; labels of dropped subjects are 0 and
/// carry no meaning.
struct LabelSet {
  LabelScheme scheme = LabelScheme::BC;
  std::vector<std::uint8_t> labels;
  std::vector<std::uint8_t> retained;

  std::size_t size() const { return labels.size(); }
  std::optional<int> label(std::size_t j) const {
    if (!retained[j]) return std::nullopt;
    return labels[j];
  }
  std::size_t retained_count() const {
    return static_cast<std::size_t>(std::count(retained.begin(), retained.end(), 1));
  }
};

/// BC: abnormal = anything above Normal. RBC: Mild dropped, Moderate and up
/// is abnormal.
inline LabelSet binarize(std::span<const SeverityBand> bands, LabelScheme scheme) {
  if (scheme != LabelScheme::BC && scheme != LabelScheme::RBC)
    fail_validation("binarize supports only the bc and rbc schemes");
  LabelSet out;
  out.scheme = scheme;
  out.labels.resize(bands.size(), 0);
  out.retained.resize(bands.size(), 1);
  for (std::size_t j = 0; j < bands.size(); ++j) {
    if (scheme == LabelScheme::BC) {
      out.labels[j] = bands[j] != SeverityBand::Normal;
    } else if (bands[j] == SeverityBand::Mild) {
      out.retained[j] = 0;
    } else {
      out.labels[j] = bands[j] >= SeverityBand::Moderate;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV: header `subject_id,item_1,...,item_m`, one subject per line.

namespace detail {

inline void check_id_cell(std::string_view id, const std::string& path, std::size_t row) {
  if (id.empty())
    throw Error(ErrorKind::validation, "empty subject_id", path, row, 1);
  if (id.find_first_of("\",\n") != std::string_view::npos)
    throw Error(ErrorKind::validation, "subject_id contains a reserved character",
                path, row, 1);
}

}  // namespace detail

/// Parses a response table from a stream. `source` names the input in error
/// messages; rows and columns in errors are 1-based file coordinates.
inline ResponseMatrix read_responses(std::istream& in, const ScaleSpec& spec,
                                     const std::string& source = "<stream>") {
  spec.validate();
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = text::trim_cr(line);
    if (!view.empty() && view.front() == '#') continue;
    have_header = true;
    break;
  }
  if (!have_header) throw Error(ErrorKind::validation, "missing header", source, 1, {});

  const auto header = text::split(text::trim_cr(line), ',');
  const std::size_t m = static_cast<std::size_t>(spec.item_count);
  if (header.empty() || header[0] != "subject_id")
    throw Error(ErrorKind::validation, "first column must be 'subject_id'", source,
                line_no, 1);
  for (std::size_t i = 0; i < m; ++i) {
    const std::string expected = "item_" + std::to_string(i + 1);
    if (header.size() <= i + 1)
      throw Error(ErrorKind::validation, "missing column '" + expected + "'", source,
                  line_no, i + 2);
    if (header[i + 1] != expected)
      throw Error(ErrorKind::validation,
                  "expected column '" + expected + "', found '" +
                      std::string(header[i + 1]) + "'",
                  source, line_no, i + 2);
  }
  if (header.size() != m + 1)
    throw Error(ErrorKind::validation,
                "unexpected extra column '" + std::string(header[m + 1]) + "'",
                source, line_no, m + 2);

  std::vector<std::string> ids;
  std::vector<int> values;
  std::set<std::string, std::less<>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = text::trim_cr(line);
    if (view.empty()) continue;
    const auto cells = text::split(view, ',');
    if (cells.size() != m + 1)
      throw Error(ErrorKind::validation,
                  "expected " + std::to_string(m + 1) + " cells, found " +
                      std::to_string(cells.size()),
                  source, line_no, {});
    detail::check_id_cell(cells[0], source, line_no);
    if (!seen.emplace(cells[0]).second)
      throw Error(ErrorKind::validation,
                  "duplicate subject_id '" + std::string(cells[0]) + "'", source,
                  line_no, 1);
    ids.emplace_back(cells[0]);
    for (std::size_t i = 0; i < m; ++i) {
      const auto v = text::parse_int(cells[i + 1]);
      if (!v)
        throw Error(ErrorKind::validation,
                    "non-integer cell '" + std::string(cells[i + 1]) + "'", source,
                    line_no, i + 2);
      if (*v < spec.likert_min || *v > spec.likert_max)
        throw Error(ErrorKind::validation,
                    "value " + std::to_string(*v) + " outside [" +
                        std::to_string(spec.likert_min) + "," +
                        std::to_string(spec.likert_max) + "]",
                    source, line_no, i + 2);
      values.push_back(static_cast<int>(*v));
    }
  }
  if (ids.empty())
    throw Error(ErrorKind::validation, "no subject rows after header", source,
                line_no, {});
  return ResponseMatrix(std::move(ids), m, std::move(values));
}

inline ResponseMatrix load_responses(const std::string& path, const ScaleSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::validation, "cannot open file", path, {}, {});
  return read_responses(in, spec, path);
}

/// Writes the canonical form read_responses accepts. Optional `comment` lines
/// are emitted first, each prefixed with '#'.
inline void write_responses(std::ostream& out, const ResponseMatrix& r,
                            std::span<const std::string> comment = {}) {
  for (const auto& c : comment) out << "# " << c << '\n';
  out << "subject_id";
  for (std::size_t i = 0; i < r.items(); ++i) out << ",item_" << (i + 1);
  out << '\n';
  for (std::size_t j = 0; j < r.subjects(); ++j) {
    out << r.subject_ids()[j];
    for (int v : r.row(j)) out << ',' << v;
    out << '\n';
  }
}

inline void save_responses(const std::string& path, const ResponseMatrix& r,
                           std::span<const std::string> comment = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::computation, "cannot write file", path, {}, {});
  write_responses(out, r, comment);
}

}  // namespace sdi
