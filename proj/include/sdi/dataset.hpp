#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdi/error.hpp"
#include "sdi/text.hpp"

namespace sdi {

/// N x d real features with the subject ids they belong to.
struct FeatureMatrix {
  std::vector<std::string> subject_ids;
  Eigen::MatrixXd x;

  std::size_t subjects() const { return subject_ids.size(); }
  std::size_t dims() const { return static_cast<std::size_t>(x.cols()); }

  FeatureMatrix select(std::span<const std::size_t> rows) const {
    FeatureMatrix out;
    out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      out.subject_ids.push_back(subject_ids[rows[k]]);
      out.x.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(rows[k]));
    }
    return out;
  }
};

/// Header `subject_id,f_0,...,f_{d-1}`; values in shortest round-trip form.
inline void write_features(std::ostream& out, const FeatureMatrix& f,
                           std::span<const std::string> comment = {}) {
  for (const auto& c : comment) out << "# " << c << '\n';
  out << "subject_id";
  for (Eigen::Index c = 0; c < f.x.cols(); ++c) out << ",f_" << c;
  out << '\n';
  for (std::size_t j = 0; j < f.subjects(); ++j) {
    out << f.subject_ids[j];
    for (Eigen::Index c = 0; c < f.x.cols(); ++c)
      out << ',' << text::format_double(f.x(static_cast<Eigen::Index>(j), c));
    out << '\n';
  }
}

inline FeatureMatrix read_features(std::istream& in, const std::string& source = "<stream>") {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto v = text::trim_cr(line);
    if (!v.empty() && v.front() == '#') continue;
    have_header = true;
    break;
  }
  if (!have_header) throw Error(ErrorKind::validation, "missing header", source, 1, {});
  const auto header = text::split(text::trim_cr(line), ',');
  if (header.empty() || header[0] != "subject_id")
    throw Error(ErrorKind::validation, "first column must be 'subject_id'", source, line_no, 1);
  const std::size_t d = header.size() - 1;
  for (std::size_t c = 0; c < d; ++c)
    if (header[c + 1] != "f_" + std::to_string(c))
      throw Error(ErrorKind::validation, "expected column 'f_" + std::to_string(c) + "'",
                  source, line_no, c + 2);

  FeatureMatrix f;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    const auto v = text::trim_cr(line);
    if (v.empty()) continue;
    const auto cells = text::split(v, ',');
    if (cells.size() != d + 1)
      throw Error(ErrorKind::validation, "wrong number of cells", source, line_no, {});
    f.subject_ids.emplace_back(cells[0]);
    for (std::size_t c = 0; c < d; ++c) {
      const auto x = text::parse_double(cells[c + 1]);
      if (!x || !std::isfinite(*x))
        throw Error(ErrorKind::validation, "non-numeric feature '" + std::string(cells[c + 1]) + "'",
                    source, line_no, c + 2);
      values.push_back(*x);
    }
  }
  if (f.subject_ids.empty())
    throw Error(ErrorKind::validation, "no feature rows", source, line_no, {});
  f.x.resize(static_cast<Eigen::Index>(f.subject_ids.size()), static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < f.subject_ids.size(); ++j)
    for (std::size_t c = 0; c < d; ++c)
      f.x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = values[j * d + c];
  return f;
}

}  // namespace sdi
