#pragma once

#include <string>
#include <vector>

#include "trailgate/dataset.hpp"

namespace trailgate::testing {

// In-memory table with generic column names; all continuous by default.
inline FeatureTable make_table(const std::vector<std::vector<double>>& rows,
                               std::vector<FeatureKind> kinds = {}) {
  FeatureTable t;
  t.rows = rows.size();
  t.cols = rows.empty() ? 0 : rows[0].size();
  if (kinds.empty()) kinds.assign(t.cols, FeatureKind::continuous);
  for (std::size_t c = 0; c < t.cols; ++c) {
    t.schema.names.push_back("f" + std::to_string(c));
    t.schema.kinds.push_back(kinds[c]);
    t.schema.dictionaries.emplace_back();
    t.schema.scale_params.emplace_back(0.0, 1.0);
  }
  for (const auto& row : rows) {
    t.data.insert(t.data.end(), row.begin(), row.end());
  }
  return t;
}

inline LabelVector make_labels(const std::vector<int>& ys, std::size_t num_classes) {
  LabelVector l;
  l.scheme = LabelScheme::binary;  // scheme tag is irrelevant for generic fixtures
  l.labels = ys;
  for (std::size_t c = 0; c < num_classes; ++c) l.class_names.push_back("c" + std::to_string(c));
  return l;
}

// One comma-separated NSL-KDD line with the given overrides on an
// all-zeros feature row.
inline std::string nslkdd_line(const std::string& protocol, const std::string& service,
                               const std::string& flag, const std::string& label,
                               double src_bytes = 0.0, double dst_bytes = 0.0,
                               int difficulty = -1) {
  std::vector<std::string> fields(kNumFeatures, "0");
  fields[1] = protocol;
  fields[2] = service;
  fields[3] = flag;
  fields[4] = std::to_string(src_bytes);
  fields[5] = std::to_string(dst_bytes);
  std::string line;
  for (const auto& f : fields) line += f + ",";
  line += label;
  if (difficulty >= 0) line += "," + std::to_string(difficulty);
  return line;
}

}  // namespace trailgate::testing
