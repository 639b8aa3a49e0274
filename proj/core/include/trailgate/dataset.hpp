#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trailgate/common.hpp"

namespace trailgate {

inline constexpr std::size_t kNumFeatures = 41;

enum class FeatureKind { discrete, continuous };

// One line of an NSL-KDD file: 41 feature columns, a label, and an
// optional trailing difficulty score (both 42- and 43-column variants
// circulate publicly).
struct RawRecord {
  std::vector<std::string> values;  // exactly kNumFeatures entries
  std::string label;
  std::optional<int> difficulty;
};

struct Schema {
  std::vector<std::string> names;                       // per feature
  std::vector<FeatureKind> kinds;                       // per feature
  std::vector<std::map<std::string, int>> dictionaries; // empty for continuous
  std::vector<std::pair<double, double>> scale_params;  // (min, max) after encoding

  std::size_t num_features() const { return names.size(); }
};

// Row-major feature matrix plus the schema it was produced under.
struct FeatureTable {
  Schema schema;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // rows * cols

  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }

  // Copies the given columns (in the given order) into a new table whose
  // schema is the corresponding subset.
  FeatureTable select_columns(const std::vector<std::size_t>& indices) const;

  // Extracts a copy of one column.
  std::vector<double> column(std::size_t c) const;

  void append_row(const double* values);
};

enum class LabelScheme { binary, multi5 };

struct LabelVector {
  LabelScheme scheme = LabelScheme::binary;
  std::vector<int> labels;
  std::vector<std::string> class_names;

  std::size_t size() const { return labels.size(); }
  std::size_t num_classes() const { return class_names.size(); }
};

// Class index layout. Binary: 0 = normal, 1 = attack. Five-class order
// follows the dataset summary table: Normal, DoS, Probe, U2R, R2L.
inline constexpr int kBinaryNormal = 0;
inline constexpr int kBinaryAttack = 1;
inline constexpr int kMultiNormal = 0;

const std::vector<std::string>& binary_class_names();
const std::vector<std::string>& multi5_class_names();

// Canonical 41 feature names and their discrete/continuous kinds
// (protocol_type, service and flag are the three discrete ones).
const std::vector<std::string>& nslkdd_feature_names();
const std::vector<FeatureKind>& nslkdd_feature_kinds();

// Attack sub-type -> family name, the union of the train- and test-set
// sub-type lists (39 attacks plus "normal").
const std::map<std::string, std::string>& attack_family_map();

std::vector<RawRecord> parse_nslkdd(const std::string& path);

Schema fit_schema(const std::vector<RawRecord>& records);

struct EncodeStats {
  std::size_t unseen_categories = 0;  // test-time categories absent from training
  std::size_t clipped_values = 0;     // test-time values outside the training range
};

FeatureTable encode_and_scale(const std::vector<RawRecord>& records, const Schema& schema,
                              EncodeStats* stats = nullptr);

LabelVector map_labels(const std::vector<RawRecord>& records, LabelScheme scheme,
                       bool unknown_as_attack = false);

struct Split {
  FeatureTable train_table;
  LabelVector train_labels;
  FeatureTable validation_table;
  LabelVector validation_labels;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> validation_indices;
};

Split split_train_validation(const FeatureTable& table, const LabelVector& labels, double ratio,
                             std::uint64_t seed);

// Versioned columnar cache: 4-byte magic, schema block, then the row-major
// 64-bit little-endian payload.
void save_table(const FeatureTable& table, const std::string& path);
FeatureTable load_table(const std::string& path);

}  // namespace trailgate
