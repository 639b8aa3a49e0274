#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "trailgate/dataset.hpp"

namespace trailgate {

struct AugmentConfig {
  double target_ratio = 1.0;  // minority target = ratio * majority count
  int k_neighbors = 5;
  std::uint64_t seed = 0;
};

struct ClassAugment {
  int class_index = 0;
  std::string class_name;
  std::size_t original = 0;
  std::size_t synthetic = 0;
  std::size_t final_count = 0;
};

struct AugmentReport {
  std::vector<ClassAugment> classes;
  // Per non-majority class: generation count g_i per member, in row order.
  std::map<int, std::vector<std::size_t>> per_sample_counts;
  std::size_t singleton_classes = 0;  // classes grown by plain replication
};

struct AugmentResult {
  FeatureTable table;
  LabelVector labels;
  AugmentReport report;
};

// ADASYN oversampling of every non-majority class up to
// floor(ratio * majority), with largest-remainder apportionment of the
// per-sample budgets so the targets are met exactly.
AugmentResult adasyn(const FeatureTable& table, const LabelVector& labels,
                     const AugmentConfig& config);

std::map<int, std::size_t> class_counts(const LabelVector& labels);

// k nearest neighbors (excluding self) per query row over the whole table,
// Euclidean on the scaled features; ties resolve by lower row index.
std::vector<std::vector<std::size_t>> knn_indices(const FeatureTable& table,
                                                  const std::vector<std::size_t>& queries,
                                                  std::size_t k);

void write_augment_report_csv(const AugmentReport& report, const std::string& path);

}  // namespace trailgate
