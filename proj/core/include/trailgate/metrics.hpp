#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trailgate/common.hpp"

namespace trailgate {

struct ConfusionMatrix {
  std::size_t m = 0;
  std::vector<std::int64_t> counts;  // row-major, counts[true * m + pred]
  std::vector<std::string> class_names;

  std::int64_t at(std::size_t t, std::size_t p) const { return counts[t * m + p]; }
  std::int64_t& at(std::size_t t, std::size_t p) { return counts[t * m + p]; }
  std::int64_t total() const;
  double accuracy() const;  // trace / total
};

// Undefined ratios (zero denominator) stay absent rather than silently 0.
struct MetricSet {
  std::optional<double> accuracy;
  std::optional<double> recall;
  std::optional<double> specificity;
  std::optional<double> far;
  std::optional<double> precision;
  std::optional<double> f1;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted,
                          std::size_t m, std::vector<std::string> class_names = {});

// 2x2 matrix with the attack class (index 1) as positive.
MetricSet binary_metrics(const ConfusionMatrix& cm);

// One-vs-rest metric set per class index.
std::map<int, MetricSet> per_class_metrics(const ConfusionMatrix& cm);

struct MacroMetrics {
  double macro_f1 = 0.0;
  double macro_far = 0.0;
};

// Unweighted means; absent per-class values count as 0.
MacroMetrics macro(const std::map<int, MetricSet>& per_class);

void write_confusion_csv(const ConfusionMatrix& cm, const std::string& path);
ConfusionMatrix read_confusion_csv(const std::string& path);

}  // namespace trailgate
