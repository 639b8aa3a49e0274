#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "trailgate/dataset.hpp"

namespace trailgate {

struct IfsPoint {
  int k = 0;
  double accuracy = 0.0;
};

struct IfsCurve {
  std::vector<IfsPoint> points;  // one per k, ascending from 1
  int chosen_k = 0;
  std::vector<std::string> chosen_features;
  std::vector<std::size_t> chosen_indices;  // into the original table
};

enum class StopRule { peak, dma };

// Trains on (train, train_labels), returns accuracy on (val, val_labels).
using IfsEvaluator =
    std::function<double(const FeatureTable& train, const LabelVector& train_labels,
                         const FeatureTable& val, const LabelVector& val_labels,
                         std::uint64_t seed)>;

// Splits 7:3 under the seed, appends the abnormal rows to the training
// side only, then sweeps k = 1..|survivors| over prefixes of the ranked
// survivor list.
IfsCurve run_ifs(const FeatureTable& table, const LabelVector& labels,
                 const std::vector<std::size_t>& survivors, const FeatureTable& abnormal_rows,
                 const LabelVector& abnormal_labels, const IfsEvaluator& evaluate,
                 StopRule stop_rule, double dma_threshold, double split_ratio, std::uint64_t seed);

// Smallest k achieving the maximum accuracy.
int stop_rule_peak(std::span<const IfsPoint> points);

// Windowed mean accuracy MA(k) = mean(acc[k-1..k+1]); DMA compares
// consecutive windows. Keeps the first K features where K counts the
// consecutive passing windows from the first evaluable one. Fewer than 4
// points falls back to the peak rule.
int stop_rule_dma(std::span<const IfsPoint> points, double threshold);

void write_ifs_curve_csv(const IfsCurve& curve, const std::string& path);

}  // namespace trailgate
