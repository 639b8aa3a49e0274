#pragma once

#include <span>
#include <string>
#include <vector>

#include "trailgate/dataset.hpp"
#include "trailgate/matrix.hpp"

namespace trailgate {

struct FeatureRanking {
  std::vector<double> gains;       // per feature index
  std::vector<double> thresholds;  // best split per continuous feature, NaN otherwise
  std::vector<std::size_t> order;  // feature indices, descending gain
  std::vector<std::size_t> survivors;  // after PCC pruning, still in gain order
  Matrix pcc_matrix;               // filled by prune_redundant
};

// Shannon entropy of the label distribution, in bits.
double entropy(const LabelVector& labels);
double entropy_of_counts(std::span<const std::size_t> counts, std::size_t total);

double info_gain_discrete(std::span<const double> column, const LabelVector& labels);

struct ContinuousGain {
  double gain = 0.0;
  double threshold = 0.0;  // NaN when no valid split exists
};

// Best binary split over midpoints of adjacent distinct sorted values,
// with candidates equal to the column min or max discarded. Lower half is
// {x < t}, higher is {x >= t}.
ContinuousGain info_gain_continuous(std::span<const double> column, const LabelVector& labels);

// Scores every feature (IG_dis for discrete, IG_con for continuous) and
// sorts descending; ties break toward the lower feature index.
FeatureRanking rank_features(const FeatureTable& table, const LabelVector& labels);

// Pearson correlation; defined as 0 when either column is constant.
double pcc(std::span<const double> a, std::span<const double> b);

Matrix pcc_matrix(const FeatureTable& table);

// Walks feature pairs in descending-gain order and drops the lower-gain
// member of any pair with |pcc| > threshold. Fills ranking.pcc_matrix and
// ranking.survivors, and returns the survivors.
std::vector<std::size_t> prune_redundant(FeatureRanking& ranking, const FeatureTable& table,
                                         double threshold);

void write_ranking_csv(const FeatureRanking& ranking, const Schema& schema,
                       const std::string& path);

}  // namespace trailgate
