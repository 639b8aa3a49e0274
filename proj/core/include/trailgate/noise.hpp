#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "trailgate/dataset.hpp"
#include "trailgate/matrix.hpp"

namespace trailgate {

// Out-of-fold class probabilities: row i holds P(y = j | x_i) from the
// model trained on the folds that exclude i.
struct ProbMatrix {
  Matrix probs;
  std::vector<int> fold_id;
};

struct ConfidentJoint {
  std::vector<std::vector<std::int64_t>> counting;  // C[given][predicted]
  std::vector<int> assignment;                      // confident class or -1 per sample
};

struct NoiseReport {
  std::vector<double> thresholds;                   // A_j
  std::vector<std::vector<std::int64_t>> counting;  // C
  Matrix joint;                                     // D
  std::vector<std::size_t> abnormal_indices;
  std::vector<std::size_t> unconfident_indices;
  std::size_t small_class_warnings = 0;  // classes with fewer samples than folds
};

class ProbClassifier {
 public:
  virtual ~ProbClassifier() = default;
  virtual void fit(const FeatureTable& table, const LabelVector& labels) = 0;
  virtual Matrix predict_proba(const FeatureTable& table) const = 0;
};

// Builds a fresh model for one fold; the seed varies per fold.
using ProbModelFactory = std::function<std::unique_ptr<ProbClassifier>(std::uint64_t seed)>;

ProbMatrix oof_probabilities(const FeatureTable& table, const LabelVector& labels, int k,
                             const ProbModelFactory& factory, std::uint64_t seed,
                             std::size_t* small_class_warnings = nullptr);

// A_j: mean predicted probability of class j over the samples whose given
// label is j.
std::vector<double> class_thresholds(const ProbMatrix& probs, const LabelVector& labels);

ConfidentJoint confident_joint(const ProbMatrix& probs, const LabelVector& labels,
                               const std::vector<double>& thresholds);

// Row-calibrates C to the class sizes and normalizes to a distribution.
Matrix joint_distribution(const std::vector<std::vector<std::int64_t>>& counting,
                          const LabelVector& labels);

std::vector<std::size_t> extract_abnormal(const ConfidentJoint& joint, const LabelVector& labels);

// Full pass: cross-validated probabilities, thresholds, joint, abnormal set.
NoiseReport confident_learning(const FeatureTable& table, const LabelVector& labels, int k,
                               const ProbModelFactory& factory, std::uint64_t seed);

void write_noise_report_json(const NoiseReport& report, const LabelVector& labels,
                             const std::string& path);

}  // namespace trailgate
