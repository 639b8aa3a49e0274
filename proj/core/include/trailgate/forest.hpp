#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trailgate/dataset.hpp"
#include "trailgate/matrix.hpp"

namespace trailgate {

struct ForestParams {
  int n_estimators = 300;
  int max_depth = 0;          // 0 = unbounded
  int min_leaf = 1;
  int features_per_split = 0;  // 0 = ceil(sqrt(d))
  std::uint64_t seed = 0;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<double> counts;  // leaf class counts

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // preorder, root at 0
};

double gini(std::span<const double> counts);

class Forest {
 public:
  static Forest train(const FeatureTable& table, const LabelVector& labels,
                      const ForestParams& params);

  // Majority vote over trees; ties resolve to the lower class index.
  std::vector<int> predict(const FeatureTable& table) const;

  // Mean over trees of the reached leaves' class distributions.
  Matrix predict_proba(const FeatureTable& table) const;

  // Bootstrap draw for one tree, reproducible from (seed, tree index).
  static std::vector<std::size_t> bootstrap_indices(std::uint64_t seed, std::size_t tree_index,
                                                    std::size_t n);

  void save(const std::string& path) const;
  static Forest load(const std::string& path);

  const std::vector<Tree>& trees() const { return trees_; }
  std::size_t num_classes() const { return num_classes_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const ForestParams& params() const { return params_; }
  bool single_class_warning() const { return single_class_; }

 private:
  std::vector<Tree> trees_;
  std::size_t num_classes_ = 0;
  std::vector<std::string> feature_names_;
  ForestParams params_;
  bool single_class_ = false;

  const TreeNode& leaf_for(const Tree& tree, const double* row) const;
};

}  // namespace trailgate
