#include "trailgate/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace trailgate {

double gini(std::span<const double> counts) {
  double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total <= 0.0) throw Error("gini of an empty node");
  double sum_sq = 0.0;
  for (double c : counts) {
    double p = c / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

namespace {

struct BuildItem {
  std::int32_t node;
  std::vector<std::uint32_t> samples;
  int depth;
};

struct SplitChoice {
  bool valid = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = -1.0;
};

std::vector<double> class_histogram(const std::vector<std::uint32_t>& samples,
                                    const std::vector<int>& labels, std::size_t m) {
  std::vector<double> counts(m, 0.0);
  for (std::uint32_t s : samples) counts[static_cast<std::size_t>(labels[s])] += 1.0;
  return counts;
}

bool is_pure(const std::vector<double>& counts) {
  int nonzero = 0;
  for (double c : counts) nonzero += c > 0.0;
  return nonzero <= 1;
}

// Best midpoint split of one feature within a node; returns decrease < 0
// when the feature is constant or no partition satisfies min_leaf.
SplitChoice best_split_on_feature(const FeatureTable& table, const std::vector<int>& labels,
                                  const std::vector<std::uint32_t>& samples,
                                  const std::vector<double>& parent_counts, std::size_t feature,
                                  int min_leaf, std::vector<std::pair<double, int>>& scratch) {
  scratch.clear();
  scratch.reserve(samples.size());
  for (std::uint32_t s : samples) scratch.emplace_back(table.at(s, feature), labels[s]);
  std::sort(scratch.begin(), scratch.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  SplitChoice choice;
  choice.feature = feature;
  if (scratch.front().first == scratch.back().first) return choice;  // constant

  const std::size_t m = parent_counts.size();
  const double n = static_cast<double>(samples.size());
  double parent_impurity = gini(parent_counts);

  std::vector<double> below(m, 0.0);
  std::vector<double> above = parent_counts;
  double below_sq = 0.0;
  double above_sq = 0.0;
  for (double c : above) above_sq += c * c;
  double n_below = 0.0;

  for (std::size_t p = 1; p < scratch.size(); ++p) {
    std::size_t cls = static_cast<std::size_t>(scratch[p - 1].second);
    // Incremental sum-of-squares update for both sides.
    below_sq += 2.0 * below[cls] + 1.0;
    above_sq += -2.0 * above[cls] + 1.0;
    below[cls] += 1.0;
    above[cls] -= 1.0;
    n_below += 1.0;

    if (scratch[p - 1].first == scratch[p].first) continue;
    double n_above = n - n_below;
    if (n_below < min_leaf || n_above < min_leaf) continue;

    double gini_below = 1.0 - below_sq / (n_below * n_below);
    double gini_above = 1.0 - above_sq / (n_above * n_above);
    double weighted = (n_below / n) * gini_below + (n_above / n) * gini_above;
    double decrease = parent_impurity - weighted;
    if (decrease > choice.decrease) {
      choice.valid = true;
      choice.decrease = decrease;
      choice.threshold = (scratch[p - 1].first + scratch[p].first) / 2.0;
    }
  }
  return choice;
}

Tree build_tree(const FeatureTable& table, const std::vector<int>& labels, std::size_t m,
                const ForestParams& params, std::size_t tree_index) {
  Rng rng(Rng::mix(params.seed, tree_index));

  std::vector<std::uint32_t> root_samples(table.rows);
  for (std::size_t i = 0; i < table.rows; ++i) {
    root_samples[i] = static_cast<std::uint32_t>(rng.uniform_index(table.rows));
  }

  const std::size_t d = table.cols;
  std::size_t mtry = params.features_per_split > 0
                         ? static_cast<std::size_t>(params.features_per_split)
                         : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
  mtry = std::min(mtry, d);

  Tree tree;
  tree.nodes.emplace_back();

  std::vector<BuildItem> stack;
  stack.push_back({0, std::move(root_samples), 0});

  std::vector<std::size_t> perm(d);
  std::vector<std::pair<double, int>> scratch;

  while (!stack.empty()) {
    BuildItem item = std::move(stack.back());
    stack.pop_back();

    std::vector<double> counts = class_histogram(item.samples, labels, m);
    bool depth_capped = params.max_depth > 0 && item.depth >= params.max_depth;
    if (is_pure(counts) || item.samples.size() < 2 * static_cast<std::size_t>(params.min_leaf) ||
        depth_capped) {
      tree.nodes[static_cast<std::size_t>(item.node)].counts = std::move(counts);
      continue;
    }

    // Candidate features in a fresh random order; the first mtry
    // non-constant ones form the subset, extended until some split is valid
    // so nodes do not stall on constant draws.
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);

    SplitChoice best;
    std::size_t informative_seen = 0;
    for (std::size_t f : perm) {
      SplitChoice c = best_split_on_feature(table, labels, item.samples, counts, f,
                                            params.min_leaf, scratch);
      if (c.valid) {
        ++informative_seen;
        if (c.decrease > best.decrease) best = c;
      }
      if (informative_seen >= mtry && best.valid) break;
    }

    if (!best.valid) {
      tree.nodes[static_cast<std::size_t>(item.node)].counts = std::move(counts);
      continue;
    }

    std::vector<std::uint32_t> left_samples, right_samples;
    left_samples.reserve(item.samples.size());
    right_samples.reserve(item.samples.size());
    for (std::uint32_t s : item.samples) {
      if (table.at(s, best.feature) < best.threshold) {
        left_samples.push_back(s);
      } else {
        right_samples.push_back(s);
      }
    }

    std::int32_t left_id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    std::int32_t right_id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();

    TreeNode& node = tree.nodes[static_cast<std::size_t>(item.node)];
    node.feature = static_cast<std::int32_t>(best.feature);
    node.threshold = best.threshold;
    node.left = left_id;
    node.right = right_id;

    // Left pushed last so it is processed first; keeps the rng draw order,
    // and therefore the whole tree, a pure function of (seed, tree index).
    stack.push_back({right_id, std::move(right_samples), item.depth + 1});
    stack.push_back({left_id, std::move(left_samples), item.depth + 1});
  }
  return tree;
}

int leaf_argmax(const TreeNode& leaf) {
  int best = 0;
  for (std::size_t c = 1; c < leaf.counts.size(); ++c) {
    if (leaf.counts[c] > leaf.counts[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  }
  return best;
}

}  // namespace

std::vector<std::size_t> Forest::bootstrap_indices(std::uint64_t seed, std::size_t tree_index,
                                                   std::size_t n) {
  Rng rng(Rng::mix(seed, tree_index));
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = rng.uniform_index(n);
  return idx;
}

Forest Forest::train(const FeatureTable& table, const LabelVector& labels,
                     const ForestParams& params) {
  if (table.rows < 2) throw Error("train_forest needs at least 2 samples");
  if (table.cols < 1) throw Error("train_forest needs at least 1 feature");
  if (labels.size() != table.rows) throw Error("train_forest: labels/table mismatch");
  if (params.n_estimators < 1) throw Error("train_forest: n_estimators must be >= 1");

  Forest forest;
  forest.params_ = params;
  forest.num_classes_ = labels.num_classes();
  forest.feature_names_ = table.schema.names;
  forest.trees_.resize(static_cast<std::size_t>(params.n_estimators));

  {
    std::vector<double> counts(forest.num_classes_, 0.0);
    for (int y : labels.labels) counts[static_cast<std::size_t>(y)] += 1.0;
    forest.single_class_ = is_pure(counts);
  }

  parallel_for(0, forest.trees_.size(), 1, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      forest.trees_[t] = build_tree(table, labels.labels, forest.num_classes_, params, t);
    }
  });
  return forest;
}

const TreeNode& Forest::leaf_for(const Tree& tree, const double* row) const {
  const TreeNode* node = &tree.nodes[0];
  while (!node->is_leaf()) {
    node = row[node->feature] < node->threshold
               ? &tree.nodes[static_cast<std::size_t>(node->left)]
               : &tree.nodes[static_cast<std::size_t>(node->right)];
  }
  return *node;
}

std::vector<int> Forest::predict(const FeatureTable& table) const {
  if (table.cols != feature_names_.size()) {
    throw Error("predict: row width " + std::to_string(table.cols) + " != training width " +
                std::to_string(feature_names_.size()));
  }
  std::vector<int> out(table.rows, 0);
  parallel_for(0, table.rows, 1024, [&](std::size_t begin, std::size_t end) {
    std::vector<int> votes(num_classes_);
    for (std::size_t r = begin; r < end; ++r) {
      std::fill(votes.begin(), votes.end(), 0);
      for (const Tree& tree : trees_) {
        ++votes[static_cast<std::size_t>(leaf_argmax(leaf_for(tree, table.row(r))))];
      }
      int best = 0;
      for (std::size_t c = 1; c < votes.size(); ++c) {
        if (votes[c] > votes[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
      }
      out[r] = best;
    }
  });
  return out;
}

Matrix Forest::predict_proba(const FeatureTable& table) const {
  if (table.cols != feature_names_.size()) {
    throw Error("predict_proba: row width mismatch");
  }
  Matrix probs(table.rows, num_classes_, 0.0);
  parallel_for(0, table.rows, 1024, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      double* row = probs.row(r);
      for (const Tree& tree : trees_) {
        const TreeNode& leaf = leaf_for(tree, table.row(r));
        double total = std::accumulate(leaf.counts.begin(), leaf.counts.end(), 0.0);
        for (std::size_t c = 0; c < num_classes_; ++c) row[c] += leaf.counts[c] / total;
      }
      for (std::size_t c = 0; c < num_classes_; ++c) {
        row[c] /= static_cast<double>(trees_.size());
      }
    }
  });
  return probs;
}

namespace {
constexpr char kForestMagic[4] = {'T', 'G', 'R', 'F'};
constexpr std::uint32_t kForestVersion = 1;
}  // namespace

void Forest::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kForestMagic, 4);
  write_u32(out, kForestVersion);
  write_u32(out, static_cast<std::uint32_t>(trees_.size()));
  write_u32(out, static_cast<std::uint32_t>(num_classes_));
  write_u64(out, params_.seed);
  write_u32(out, static_cast<std::uint32_t>(params_.max_depth));
  write_u32(out, static_cast<std::uint32_t>(params_.min_leaf));
  write_u32(out, static_cast<std::uint32_t>(params_.features_per_split));
  write_u32(out, static_cast<std::uint32_t>(feature_names_.size()));
  for (const auto& name : feature_names_) write_string(out, name);
  for (const Tree& tree : trees_) {
    write_u32(out, static_cast<std::uint32_t>(tree.nodes.size()));
    for (const TreeNode& node : tree.nodes) {
      write_u32(out, static_cast<std::uint32_t>(node.feature));
      write_f64(out, node.threshold);
      write_u32(out, static_cast<std::uint32_t>(node.left));
      write_u32(out, static_cast<std::uint32_t>(node.right));
      write_u32(out, static_cast<std::uint32_t>(node.counts.size()));
      for (double c : node.counts) write_f64(out, c);
    }
  }
  if (!out) throw IoError("write failed: " + path);
}

Forest Forest::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kForestMagic, 4) != 0) throw IoError("not a forest file: " + path);
  std::uint32_t version = read_u32(in);
  if (version != kForestVersion) throw IoError("unsupported forest version");

  Forest forest;
  std::uint32_t n_trees = read_u32(in);
  forest.num_classes_ = read_u32(in);
  forest.params_.n_estimators = static_cast<int>(n_trees);
  forest.params_.seed = read_u64(in);
  forest.params_.max_depth = static_cast<int>(read_u32(in));
  forest.params_.min_leaf = static_cast<int>(read_u32(in));
  forest.params_.features_per_split = static_cast<int>(read_u32(in));
  std::uint32_t n_features = read_u32(in);
  forest.feature_names_.reserve(n_features);
  for (std::uint32_t i = 0; i < n_features; ++i) forest.feature_names_.push_back(read_string(in));
  forest.trees_.resize(n_trees);
  for (Tree& tree : forest.trees_) {
    std::uint32_t n_nodes = read_u32(in);
    tree.nodes.resize(n_nodes);
    for (TreeNode& node : tree.nodes) {
      node.feature = static_cast<std::int32_t>(read_u32(in));
      node.threshold = read_f64(in);
      node.left = static_cast<std::int32_t>(read_u32(in));
      node.right = static_cast<std::int32_t>(read_u32(in));
      std::uint32_t n_counts = read_u32(in);
      node.counts.resize(n_counts);
      for (double& c : node.counts) c = read_f64(in);
    }
  }
  return forest;
}

}  // namespace trailgate
