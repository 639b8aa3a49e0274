#include "trailgate/noise.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "json.hpp"

namespace trailgate {

ProbMatrix oof_probabilities(const FeatureTable& table, const LabelVector& labels, int k,
                             const ProbModelFactory& factory, std::uint64_t seed,
                             std::size_t* small_class_warnings) {
  if (k < 2) throw Error("oof_probabilities needs k >= 2");
  auto counts_by_class = [&] {
    std::vector<std::vector<std::size_t>> members(labels.num_classes());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      members[static_cast<std::size_t>(labels.labels[i])].push_back(i);
    }
    return members;
  }();
  std::size_t present = 0;
  for (const auto& m : counts_by_class) present += !m.empty();
  if (present < 2) throw Error("oof_probabilities needs at least 2 classes");

  // Stratified fold assignment: shuffle within class, deal round-robin.
  // Classes smaller than k simply reach fewer folds (best effort).
  std::size_t warnings = 0;
  std::vector<int> fold_of(labels.size(), -1);
  for (std::size_t cls = 0; cls < counts_by_class.size(); ++cls) {
    auto members = counts_by_class[cls];
    if (members.empty()) continue;
    if (members.size() < static_cast<std::size_t>(k)) ++warnings;
    Rng rng(Rng::mix(seed, 0x5f0ul + cls));
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i) {
      fold_of[members[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
  }
  if (small_class_warnings) *small_class_warnings = warnings;

  ProbMatrix out;
  out.fold_id = fold_of;
  out.probs = Matrix(table.rows, labels.num_classes(), 0.0);

  for (int fold = 0; fold < k; ++fold) {
    std::vector<std::size_t> train_idx, held_idx;
    for (std::size_t i = 0; i < table.rows; ++i) {
      (fold_of[i] == fold ? held_idx : train_idx).push_back(i);
    }
    if (held_idx.empty()) continue;
    if (train_idx.empty()) throw Error("oof_probabilities: empty training fold");

    auto gather = [&](const std::vector<std::size_t>& idx, FeatureTable& t, LabelVector& l) {
      t.schema = table.schema;
      t.cols = table.cols;
      t.rows = idx.size();
      t.data.resize(idx.size() * table.cols);
      l.scheme = labels.scheme;
      l.class_names = labels.class_names;
      l.labels.resize(idx.size());
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const double* src = table.row(idx[i]);
        std::copy(src, src + table.cols, t.data.data() + i * t.cols);
        l.labels[i] = labels.labels[idx[i]];
      }
    };

    FeatureTable train_table, held_table;
    LabelVector train_labels, held_labels;
    gather(train_idx, train_table, train_labels);
    gather(held_idx, held_table, held_labels);

    auto model = factory(Rng::mix(seed, 0xf01d0000ul + static_cast<std::uint64_t>(fold)));
    model->fit(train_table, train_labels);
    Matrix fold_probs = model->predict_proba(held_table);
    for (std::size_t i = 0; i < held_idx.size(); ++i) {
      for (std::size_t c = 0; c < labels.num_classes(); ++c) {
        out.probs(held_idx[i], c) = fold_probs(i, c);
      }
    }
  }
  return out;
}

std::vector<double> class_thresholds(const ProbMatrix& probs, const LabelVector& labels) {
  const std::size_t m = labels.num_classes();
  std::vector<double> sums(m, 0.0);
  std::vector<std::size_t> counts(m, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::size_t j = static_cast<std::size_t>(labels.labels[i]);
    sums[j] += probs.probs(i, j);
    ++counts[j];
  }
  std::vector<double> thresholds(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    if (counts[j] == 0) {
      throw Error("class_thresholds: class " + std::to_string(j) + " has no samples");
    }
    thresholds[j] = sums[j] / static_cast<double>(counts[j]);
  }
  return thresholds;
}

ConfidentJoint confident_joint(const ProbMatrix& probs, const LabelVector& labels,
                               const std::vector<double>& thresholds) {
  const std::size_t m = labels.num_classes();
  ConfidentJoint joint;
  joint.counting.assign(m, std::vector<std::int64_t>(m, 0));
  joint.assignment.assign(labels.size(), -1);

  for (std::size_t i = 0; i < labels.size(); ++i) {
    // Global argmax; ties resolve to the lower class index.
    std::size_t j_star = 0;
    for (std::size_t j = 1; j < m; ++j) {
      if (probs.probs(i, j) > probs.probs(i, j_star)) j_star = j;
    }
    if (probs.probs(i, j_star) >= thresholds[j_star]) {
      joint.assignment[i] = static_cast<int>(j_star);
      ++joint.counting[static_cast<std::size_t>(labels.labels[i])][j_star];
    }
  }
  return joint;
}

Matrix joint_distribution(const std::vector<std::vector<std::int64_t>>& counting,
                          const LabelVector& labels) {
  const std::size_t m = counting.size();
  std::vector<double> class_sizes(m, 0.0);
  for (int y : labels.labels) class_sizes[static_cast<std::size_t>(y)] += 1.0;

  Matrix calibrated(m, m, 0.0);
  double grand_total = 0.0;
  bool any_confident = false;
  for (std::size_t i = 0; i < m; ++i) {
    std::int64_t row_sum = std::accumulate(counting[i].begin(), counting[i].end(), std::int64_t{0});
    if (row_sum == 0) continue;  // row contributes zeros
    any_confident = true;
    for (std::size_t j = 0; j < m; ++j) {
      calibrated(i, j) =
          static_cast<double>(counting[i][j]) * class_sizes[i] / static_cast<double>(row_sum);
      grand_total += calibrated(i, j);
    }
  }
  if (!any_confident) throw Error("joint_distribution: no confident samples in any class");
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) calibrated(i, j) /= grand_total;
  }
  return calibrated;
}

std::vector<std::size_t> extract_abnormal(const ConfidentJoint& joint, const LabelVector& labels) {
  std::vector<std::size_t> abnormal;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (joint.assignment[i] >= 0 && joint.assignment[i] != labels.labels[i]) {
      abnormal.push_back(i);
    }
  }
  return abnormal;  // already ascending and unique by construction
}

NoiseReport confident_learning(const FeatureTable& table, const LabelVector& labels, int k,
                               const ProbModelFactory& factory, std::uint64_t seed) {
  NoiseReport report;
  ProbMatrix probs =
      oof_probabilities(table, labels, k, factory, seed, &report.small_class_warnings);
  report.thresholds = class_thresholds(probs, labels);
  ConfidentJoint joint = confident_joint(probs, labels, report.thresholds);
  report.counting = joint.counting;
  report.joint = joint_distribution(joint.counting, labels);
  report.abnormal_indices = extract_abnormal(joint, labels);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (joint.assignment[i] < 0) report.unconfident_indices.push_back(i);
  }
  return report;
}

void write_noise_report_json(const NoiseReport& report, const LabelVector& labels,
                             const std::string& path) {
  nlohmann::ordered_json j;
  j["class_names"] = labels.class_names;
  j["thresholds"] = report.thresholds;
  j["counting"] = report.counting;
  std::vector<std::vector<double>> d(report.joint.rows());
  for (std::size_t r = 0; r < report.joint.rows(); ++r) {
    d[r].assign(report.joint.row(r), report.joint.row(r) + report.joint.cols());
  }
  j["joint"] = d;
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (std::size_t t = 0; t < report.counting.size(); ++t) {
    for (std::size_t p = 0; p < report.counting[t].size(); ++p) {
      if (t == p || report.counting[t][p] == 0) continue;
      cells.push_back({{"given", labels.class_names[t]},
                       {"predicted", labels.class_names[p]},
                       {"count", report.counting[t][p]}});
    }
  }
  j["abnormal_cells"] = cells;
  j["abnormal_total"] = report.abnormal_indices.size();
  j["unconfident_total"] = report.unconfident_indices.size();

  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace trailgate
