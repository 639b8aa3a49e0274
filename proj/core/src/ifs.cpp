#include "trailgate/ifs.hpp"

#include <algorithm>
#include <fstream>

namespace trailgate {

int stop_rule_peak(std::span<const IfsPoint> points) {
  if (points.empty()) throw Error("stop_rule_peak on an empty curve");
  int best_k = points[0].k;
  double best_acc = points[0].accuracy;
  for (const IfsPoint& p : points) {
    if (p.accuracy > best_acc) {
      best_acc = p.accuracy;
      best_k = p.k;
    }
  }
  return best_k;
}

int stop_rule_dma(std::span<const IfsPoint> points, double threshold) {
  if (!(threshold > 0.0)) throw Error("stop_rule_dma: threshold must be positive");
  if (points.size() < 4) return stop_rule_peak(points);  // not enough windows

  // MA(i) over accuracy indices (i-1, i, i+1); valid for i in [1, n-2]
  // (0-based). DMA compares MA at consecutive positions, so the first
  // evaluable scenario sits at the second window.
  std::vector<double> ma;
  for (std::size_t i = 1; i + 1 < points.size(); ++i) {
    ma.push_back((points[i - 1].accuracy + points[i].accuracy + points[i + 1].accuracy) / 3.0);
  }
  int passing = 0;
  for (std::size_t w = 1; w < ma.size(); ++w) {
    if (ma[w] - ma[w - 1] > threshold) {
      ++passing;
    } else {
      break;
    }
  }
  return std::max(1, passing == 0 ? 1 : passing);
}

IfsCurve run_ifs(const FeatureTable& table, const LabelVector& labels,
                 const std::vector<std::size_t>& survivors, const FeatureTable& abnormal_rows,
                 const LabelVector& abnormal_labels, const IfsEvaluator& evaluate,
                 StopRule stop_rule, double dma_threshold, double split_ratio,
                 std::uint64_t seed) {
  if (survivors.empty()) throw Error("run_ifs: empty survivor list");
  if (abnormal_rows.rows > 0 && abnormal_rows.cols != table.cols) {
    throw Error("run_ifs: abnormal rows do not share the table schema");
  }
  if (abnormal_rows.rows != abnormal_labels.size()) {
    throw Error("run_ifs: abnormal rows/labels mismatch");
  }

  Split split = split_train_validation(table, labels, split_ratio, seed);

  // Abnormal rows join the training subset only; the validation subset
  // stays untouched original data.
  FeatureTable train_full = std::move(split.train_table);
  LabelVector train_labels = std::move(split.train_labels);
  for (std::size_t r = 0; r < abnormal_rows.rows; ++r) {
    train_full.append_row(abnormal_rows.row(r));
    train_labels.labels.push_back(abnormal_labels.labels[r]);
  }

  IfsCurve curve;
  std::vector<std::size_t> prefix;
  for (std::size_t k = 1; k <= survivors.size(); ++k) {
    prefix.assign(survivors.begin(), survivors.begin() + static_cast<std::ptrdiff_t>(k));
    FeatureTable train_k = train_full.select_columns(prefix);
    FeatureTable val_k = split.validation_table.select_columns(prefix);
    double acc = evaluate(train_k, train_labels, val_k, split.validation_labels,
                          Rng::mix(seed, 0x1f5ull + k));
    curve.points.push_back({static_cast<int>(k), acc});
  }

  curve.chosen_k = stop_rule == StopRule::peak ? stop_rule_peak(curve.points)
                                               : stop_rule_dma(curve.points, dma_threshold);
  for (int i = 0; i < curve.chosen_k; ++i) {
    std::size_t f = survivors[static_cast<std::size_t>(i)];
    curve.chosen_indices.push_back(f);
    curve.chosen_features.push_back(table.schema.names[f]);
  }
  return curve;
}

void write_ifs_curve_csv(const IfsCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.precision(17);
  out << "k,accuracy,chosen\n";
  for (const IfsPoint& p : curve.points) {
    out << p.k << "," << p.accuracy << "," << (p.k <= curve.chosen_k ? "yes" : "no") << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace trailgate
