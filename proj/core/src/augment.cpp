#include "trailgate/augment.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace trailgate {

namespace {

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Largest-remainder apportionment of `total` across `weights`; the result
// sums to `total` exactly. Ties on the fractional part go to the lower index.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& weights) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> out(n, 0);
  if (n == 0 || total == 0) return out;
  double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> frac(n, 0.0);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double quota = wsum > 0.0 ? static_cast<double>(total) * weights[i] / wsum
                              : static_cast<double>(total) / static_cast<double>(n);
    out[i] = static_cast<std::size_t>(std::floor(quota));
    frac[i] = quota - static_cast<double>(out[i]);
    assigned += out[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (frac[a] != frac[b]) return frac[a] > frac[b];
    return a < b;
  });
  for (std::size_t i = 0; assigned < total; ++i) {
    ++out[order[i % n]];
    ++assigned;
  }
  return out;
}

}  // namespace

std::map<int, std::size_t> class_counts(const LabelVector& labels) {
  std::map<int, std::size_t> counts;
  for (int y : labels.labels) ++counts[y];
  return counts;
}

std::vector<std::vector<std::size_t>> knn_indices(const FeatureTable& table,
                                                  const std::vector<std::size_t>& queries,
                                                  std::size_t k) {
  const std::size_t n = table.rows;
  const std::size_t d = table.cols;
  if (n < 2) throw Error("knn_indices needs at least 2 rows");
  std::size_t k_eff = std::min(k, n - 1);

  RowMajorMap points(table.data.data(), static_cast<Eigen::Index>(n),
                     static_cast<Eigen::Index>(d));
  Eigen::VectorXd sq_norms = points.rowwise().squaredNorm();

  std::vector<std::vector<std::size_t>> result(queries.size());
  const std::size_t chunk = 32;

  parallel_for(0, queries.size(), chunk, [&](std::size_t begin, std::size_t end) {
    Eigen::MatrixXd q(end - begin, d);
    for (std::size_t i = begin; i < end; ++i) {
      q.row(static_cast<Eigen::Index>(i - begin)) =
          points.row(static_cast<Eigen::Index>(queries[i]));
    }
    Eigen::MatrixXd dots = q * points.transpose();  // (chunk) x n
    std::vector<std::pair<double, std::size_t>> heap;  // max-heap by (dist, idx)
    for (std::size_t i = begin; i < end; ++i) {
      const Eigen::Index qi = static_cast<Eigen::Index>(i - begin);
      double qn = sq_norms(static_cast<Eigen::Index>(queries[i]));
      heap.clear();
      auto worse = [](const std::pair<double, std::size_t>& a,
                      const std::pair<double, std::size_t>& b) { return a < b; };
      for (std::size_t j = 0; j < n; ++j) {
        if (j == queries[i]) continue;
        double dist = qn + sq_norms(static_cast<Eigen::Index>(j)) - 2.0 * dots(qi, static_cast<Eigen::Index>(j));
        std::pair<double, std::size_t> cand{dist, j};
        if (heap.size() < k_eff) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end(), worse);
        } else if (cand < heap.front()) {
          std::pop_heap(heap.begin(), heap.end(), worse);
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end(), worse);
        }
      }
      std::sort_heap(heap.begin(), heap.end(), worse);
      result[i].reserve(k_eff);
      for (const auto& [dist, j] : heap) result[i].push_back(j);
    }
  });
  return result;
}

AugmentResult adasyn(const FeatureTable& table, const LabelVector& labels,
                     const AugmentConfig& config) {
  if (table.rows == 0) throw Error("adasyn on an empty table");
  if (labels.size() != table.rows) throw Error("adasyn: labels/table mismatch");
  if (config.k_neighbors < 1) throw Error("adasyn: k_neighbors must be >= 1");
  if (!(config.target_ratio > 0.0 && config.target_ratio <= 1.0)) {
    throw Error("adasyn: target_ratio must lie in (0, 1]");
  }

  auto counts = class_counts(labels);
  if (counts.size() < 2) throw Error("adasyn requires at least 2 classes");

  // Majority class; ties go to the lower class index.
  int majority = counts.begin()->first;
  std::size_t majority_count = counts.begin()->second;
  for (const auto& [cls, cnt] : counts) {
    if (cnt > majority_count) {
      majority = cls;
      majority_count = cnt;
    }
  }
  const std::size_t target =
      static_cast<std::size_t>(std::floor(config.target_ratio * static_cast<double>(majority_count)));

  // Member rows per class, in row order.
  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t r = 0; r < table.rows; ++r) members[labels.labels[r]].push_back(r);

  // One kNN pass over all minority rows.
  std::vector<std::size_t> queries;
  for (const auto& [cls, rows] : members) {
    if (cls == majority) continue;
    queries.insert(queries.end(), rows.begin(), rows.end());
  }
  std::vector<std::vector<std::size_t>> neighbors;
  if (!queries.empty()) {
    neighbors = knn_indices(table, queries, static_cast<std::size_t>(config.k_neighbors));
  }
  std::map<std::size_t, std::size_t> query_slot;
  for (std::size_t i = 0; i < queries.size(); ++i) query_slot[queries[i]] = i;

  AugmentResult result;
  result.table = table;
  result.labels = labels;

  for (const auto& [cls, rows] : members) {
    ClassAugment entry;
    entry.class_index = cls;
    entry.class_name = static_cast<std::size_t>(cls) < labels.class_names.size()
                           ? labels.class_names[static_cast<std::size_t>(cls)]
                           : std::to_string(cls);
    entry.original = rows.size();

    if (cls == majority) {
      entry.final_count = rows.size();
      result.report.classes.push_back(entry);
      continue;
    }

    std::size_t budget = target > rows.size() ? target - rows.size() : 0;
    std::vector<double> hardness(rows.size(), 0.0);  // r_i
    double r_sum = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& nn = neighbors[query_slot[rows[i]]];
      std::size_t other = 0;
      for (std::size_t j : nn) {
        if (labels.labels[j] != cls) ++other;
      }
      hardness[i] = nn.empty() ? 0.0 : static_cast<double>(other) / static_cast<double>(nn.size());
      r_sum += hardness[i];
    }
    std::vector<std::size_t> g =
        r_sum > 0.0 ? apportion(budget, hardness)
                    : apportion(budget, std::vector<double>(rows.size(), 1.0));

    if (rows.size() == 1 && budget > 0) ++result.report.singleton_classes;

    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (g[i] == 0) continue;
      std::size_t row_idx = rows[i];
      Rng rng(Rng::mix(config.seed, row_idx));

      // Same-class companions: neighbor-set members first, then any other
      // member of the class, then the sample itself (singleton class).
      std::vector<std::size_t> companions;
      for (std::size_t j : neighbors[query_slot[row_idx]]) {
        if (labels.labels[j] == cls) companions.push_back(j);
      }
      bool from_neighbors = !companions.empty();
      if (!from_neighbors) {
        for (std::size_t j : rows) {
          if (j != row_idx) companions.push_back(j);
        }
      }

      const double* xi = table.row(row_idx);
      std::vector<double> synthetic(table.cols);
      for (std::size_t copy = 0; copy < g[i]; ++copy) {
        std::size_t z = companions.empty() ? row_idx
                                           : companions[rng.uniform_index(companions.size())];
        double lambda = rng.uniform();
        const double* xz = table.row(z);
        for (std::size_t c = 0; c < table.cols; ++c) {
          synthetic[c] = xi[c] + lambda * (xz[c] - xi[c]);
        }
        result.table.append_row(synthetic.data());
        result.labels.labels.push_back(cls);
      }
    }

    entry.synthetic = std::accumulate(g.begin(), g.end(), std::size_t{0});
    entry.final_count = entry.original + entry.synthetic;
    result.report.classes.push_back(entry);
    result.report.per_sample_counts[cls] = std::move(g);
  }
  return result;
}

void write_augment_report_csv(const AugmentReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "class,before,synthetic,after\n";
  for (const auto& entry : report.classes) {
    out << entry.class_name << "," << entry.original << "," << entry.synthetic << ","
        << entry.final_count << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace trailgate
