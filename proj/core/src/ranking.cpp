#include "trailgate/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

namespace trailgate {

namespace {

double plogp_sum(std::span<const std::size_t> counts, double total) {
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

double entropy_of_counts(std::span<const std::size_t> counts, std::size_t total) {
  if (total == 0) return 0.0;
  return plogp_sum(counts, static_cast<double>(total));
}

double entropy(const LabelVector& labels) {
  if (labels.labels.empty()) throw Error("entropy of an empty label vector");
  std::vector<std::size_t> counts(labels.num_classes(), 0);
  for (int y : labels.labels) ++counts[static_cast<std::size_t>(y)];
  return entropy_of_counts(counts, labels.size());
}

double info_gain_discrete(std::span<const double> column, const LabelVector& labels) {
  if (column.size() != labels.size()) throw Error("info_gain_discrete: length mismatch");
  const std::size_t m = labels.num_classes();

  // Group by exact value.
  std::map<double, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < column.size(); ++i) {
    auto it = groups.find(column[i]);
    if (it == groups.end()) it = groups.emplace(column[i], std::vector<std::size_t>(m, 0)).first;
    ++it->second[static_cast<std::size_t>(labels.labels[i])];
  }

  double h_y = entropy(labels);
  double conditional = 0.0;
  double n = static_cast<double>(column.size());
  for (const auto& [value, counts] : groups) {
    std::size_t group_n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    conditional += (static_cast<double>(group_n) / n) * entropy_of_counts(counts, group_n);
  }
  double gain = h_y - conditional;
  return gain < 0.0 ? 0.0 : gain;  // clamp float dust
}

ContinuousGain info_gain_continuous(std::span<const double> column, const LabelVector& labels) {
  if (column.size() != labels.size()) throw Error("info_gain_continuous: length mismatch");
  const std::size_t n = column.size();
  const std::size_t m = labels.num_classes();

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return column[a] < column[b];
  });

  ContinuousGain best;
  best.threshold = std::numeric_limits<double>::quiet_NaN();
  double lo = column[idx.front()];
  double hi = column[idx.back()];
  if (lo == hi) return best;  // constant column

  double h_y = entropy(labels);
  std::vector<std::size_t> below(m, 0);
  std::vector<std::size_t> above(m, 0);
  for (int y : labels.labels) ++above[static_cast<std::size_t>(y)];

  double total = static_cast<double>(n);
  std::size_t n_below = 0;
  bool have_candidate = false;
  for (std::size_t p = 1; p < n; ++p) {
    std::size_t moved = static_cast<std::size_t>(labels.labels[idx[p - 1]]);
    ++below[moved];
    --above[moved];
    ++n_below;
    double prev = column[idx[p - 1]];
    double next = column[idx[p]];
    if (prev == next) continue;  // only distinct adjacent pairs yield candidates
    double t = (prev + next) / 2.0;
    if (t == lo || t == hi) continue;  // pseudo-code drops extremes
    double h_below = entropy_of_counts(below, n_below);
    double h_above = entropy_of_counts(above, n - n_below);
    double conditional = (static_cast<double>(n_below) / total) * h_below +
                         (static_cast<double>(n - n_below) / total) * h_above;
    double gain = h_y - conditional;
    if (!have_candidate || gain > best.gain) {
      best.gain = gain;
      best.threshold = t;  // ties keep the lowest threshold
      have_candidate = true;
    }
  }
  if (best.gain < 0.0) best.gain = 0.0;
  return best;
}

FeatureRanking rank_features(const FeatureTable& table, const LabelVector& labels) {
  if (table.rows == 0) throw Error("rank_features on an empty table");
  if (labels.size() != table.rows) throw Error("rank_features: labels/table mismatch");

  const std::size_t d = table.cols;
  FeatureRanking ranking;
  ranking.gains.assign(d, 0.0);
  ranking.thresholds.assign(d, std::numeric_limits<double>::quiet_NaN());

  std::vector<double> col;
  for (std::size_t f = 0; f < d; ++f) {
    col = table.column(f);
    if (table.schema.kinds[f] == FeatureKind::discrete) {
      ranking.gains[f] = info_gain_discrete(col, labels);
    } else {
      ContinuousGain g = info_gain_continuous(col, labels);
      ranking.gains[f] = g.gain;
      ranking.thresholds[f] = g.threshold;
    }
  }

  ranking.order.resize(d);
  std::iota(ranking.order.begin(), ranking.order.end(), 0);
  std::stable_sort(ranking.order.begin(), ranking.order.end(), [&](std::size_t a, std::size_t b) {
    if (ranking.gains[a] != ranking.gains[b]) return ranking.gains[a] > ranking.gains[b];
    return a < b;
  });
  return ranking;
}

double pcc(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("pcc: length mismatch");
  if (a.size() < 2) throw Error("pcc needs at least 2 samples");
  double n = static_cast<double>(a.size());
  double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double da = a[i] - mean_a;
    double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) return 0.0;  // constant column correlates with nothing
  return cov / std::sqrt(var_a * var_b);
}

Matrix pcc_matrix(const FeatureTable& table) {
  const std::size_t d = table.cols;
  Matrix m(d, d, 0.0);
  std::vector<std::vector<double>> cols(d);
  for (std::size_t f = 0; f < d; ++f) cols[f] = table.column(f);
  for (std::size_t i = 0; i < d; ++i) {
    m(i, i) = 1.0;
    for (std::size_t j = i + 1; j < d; ++j) {
      double r = pcc(cols[i], cols[j]);
      m(i, j) = r;
      m(j, i) = r;
    }
  }
  return m;
}

std::vector<std::size_t> prune_redundant(FeatureRanking& ranking, const FeatureTable& table,
                                         double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw Error("pcc threshold must lie in (0, 1]");
  ranking.pcc_matrix = pcc_matrix(table);

  std::vector<bool> dropped(table.cols, false);
  for (std::size_t i = 0; i < ranking.order.size(); ++i) {
    std::size_t keeper = ranking.order[i];
    if (dropped[keeper]) continue;
    for (std::size_t j = i + 1; j < ranking.order.size(); ++j) {
      std::size_t candidate = ranking.order[j];
      if (dropped[candidate]) continue;
      if (std::abs(ranking.pcc_matrix(keeper, candidate)) > threshold) {
        dropped[candidate] = true;  // lower gain by order position
      }
    }
  }

  ranking.survivors.clear();
  for (std::size_t f : ranking.order) {
    if (!dropped[f]) ranking.survivors.push_back(f);
  }
  return ranking.survivors;
}

void write_ranking_csv(const FeatureRanking& ranking, const Schema& schema,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "feature,kind,gain,threshold,rank,survived\n";
  const std::size_t d = schema.num_features();
  std::vector<std::size_t> rank_of(d, 0);
  for (std::size_t r = 0; r < ranking.order.size(); ++r) rank_of[ranking.order[r]] = r + 1;
  std::vector<bool> survived(d, false);
  for (std::size_t f : ranking.survivors) survived[f] = true;
  out.precision(17);
  for (std::size_t f = 0; f < d; ++f) {
    out << schema.names[f] << ","
        << (schema.kinds[f] == FeatureKind::discrete ? "discrete" : "continuous") << ","
        << ranking.gains[f] << ",";
    if (!std::isnan(ranking.thresholds[f])) out << ranking.thresholds[f];
    out << "," << rank_of[f] << "," << (survived[f] ? "yes" : "no") << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace trailgate
