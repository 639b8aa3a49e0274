#include "trailgate/metrics.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

namespace trailgate {

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

double ConfusionMatrix::accuracy() const {
  std::int64_t trace = 0;
  for (std::size_t i = 0; i < m; ++i) trace += at(i, i);
  std::int64_t n = total();
  return n == 0 ? 0.0 : static_cast<double>(trace) / static_cast<double>(n);
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted,
                          std::size_t m, std::vector<std::string> class_names) {
  if (truth.size() != predicted.size()) throw Error("confusion: length mismatch");
  ConfusionMatrix cm;
  cm.m = m;
  cm.counts.assign(m * m, 0);
  cm.class_names = std::move(class_names);
  if (cm.class_names.empty()) {
    for (std::size_t i = 0; i < m; ++i) cm.class_names.push_back("class" + std::to_string(i));
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    int t = truth[i], p = predicted[i];
    if (t < 0 || p < 0 || static_cast<std::size_t>(t) >= m || static_cast<std::size_t>(p) >= m) {
      throw Error("confusion: class index out of range at sample " + std::to_string(i));
    }
    ++cm.at(static_cast<std::size_t>(t), static_cast<std::size_t>(p));
  }
  return cm;
}

namespace {

MetricSet from_counts(double tp, double tn, double fp, double fn) {
  MetricSet s;
  double n = tp + tn + fp + fn;
  if (n > 0) s.accuracy = (tp + tn) / n;
  if (tp + fn > 0) s.recall = tp / (tp + fn);
  if (fp + tn > 0) {
    s.specificity = tn / (fp + tn);
    s.far = fp / (fp + tn);
  }
  if (tp + fp > 0) s.precision = tp / (tp + fp);
  if (s.precision && s.recall && (*s.precision + *s.recall) > 0) {
    s.f1 = 2.0 / (1.0 / *s.precision + 1.0 / *s.recall);
  } else if (s.precision && s.recall) {
    s.f1 = 0.0;  // both defined but zero
  }
  return s;
}

}  // namespace

MetricSet binary_metrics(const ConfusionMatrix& cm) {
  if (cm.m != 2) throw Error("binary_metrics expects a 2x2 matrix");
  double tp = static_cast<double>(cm.at(1, 1));
  double tn = static_cast<double>(cm.at(0, 0));
  double fp = static_cast<double>(cm.at(0, 1));
  double fn = static_cast<double>(cm.at(1, 0));
  return from_counts(tp, tn, fp, fn);
}

std::map<int, MetricSet> per_class_metrics(const ConfusionMatrix& cm) {
  if (cm.m < 2) throw Error("per_class_metrics expects at least 2 classes");
  std::map<int, MetricSet> out;
  std::int64_t n = cm.total();
  for (std::size_t c = 0; c < cm.m; ++c) {
    std::int64_t tp = cm.at(c, c);
    std::int64_t fp = 0, fn = 0;
    for (std::size_t t = 0; t < cm.m; ++t)
      if (t != c) fp += cm.at(t, c);
    for (std::size_t p = 0; p < cm.m; ++p)
      if (p != c) fn += cm.at(c, p);
    std::int64_t tn = n - tp - fp - fn;
    out[static_cast<int>(c)] = from_counts(static_cast<double>(tp), static_cast<double>(tn),
                                           static_cast<double>(fp), static_cast<double>(fn));
  }
  return out;
}

MacroMetrics macro(const std::map<int, MetricSet>& per_class) {
  if (per_class.empty()) throw Error("macro over an empty metric map");
  MacroMetrics m;
  for (const auto& [cls, set] : per_class) {
    m.macro_f1 += set.f1.value_or(0.0);
    m.macro_far += set.far.value_or(0.0);
  }
  m.macro_f1 /= static_cast<double>(per_class.size());
  m.macro_far /= static_cast<double>(per_class.size());
  return m;
}

void write_confusion_csv(const ConfusionMatrix& cm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "true\\pred";
  for (const auto& name : cm.class_names) out << "," << name;
  out << "\n";
  for (std::size_t t = 0; t < cm.m; ++t) {
    out << cm.class_names[t];
    for (std::size_t p = 0; p < cm.m; ++p) out << "," << cm.at(t, p);
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

ConfusionMatrix read_confusion_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path);
  std::string header;
  if (!std::getline(in, header)) throw IoError("empty confusion file: " + path);
  ConfusionMatrix cm;
  {
    std::stringstream ss(header);
    std::string cell;
    std::getline(ss, cell, ',');  // corner label
    while (std::getline(ss, cell, ',')) cm.class_names.push_back(cell);
  }
  cm.m = cm.class_names.size();
  cm.counts.assign(cm.m * cm.m, 0);
  std::string line;
  std::size_t t = 0;
  while (std::getline(in, line) && t < cm.m) {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');  // row label
    for (std::size_t p = 0; p < cm.m; ++p) {
      std::getline(ss, cell, ',');
      cm.at(t, p) = std::stoll(cell);
    }
    ++t;
  }
  if (t != cm.m) throw IoError("truncated confusion file: " + path);
  return cm;
}

}  // namespace trailgate
