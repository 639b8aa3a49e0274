#include "trailgate/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace trailgate {

namespace {

const char* kFeatureNames[kNumFeatures] = {
    "duration", "protocol_type", "service", "flag", "src_bytes", "dst_bytes", "land",
    "wrong_fragment", "urgent", "hot", "num_failed_logins", "logged_in", "num_compromised",
    "root_shell", "su_attempted", "num_root", "num_file_creations", "num_shells",
    "num_access_files", "num_outbound_cmds", "is_host_login", "is_guest_login", "count",
    "srv_count", "serror_rate", "srv_serror_rate", "rerror_rate", "srv_rerror_rate",
    "same_srv_rate", "diff_srv_rate", "srv_diff_host_rate", "dst_host_count",
    "dst_host_srv_count", "dst_host_same_srv_rate", "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate", "dst_host_srv_diff_host_rate", "dst_host_serror_rate",
    "dst_host_srv_serror_rate", "dst_host_rerror_rate", "dst_host_srv_rerror_rate"};

// protocol_type, service, flag
const std::set<std::size_t> kDiscreteIndices = {1, 2, 3};

std::map<std::string, std::string> build_family_map() {
  std::map<std::string, std::string> m;
  auto add = [&m](const std::string& family, std::initializer_list<const char*> subs) {
    for (const char* s : subs) m[s] = family;
  };
  m["normal"] = "Normal";
  add("DoS", {"pod", "land", "teardrop", "neptune", "back", "smurf", "mailbomb", "processtable",
              "udpstorm", "apache2", "worm"});
  add("Probe", {"portsweep", "ipsweep", "satan", "nmap", "saint", "mscan"});
  add("R2L", {"multihop", "ftp_write", "warezmaster", "phf", "guess_passwd", "spy", "imap",
              "warezclient", "xlock", "xsnoop", "snmpguess", "snmpgetattack", "sendmail",
              "named", "httptunnel"});
  add("U2R", {"buffer_overflow", "rootkit", "loadmodule", "perl", "sqlattack", "xterm", "ps"});
  return m;
}

double parse_numeric(const std::string& text, std::size_t feature, std::size_t row,
                     const std::string& name) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    throw SchemaError("non-numeric value '" + text + "' in continuous feature '" + name +
                      "' (feature " + std::to_string(feature) + ", row " + std::to_string(row) +
                      ")");
  }
  return v;
}

}  // namespace

const std::vector<std::string>& binary_class_names() {
  static const std::vector<std::string> names = {"normal", "attack"};
  return names;
}

const std::vector<std::string>& multi5_class_names() {
  static const std::vector<std::string> names = {"Normal", "DoS", "Probe", "U2R", "R2L"};
  return names;
}

const std::vector<std::string>& nslkdd_feature_names() {
  static const std::vector<std::string> names(kFeatureNames, kFeatureNames + kNumFeatures);
  return names;
}

const std::vector<FeatureKind>& nslkdd_feature_kinds() {
  static const std::vector<FeatureKind> kinds = [] {
    std::vector<FeatureKind> k(kNumFeatures, FeatureKind::continuous);
    for (std::size_t i : kDiscreteIndices) k[i] = FeatureKind::discrete;
    return k;
  }();
  return kinds;
}

const std::map<std::string, std::string>& attack_family_map() {
  static const std::map<std::string, std::string> m = build_family_map();
  return m;
}

FeatureTable FeatureTable::select_columns(const std::vector<std::size_t>& indices) const {
  FeatureTable out;
  out.rows = rows;
  out.cols = indices.size();
  out.data.resize(rows * indices.size());
  out.schema.names.reserve(indices.size());
  for (std::size_t c : indices) {
    out.schema.names.push_back(schema.names[c]);
    out.schema.kinds.push_back(schema.kinds[c]);
    out.schema.dictionaries.push_back(schema.dictionaries[c]);
    out.schema.scale_params.push_back(schema.scale_params[c]);
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const double* src = row(r);
    double* dst = out.data.data() + r * out.cols;
    for (std::size_t j = 0; j < indices.size(); ++j) dst[j] = src[indices[j]];
  }
  return out;
}

std::vector<double> FeatureTable::column(std::size_t c) const {
  std::vector<double> col(rows);
  for (std::size_t r = 0; r < rows; ++r) col[r] = at(r, c);
  return col;
}

void FeatureTable::append_row(const double* values) {
  data.insert(data.end(), values, values + cols);
  ++rows;
}

std::vector<RawRecord> parse_nslkdd(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);

  std::vector<RawRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<std::string> fields;
    fields.reserve(kNumFeatures + 2);
    std::size_t start = 0;
    for (;;) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }

    if (fields.size() != kNumFeatures + 1 && fields.size() != kNumFeatures + 2) {
      throw ParseError("expected 42 or 43 comma-separated fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }

    RawRecord rec;
    rec.values.assign(fields.begin(), fields.begin() + kNumFeatures);
    rec.label = fields[kNumFeatures];
    // Labels sometimes carry a trailing '.' in KDD-derived dumps.
    if (!rec.label.empty() && rec.label.back() == '.') rec.label.pop_back();
    if (rec.label.empty()) throw ParseError("empty label", line_no);
    if (fields.size() == kNumFeatures + 2) {
      const std::string& d = fields[kNumFeatures + 1];
      int value = 0;
      auto [p, ec] = std::from_chars(d.data(), d.data() + d.size(), value);
      if (ec != std::errc() || p != d.data() + d.size()) {
        throw ParseError("malformed difficulty column '" + d + "'", line_no);
      }
      rec.difficulty = value;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

Schema fit_schema(const std::vector<RawRecord>& records) {
  if (records.empty()) throw SchemaError("cannot fit a schema on an empty record list");

  Schema schema;
  schema.names = nslkdd_feature_names();
  schema.kinds = nslkdd_feature_kinds();
  schema.dictionaries.resize(kNumFeatures);
  schema.scale_params.assign(kNumFeatures, {0.0, 0.0});

  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    if (schema.kinds[f] == FeatureKind::discrete) {
      std::set<std::string> categories;
      for (const RawRecord& rec : records) categories.insert(rec.values[f]);
      int code = 0;
      for (const std::string& cat : categories) schema.dictionaries[f][cat] = code++;
      schema.scale_params[f] = {0.0, static_cast<double>(code - 1)};
    } else {
      double lo = 0.0, hi = 0.0;
      for (std::size_t r = 0; r < records.size(); ++r) {
        double v = parse_numeric(records[r].values[f], f, r, schema.names[f]);
        if (r == 0) {
          lo = hi = v;
        } else {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      schema.scale_params[f] = {lo, hi};
    }
  }
  return schema;
}

FeatureTable encode_and_scale(const std::vector<RawRecord>& records, const Schema& schema,
                              EncodeStats* stats) {
  FeatureTable table;
  table.schema = schema;
  table.rows = records.size();
  table.cols = schema.num_features();
  table.data.resize(table.rows * table.cols);

  EncodeStats local;
  for (std::size_t r = 0; r < records.size(); ++r) {
    double* out = table.data.data() + r * table.cols;
    for (std::size_t f = 0; f < table.cols; ++f) {
      double raw;
      if (schema.kinds[f] == FeatureKind::discrete) {
        const auto& dict = schema.dictionaries[f];
        auto it = dict.find(records[r].values[f]);
        if (it == dict.end()) {
          // Unseen test category: code k, clipped to 1 by scaling below.
          raw = static_cast<double>(dict.size());
          ++local.unseen_categories;
        } else {
          raw = static_cast<double>(it->second);
        }
      } else {
        raw = parse_numeric(records[r].values[f], f, r, schema.names[f]);
      }
      auto [lo, hi] = schema.scale_params[f];
      double scaled;
      if (hi <= lo) {
        scaled = 0.0;  // constant training column
      } else {
        scaled = (raw - lo) / (hi - lo);
        if (scaled < 0.0 || scaled > 1.0) ++local.clipped_values;
        scaled = std::clamp(scaled, 0.0, 1.0);
      }
      out[f] = scaled;
    }
  }
  if (stats) *stats = local;
  return table;
}

LabelVector map_labels(const std::vector<RawRecord>& records, LabelScheme scheme,
                       bool unknown_as_attack) {
  LabelVector out;
  out.scheme = scheme;
  out.class_names = scheme == LabelScheme::binary ? binary_class_names() : multi5_class_names();
  out.labels.reserve(records.size());

  const auto& families = attack_family_map();
  const auto& multi_names = multi5_class_names();

  for (std::size_t r = 0; r < records.size(); ++r) {
    auto it = families.find(records[r].label);
    if (it == families.end()) {
      if (unknown_as_attack && scheme == LabelScheme::binary) {
        out.labels.push_back(kBinaryAttack);
        continue;
      }
      throw SchemaError("unknown attack sub-type '" + records[r].label + "' at row " +
                        std::to_string(r));
    }
    if (scheme == LabelScheme::binary) {
      out.labels.push_back(it->second == "Normal" ? kBinaryNormal : kBinaryAttack);
    } else {
      auto pos = std::find(multi_names.begin(), multi_names.end(), it->second);
      out.labels.push_back(static_cast<int>(pos - multi_names.begin()));
    }
  }
  return out;
}

Split split_train_validation(const FeatureTable& table, const LabelVector& labels, double ratio,
                             std::uint64_t seed) {
  if (table.rows < 2) throw Error("split requires at least 2 rows");
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error("split ratio must lie in (0, 1)");
  if (labels.size() != table.rows) throw Error("labels/table row count mismatch");

  std::vector<std::size_t> perm(table.rows);
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  Rng rng(seed);
  rng.shuffle(perm);

  std::size_t n_train = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(table.rows)));
  n_train = std::min(n_train, table.rows - 1);

  Split split;
  split.train_indices.assign(perm.begin(), perm.begin() + n_train);
  split.validation_indices.assign(perm.begin() + n_train, perm.end());

  auto gather = [&](const std::vector<std::size_t>& idx, FeatureTable& t, LabelVector& l) {
    t.schema = table.schema;
    t.cols = table.cols;
    t.rows = idx.size();
    t.data.resize(t.rows * t.cols);
    l.scheme = labels.scheme;
    l.class_names = labels.class_names;
    l.labels.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const double* src = table.row(idx[i]);
      std::copy(src, src + table.cols, t.data.data() + i * t.cols);
      l.labels[i] = labels.labels[idx[i]];
    }
  };
  gather(split.train_indices, split.train_table, split.train_labels);
  gather(split.validation_indices, split.validation_table, split.validation_labels);
  return split;
}

namespace {
constexpr char kTableMagic[4] = {'T', 'G', 'F', 'T'};
constexpr std::uint32_t kTableVersion = 1;
}  // namespace

void save_table(const FeatureTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out.write(kTableMagic, 4);
  write_u32(out, kTableVersion);
  write_u32(out, static_cast<std::uint32_t>(table.cols));
  for (std::size_t f = 0; f < table.cols; ++f) {
    write_string(out, table.schema.names[f]);
    write_u32(out, table.schema.kinds[f] == FeatureKind::discrete ? 1 : 0);
    const auto& dict = table.schema.dictionaries[f];
    write_u32(out, static_cast<std::uint32_t>(dict.size()));
    for (const auto& [cat, code] : dict) {
      write_string(out, cat);
      write_u32(out, static_cast<std::uint32_t>(code));
    }
    write_f64(out, table.schema.scale_params[f].first);
    write_f64(out, table.schema.scale_params[f].second);
  }
  write_u64(out, table.rows);
  for (double v : table.data) write_f64(out, v);
  if (!out) throw IoError("write failed: " + path);
}

FeatureTable load_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kTableMagic, 4) != 0) {
    throw IoError("not a feature-table file: " + path);
  }
  std::uint32_t version = read_u32(in);
  if (version != kTableVersion) {
    throw IoError("unsupported feature-table version " + std::to_string(version));
  }
  FeatureTable table;
  table.cols = read_u32(in);
  table.schema.names.resize(table.cols);
  table.schema.kinds.resize(table.cols);
  table.schema.dictionaries.resize(table.cols);
  table.schema.scale_params.resize(table.cols);
  for (std::size_t f = 0; f < table.cols; ++f) {
    table.schema.names[f] = read_string(in);
    table.schema.kinds[f] = read_u32(in) == 1 ? FeatureKind::discrete : FeatureKind::continuous;
    std::uint32_t dict_size = read_u32(in);
    for (std::uint32_t i = 0; i < dict_size; ++i) {
      std::string cat = read_string(in);
      table.schema.dictionaries[f][cat] = static_cast<int>(read_u32(in));
    }
    double lo = read_f64(in);
    double hi = read_f64(in);
    table.schema.scale_params[f] = {lo, hi};
  }
  table.rows = read_u64(in);
  table.data.resize(table.rows * table.cols);
  for (double& v : table.data) v = read_f64(in);
  return table;
}

}  // namespace trailgate
