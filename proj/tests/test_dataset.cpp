#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "support/builders.hpp"
#include "support/temp_files.hpp"
#include "trailgate/dataset.hpp"

using namespace trailgate;
using namespace trailgate::testing;

TEST_CASE("parse_nslkdd accepts 42- and 43-column variants and keeps order") {
  TempDir dir("parse");
  std::string content = nslkdd_line("tcp", "http", "SF", "normal", 100, 200, 21) + "\n" +
                        nslkdd_line("udp", "dns", "SF", "neptune", 5, 0) + "\n" +
                        nslkdd_line("icmp", "ecr_i", "REJ", "smurf", 1, 1, 3) + "\n";
  auto records = parse_nslkdd(write_file(dir.file("mixed.txt"), content));
  REQUIRE(records.size() == 3);
  CHECK(records[0].label == "normal");
  CHECK(records[0].difficulty == 21);
  CHECK(!records[1].difficulty.has_value());
  CHECK(records[2].values[1] == "icmp");
  CHECK(records[0].values.size() == kNumFeatures);
}

TEST_CASE("parse_nslkdd on an empty file yields an empty list") {
  TempDir dir("parse_empty");
  CHECK(parse_nslkdd(write_file(dir.file("empty.txt"), "")).empty());
}

TEST_CASE("parse_nslkdd reports the offending line on a bad field count") {
  TempDir dir("parse_bad");
  std::string content = nslkdd_line("tcp", "http", "SF", "normal") + "\n" + "1,2,3\n";
  try {
    parse_nslkdd(write_file(dir.file("bad.txt"), content));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("parse_nslkdd propagates I/O failures") {
  CHECK_THROWS_AS(parse_nslkdd("/nonexistent/file.txt"), IoError);
}

TEST_CASE("fit_schema assigns lexicographic codes and training extremes") {
  TempDir dir("schema");
  std::string content = nslkdd_line("udp", "http", "SF", "normal", 10, 50) + "\n" +
                        nslkdd_line("tcp", "dns", "SF", "normal", 30, 10) + "\n" +
                        nslkdd_line("icmp", "http", "REJ", "neptune", 20, 90) + "\n";
  auto records = parse_nslkdd(write_file(dir.file("train.txt"), content));
  Schema schema = fit_schema(records);

  CHECK(schema.dictionaries[1] ==
        std::map<std::string, int>{{"icmp", 0}, {"tcp", 1}, {"udp", 2}});
  CHECK(schema.scale_params[4] == std::pair(10.0, 30.0));  // src_bytes
  CHECK(schema.scale_params[5] == std::pair(10.0, 90.0));  // dst_bytes

  std::size_t discrete = 0;
  for (FeatureKind k : schema.kinds) discrete += k == FeatureKind::discrete;
  CHECK(discrete == 3);
  CHECK(schema.kinds.size() == 41);

  // A column constant in training keeps min == max.
  CHECK(schema.scale_params[0].first == schema.scale_params[0].second);
}

TEST_CASE("fit_schema rejects non-numeric continuous values with context") {
  RawRecord rec;
  rec.values.assign(kNumFeatures, "0");
  rec.values[0] = "oops";
  rec.label = "normal";
  try {
    fit_schema({rec});
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("duration") != std::string::npos);
    CHECK(std::string(e.what()).find("row 0") != std::string::npos);
  }
}

TEST_CASE("encode_and_scale applies the min-max formula") {
  TempDir dir("scale");
  std::string content = nslkdd_line("tcp", "http", "SF", "normal", 0, 0) + "\n" +
                        nslkdd_line("tcp", "http", "SF", "normal", 5, 2) + "\n" +
                        nslkdd_line("tcp", "http", "SF", "normal", 10, 4) + "\n";
  auto records = parse_nslkdd(write_file(dir.file("t.txt"), content));
  Schema schema = fit_schema(records);
  FeatureTable table = encode_and_scale(records, schema);

  CHECK(table.at(0, 4) == doctest::Approx(0.0));
  CHECK(table.at(1, 4) == doctest::Approx(0.5));  // (5-0)/(10-0)
  CHECK(table.at(2, 4) == doctest::Approx(1.0));
  // Constant columns (protocol here has one category) scale to 0.
  CHECK(table.at(0, 1) == 0.0);

  for (double v : table.data) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("encoding clips test-time values and maps unseen categories to code k") {
  TempDir dir("clip");
  std::string train = nslkdd_line("tcp", "http", "SF", "normal", 0, 0) + "\n" +
                      nslkdd_line("udp", "dns", "SF", "normal", 10, 10) + "\n";
  auto train_records = parse_nslkdd(write_file(dir.file("train.txt"), train));
  Schema schema = fit_schema(train_records);

  std::string test = nslkdd_line("icmp", "http", "SF", "normal", 50, -3) + "\n";
  auto test_records = parse_nslkdd(write_file(dir.file("test.txt"), test));
  EncodeStats stats;
  FeatureTable table = encode_and_scale(test_records, schema, &stats);

  CHECK(table.at(0, 1) == 1.0);  // unseen protocol -> code 2, clipped to 1
  CHECK(table.at(0, 4) == 1.0);  // 50 above the training max
  CHECK(table.at(0, 5) == 0.0);  // -3 below the training min
  CHECK(stats.unseen_categories == 1);
  CHECK(stats.clipped_values >= 2);
}

TEST_CASE("discrete codes decode back to the training categories") {
  TempDir dir("roundtrip");
  std::string content = nslkdd_line("tcp", "http", "SF", "normal") + "\n" +
                        nslkdd_line("udp", "dns", "REJ", "neptune") + "\n" +
                        nslkdd_line("icmp", "ftp", "S0", "smurf") + "\n";
  auto records = parse_nslkdd(write_file(dir.file("t.txt"), content));
  Schema schema = fit_schema(records);

  for (std::size_t f : {1u, 2u, 3u}) {
    const auto& dict = schema.dictionaries[f];
    for (std::size_t r = 0; r < records.size(); ++r) {
      int code = dict.at(records[r].values[f]);
      auto match = std::find_if(dict.begin(), dict.end(),
                                [&](const auto& kv) { return kv.second == code; });
      CHECK(match->first == records[r].values[f]);
    }
    // Codes are 0..k-1 with no gaps.
    std::set<int> codes;
    for (const auto& [cat, code] : dict) codes.insert(code);
    CHECK(*codes.begin() == 0);
    CHECK(*codes.rbegin() == static_cast<int>(dict.size()) - 1);
  }
}

TEST_CASE("map_labels follows the attack family table") {
  RawRecord a, b, c, d;
  a.values.assign(kNumFeatures, "0");
  a.label = "neptune";
  b = a;
  b.label = "normal";
  c = a;
  c.label = "httptunnel";
  d = a;
  d.label = "sqlattack";

  LabelVector multi = map_labels({a, b, c, d}, LabelScheme::multi5);
  CHECK(multi.labels == std::vector<int>{1, 0, 4, 3});  // DoS, Normal, R2L, U2R

  LabelVector binary = map_labels({a, b, c, d}, LabelScheme::binary);
  CHECK(binary.labels == std::vector<int>{1, 0, 1, 1});
}

TEST_CASE("map_labels is total over the 40 documented names") {
  CHECK(attack_family_map().size() == 40);  // 39 attacks + normal
  std::vector<RawRecord> records;
  for (const auto& [name, family] : attack_family_map()) {
    RawRecord rec;
    rec.values.assign(kNumFeatures, "0");
    rec.label = name;
    records.push_back(rec);
  }
  CHECK_NOTHROW(map_labels(records, LabelScheme::multi5));
  CHECK_NOTHROW(map_labels(records, LabelScheme::binary));
}

TEST_CASE("unknown sub-types error unless unknown_as_attack in binary") {
  RawRecord rec;
  rec.values.assign(kNumFeatures, "0");
  rec.label = "mystery_attack";
  CHECK_THROWS_AS(map_labels({rec}, LabelScheme::binary), SchemaError);
  CHECK_THROWS_AS(map_labels({rec}, LabelScheme::multi5, true), SchemaError);
  LabelVector lenient = map_labels({rec}, LabelScheme::binary, true);
  CHECK(lenient.labels == std::vector<int>{kBinaryAttack});
}

TEST_CASE("split_train_validation counts and determinism") {
  std::vector<std::vector<double>> rows;
  std::vector<int> ys;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({static_cast<double>(i)});
    ys.push_back(i % 2);
  }
  FeatureTable table = make_table(rows);
  LabelVector labels = make_labels(ys, 2);

  Split split = split_train_validation(table, labels, 0.7, 99);
  CHECK(split.train_table.rows == 7);
  CHECK(split.validation_table.rows == 3);

  Split again = split_train_validation(table, labels, 0.7, 99);
  CHECK(split.train_indices == again.train_indices);
  CHECK(split.validation_indices == again.validation_indices);

  // Partition property: every index exactly once.
  std::set<std::size_t> all(split.train_indices.begin(), split.train_indices.end());
  all.insert(split.validation_indices.begin(), split.validation_indices.end());
  CHECK(all.size() == 10);

  CHECK_THROWS_AS(split_train_validation(make_table({{1.0}}), make_labels({0}, 2), 0.5, 1),
                  Error);
}

TEST_CASE("train/validation row arithmetic matches ceil(ratio * n)") {
  // ceil(0.7 * 125973) = 88182 -- checked in miniature with the same formula.
  CHECK(static_cast<std::size_t>(std::ceil(0.7 * 125973.0)) == 88182);
  CHECK(125973 - 88182 == 37791);
}

TEST_CASE("feature table cache round-trips bit-exactly") {
  TempDir dir("cache");
  std::string content = nslkdd_line("tcp", "http", "SF", "normal", 3, 7) + "\n" +
                        nslkdd_line("udp", "dns", "REJ", "neptune", 1, 9) + "\n";
  auto records = parse_nslkdd(write_file(dir.file("t.txt"), content));
  Schema schema = fit_schema(records);
  FeatureTable table = encode_and_scale(records, schema);

  save_table(table, dir.file("cache.tgft"));
  FeatureTable loaded = load_table(dir.file("cache.tgft"));

  CHECK(loaded.rows == table.rows);
  CHECK(loaded.cols == table.cols);
  CHECK(loaded.data == table.data);  // bit-exact
  CHECK(loaded.schema.names == table.schema.names);
  CHECK(loaded.schema.dictionaries == table.schema.dictionaries);
  CHECK(loaded.schema.scale_params == table.schema.scale_params);
}

TEST_CASE("select_columns keeps order and schema subset") {
  FeatureTable t = make_table({{1, 2, 3}, {4, 5, 6}});
  FeatureTable sub = t.select_columns({2, 0});
  CHECK(sub.cols == 2);
  CHECK(sub.at(0, 0) == 3);
  CHECK(sub.at(0, 1) == 1);
  CHECK(sub.at(1, 0) == 6);
  CHECK(sub.schema.names == std::vector<std::string>{"f2", "f0"});
}
