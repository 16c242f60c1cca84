#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "npc/csv.hpp"
#include "npc/dataset.hpp"
#include "npc/error.hpp"
#include "test_support.hpp"

using namespace npc;
using npc::test::scratch_dir;
using npc::test::write_file;

TEST_CASE("load_csv parses a toy file with the generic schema") {
  const auto dir = scratch_dir("toy");
  write_file(dir / "toy.csv", "a,b,y\n1,2,A\n3,4,B\n");
  const Dataset ds = load_csv(dir / "toy.csv", CsvSchema::generic("y"));
  CHECK(ds.size() == 2);
  CHECK(ds.dim() == 2);
  CHECK(ds.features(0, 0) == 1.0);
  CHECK(ds.features(0, 1) == 2.0);
  CHECK(ds.features(1, 0) == 3.0);
  CHECK(ds.features(1, 1) == 4.0);
  CHECK(ds.labels == std::vector<int>{0, 1});
  CHECK(ds.class_names == std::vector<std::string>{"A", "B"});
  CHECK(ds.feature_names == std::vector<std::string>{"a", "b"});
}

TEST_CASE("load_csv rejects a NaN cell and names it") {
  const auto dir = scratch_dir("nan");
  write_file(dir / "bad.csv", "a,b,y\n1,2,A\n3,NaN,B\n");
  try {
    (void)load_csv(dir / "bad.csv", CsvSchema::generic("y"));
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("'b'") != std::string::npos);
  }
}

TEST_CASE("load_csv error cases") {
  const auto dir = scratch_dir("load_errors");
  CHECK_THROWS_AS((void)load_csv(dir / "missing.csv", CsvSchema::generic("y")), IoError);

  write_file(dir / "nolabel.csv", "a,b\n1,2\n");
  CHECK_THROWS_AS((void)load_csv(dir / "nolabel.csv", CsvSchema::generic("y")), DataError);

  write_file(dir / "text.csv", "a,y\nhello,A\n2,B\n");
  CHECK_THROWS_AS((void)load_csv(dir / "text.csv", CsvSchema::generic("y")), DataError);

  write_file(dir / "ragged.csv", "a,y\n1,A,extra\n2,B\n");
  CHECK_THROWS((void)load_csv(dir / "ragged.csv", CsvSchema::generic("y")));

  // The CTG layout needs every declared column and only the declared labels.
  write_file(dir / "short.csv", "LB,NSP\n120,1\n");
  CHECK_THROWS_AS((void)load_csv(dir / "short.csv", CsvSchema::ctg()), DataError);

  const Dataset synth = synthetic_ctg_like(5, {10, 5, 5});
  write_csv(dir / "ctg.csv", synth, CsvSchema::ctg());
  std::string text = test::read_file(dir / "ctg.csv");
  const auto last_comma = text.rfind(',');
  text.replace(last_comma + 1, 1, "7");
  write_file(dir / "badlabel.csv", text);
  CHECK_THROWS_AS((void)load_csv(dir / "badlabel.csv", CsvSchema::ctg()), DataError);

  write_file(dir / "oneclass.csv", "a,y\n1,A\n2,A\n");
  CHECK_THROWS_AS((void)load_csv(dir / "oneclass.csv", CsvSchema::generic("y")), DataError);
}

TEST_CASE("CTG-shaped synthetic data round-trips through the CTG layout") {
  const auto dir = scratch_dir("ctg_roundtrip");
  const Dataset synth = synthetic_ctg_like(11);
  write_csv(dir / "ctg.csv", synth, CsvSchema::ctg());
  const Dataset back = load_csv(dir / "ctg.csv", CsvSchema::ctg());
  CHECK(back.size() == 2126);
  CHECK(back.dim() == 21);
  CHECK(back.num_classes() == 3);
  CHECK(back.class_counts() == std::vector<std::size_t>{1655, 295, 176});
  CHECK(back.labels == synth.labels);
  CHECK(back.features == synth.features);
}

TEST_CASE("standardize: two-point column, idempotence, constant column") {
  Dataset ds;
  ds.features = Matrix(2, 2);
  ds.features(0, 0) = 0.0;
  ds.features(1, 0) = 2.0;
  ds.features(0, 1) = 5.0;
  ds.features(1, 1) = 5.0;
  ds.labels = {0, 1};
  ds.feature_names = {"x", "c"};
  ds.class_names = {"A", "B"};

  // Sample standard deviation with n − 1: [0, 2] has std √2, so the scores are ∓1/√2.
  auto [z, params] = standardize(ds);
  REQUIRE(z.dim() == 1);
  CHECK(z.features(0, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(z.features(1, 0) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK(params.means[0] == 1.0);
  CHECK(params.stds[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(params.dropped == std::vector<std::string>{"c"});
  CHECK(z.feature_names == std::vector<std::string>{"x"});

  Rng rng(3);
  Dataset wide = test::blobs(rng, 50, 4, 2);
  auto [once, p1] = standardize(wide);
  auto [twice, p2] = standardize(once);
  CHECK(test::max_abs_diff(once.features, twice.features) <= 1e-12);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(std::abs(p2.means[j]) <= 1e-12);
    CHECK(std::abs(p2.stds[j] - 1.0) <= 1e-12);
  }
}

TEST_CASE("standardize: three-row constant column reduces the dimension") {
  Dataset ds;
  ds.features = Matrix(3, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    ds.features(i, 0) = static_cast<double>(i);
    ds.features(i, 1) = 5.0;
  }
  ds.labels = {0, 1, 0};
  ds.feature_names = {"x", "c"};
  ds.class_names = {"A", "B"};
  auto [z, params] = standardize(ds);
  CHECK(z.dim() == 1);
  CHECK(params.kept == std::vector<std::size_t>{0});
  // [0, 1, 2] has mean 1 and n − 1 standard deviation 1.
  CHECK(z.features(0, 0) == -1.0);
  CHECK(z.features(1, 0) == 0.0);
  CHECK(z.features(2, 0) == 1.0);
  // Applying the parameters to the training rows reproduces the output exactly.
  CHECK(params.apply(ds).features == z.features);
  // apply() maps new rows with the training parameters.
  const Vector mapped = params.apply(std::vector<double>{3.0, 9.0});
  REQUIRE(mapped.size() == 1);
  CHECK(mapped[0] == 2.0);
}

TEST_CASE("stratified_split with explicit CTG counts") {
  const Dataset data = synthetic_ctg_like(2);
  Rng rng(17);
  const Split s = stratified_split(data, SplitSpec{std::nullopt, {1153, 205, 130}}, rng);
  CHECK(s.train.size() == 1488);
  CHECK(s.test.size() == 638);
  CHECK(s.train.class_counts() == std::vector<std::size_t>{1153, 205, 130});
  CHECK(s.test.class_counts() == std::vector<std::size_t>{502, 90, 46});

  // train ∪ test is a permutation of the input and rows carry their labels.
  std::vector<std::size_t> all = s.train_rows;
  all.insert(all.end(), s.test_rows.begin(), s.test_rows.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expected(data.size());
  std::iota(expected.begin(), expected.end(), 0);
  CHECK(all == expected);
  CHECK(std::is_sorted(s.test_rows.begin(), s.test_rows.end()));
  for (std::size_t i = 0; i < s.train_rows.size(); ++i) CHECK(s.train.labels[i] == data.labels[s.train_rows[i]]);
  for (std::size_t i = 0; i < s.test_rows.size(); ++i) CHECK(s.test.labels[i] == data.labels[s.test_rows[i]]);
}

TEST_CASE("stratified_split by fraction on an even toy set") {
  Dataset ds;
  ds.features = Matrix(8, 1);
  for (std::size_t i = 0; i < 8; ++i) {
    ds.features(i, 0) = static_cast<double>(i);
    ds.labels.push_back(i < 4 ? 0 : 1);
  }
  ds.feature_names = {"x"};
  ds.class_names = {"A", "B"};
  Rng rng(1);
  SplitSpec spec;
  spec.train_fraction = 0.5;
  const Split s = stratified_split(ds, spec, rng);
  CHECK(s.train.class_counts() == std::vector<std::size_t>{2, 2});
  CHECK(s.test.class_counts() == std::vector<std::size_t>{2, 2});
}

TEST_CASE("stratified_split: seeds change the sets but not the counts") {
  const Dataset data = synthetic_ctg_like(4, {60, 30, 20});
  const SplitSpec spec{std::nullopt, {40, 20, 10}};
  Rng a(1), b(2), a2(1);
  const Split sa = stratified_split(data, spec, a);
  const Split sb = stratified_split(data, spec, b);
  const Split sa2 = stratified_split(data, spec, a2);
  CHECK(sa.train.class_counts() == sb.train.class_counts());
  CHECK(sa.test.class_counts() == sb.test.class_counts());
  const std::multiset<std::size_t> ia(sa.train_rows.begin(), sa.train_rows.end());
  const std::multiset<std::size_t> ib(sb.train_rows.begin(), sb.train_rows.end());
  CHECK(ia != ib);
  CHECK(sa.train_rows == sa2.train_rows);
}

TEST_CASE("stratified_split rejects impossible counts") {
  const Dataset data = synthetic_ctg_like(4, {10, 5, 5});
  Rng rng(1);
  CHECK_THROWS_AS((void)stratified_split(data, SplitSpec{std::nullopt, {11, 2, 2}}, rng), ConfigError);
  CHECK_THROWS_AS((void)stratified_split(data, SplitSpec{std::nullopt, {5, 2}}, rng), ConfigError);
}

TEST_CASE("Rng is deterministic and substreams follow the documented formula") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  const Rng base(42);
  CHECK(base.substream(3).seed() == splitmix64(42 ^ splitmix64(3)));
  CHECK(base.substream(1).seed() != base.substream(2).seed());
  Rng u(9);
  for (int i = 0; i < 1000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    CHECK(u.below(7) < 7);
  }
}

TEST_CASE("csv helpers round-trip values and quoting") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const double v = rng.normal() * std::pow(10.0, static_cast<double>(rng.below(20)) - 10.0);
    const auto back = csv::parse_double(csv::format(v));
    REQUIRE(back.has_value());
    CHECK(*back == v);
  }
  CHECK_FALSE(csv::parse_double("1.5x").has_value());
  const auto table = csv::parse("h1,h2\n\"a,b\",\"say \"\"hi\"\"\"\r\n");
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0][0] == "a,b");
  CHECK(table.rows[0][1] == "say \"hi\"");
  CHECK(csv::join({"a,b", "say \"hi\""}) == "\"a,b\",\"say \"\"hi\"\"\"");
}
