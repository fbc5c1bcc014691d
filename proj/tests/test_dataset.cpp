#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "grokmlp/dataset.hpp"
#include "grokmlp/rng.hpp"

using namespace grokmlp;

TEST_CASE("generate_triples covers all pairs with correct labels") {
  const auto triples = generate_triples(97);
  REQUIRE(triples.size() == 9409);
  std::set<std::pair<int, int>> pairs;
  for (const Triple& t : triples) {
    CHECK(!t.corrupted);
    CHECK(t.label == (t.a + t.b) % 97);
    pairs.insert({t.a, t.b});
  }
  CHECK(pairs.size() == 9409);
  // identity and wraparound corners
  auto find = [&](int a, int b) {
    return *std::find_if(triples.begin(), triples.end(),
                         [&](const Triple& t) { return t.a == a && t.b == b; });
  };
  CHECK(find(0, 0).label == 0);
  CHECK(find(96, 96).label == 95);  // 192 mod 97
}

TEST_CASE("generate_triples p=5 has balanced classes") {
  const auto triples = generate_triples(5);
  REQUIRE(triples.size() == 25);
  std::map<int, int> class_counts;
  for (const Triple& t : triples) ++class_counts[t.label];
  for (int c = 0; c < 5; ++c) CHECK(class_counts[c] == 5);
}

TEST_CASE("generate_triples rejects p < 2") {
  CHECK_THROWS_AS(generate_triples(1), std::invalid_argument);
  CHECK_THROWS_AS(generate_triples(0), std::invalid_argument);
  CHECK_THROWS_AS(generate_triples(-7), std::invalid_argument);
}

TEST_CASE("stratified_split p=97 at 0.3") {
  const auto triples = generate_triples(97);
  const SplitDataset split = stratified_split(triples, 0.3, 42);
  CHECK(split.train.size() == 2813);  // 29 per class
  CHECK(split.val.size() == 6596);
  CHECK(split.p == 97);

  std::map<int, int> train_counts;
  for (const Triple& t : split.train) ++train_counts[t.label];
  for (int c = 0; c < 97; ++c) CHECK(train_counts[c] == 29);

  // train and val partition the pair set
  std::set<std::pair<int, int>> seen;
  for (const Triple& t : split.train) seen.insert({t.a, t.b});
  for (const Triple& t : split.val) seen.insert({t.a, t.b});
  CHECK(seen.size() == 9409);
  for (const Triple& t : split.val) CHECK(!t.corrupted);
}

TEST_CASE("stratified_split is deterministic in the seed") {
  const auto triples = generate_triples(13);
  const SplitDataset s1 = stratified_split(triples, 0.3, 7);
  const SplitDataset s2 = stratified_split(triples, 0.3, 7);
  REQUIRE(s1.train.size() == s2.train.size());
  for (std::size_t i = 0; i < s1.train.size(); ++i) {
    CHECK(s1.train[i].a == s2.train[i].a);
    CHECK(s1.train[i].b == s2.train[i].b);
  }
  const SplitDataset s3 = stratified_split(triples, 0.3, 8);
  bool all_same = s1.train.size() == s3.train.size();
  for (std::size_t i = 0; all_same && i < s1.train.size(); ++i) {
    all_same = s1.train[i].a == s3.train[i].a && s1.train[i].b == s3.train[i].b;
  }
  CHECK(!all_same);
}

TEST_CASE("stratified_split rejects degenerate fractions") {
  const auto triples = generate_triples(5);
  CHECK_THROWS_AS(stratified_split(triples, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(stratified_split(triples, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(stratified_split(triples, 1.5, 1), std::invalid_argument);
  // floor(0.1 * 5) = 0 -> empty train set
  CHECK_THROWS_AS(stratified_split(triples, 0.1, 1), std::invalid_argument);
  // incomplete pair set
  auto partial = triples;
  partial.pop_back();
  CHECK_THROWS_AS(stratified_split(partial, 0.5, 1), std::invalid_argument);
}

TEST_CASE("corrupt_labels alpha=0 is the identity") {
  const SplitDataset split = stratified_split(generate_triples(11), 0.4, 3);
  const SplitDataset out = corrupt_labels(split, 0.0, 99);
  REQUIRE(out.train.size() == split.train.size());
  for (std::size_t i = 0; i < out.train.size(); ++i) {
    CHECK(out.train[i].label == split.train[i].label);
    CHECK(!out.train[i].corrupted);
  }
}

TEST_CASE("corrupt_labels corrupts exactly round(alpha*|train|) and never the true sum") {
  const SplitDataset split = stratified_split(generate_triples(97), 0.3, 42);
  REQUIRE(split.train.size() == 2813);
  const SplitDataset out = corrupt_labels(split, 0.30, 5);
  std::size_t corrupted = 0;
  for (const Triple& t : out.train) {
    if (t.corrupted) {
      ++corrupted;
      CHECK(t.label != (t.a + t.b) % 97);
      CHECK(t.label >= 0);
      CHECK(t.label < 97);
    } else {
      CHECK(t.label == (t.a + t.b) % 97);
    }
  }
  CHECK(corrupted == 844);  // round(0.30 * 2813)
  // val untouched
  REQUIRE(out.val.size() == split.val.size());
  for (std::size_t i = 0; i < out.val.size(); ++i) {
    CHECK(out.val[i].label == split.val[i].label);
    CHECK(!out.val[i].corrupted);
  }
}

TEST_CASE("corrupt_labels alpha=1 corrupts everything") {
  const SplitDataset split = stratified_split(generate_triples(11), 0.4, 3);
  const SplitDataset out = corrupt_labels(split, 1.0, 17);
  for (const Triple& t : out.train) {
    CHECK(t.corrupted);
    CHECK(t.label != (t.a + t.b) % 11);
  }
}

TEST_CASE("corrupt_labels validates inputs") {
  const SplitDataset split = stratified_split(generate_triples(11), 0.4, 3);
  CHECK_THROWS_AS(corrupt_labels(split, -0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(corrupt_labels(split, 1.1, 1), std::invalid_argument);
  const SplitDataset corrupted = corrupt_labels(split, 0.5, 1);
  CHECK_THROWS_AS(corrupt_labels(corrupted, 0.5, 1), std::invalid_argument);
}

TEST_CASE("validation set is invariant under alpha for a fixed master seed") {
  const SplitDataset clean = make_dataset(97, 0.3, 0.0, 1234);
  const SplitDataset noisy = make_dataset(97, 0.3, 0.30, 1234);
  REQUIRE(clean.val.size() == noisy.val.size());
  for (std::size_t i = 0; i < clean.val.size(); ++i) {
    CHECK(clean.val[i].a == noisy.val[i].a);
    CHECK(clean.val[i].b == noisy.val[i].b);
    CHECK(clean.val[i].label == noisy.val[i].label);
  }
  // the train pair sets agree too; only labels differ
  for (std::size_t i = 0; i < clean.train.size(); ++i) {
    CHECK(clean.train[i].a == noisy.train[i].a);
    CHECK(clean.train[i].b == noisy.train[i].b);
  }
}

TEST_CASE("export_split_csv writes one row per triple") {
  const SplitDataset split = make_dataset(7, 0.3, 0.5, 9);
  const auto path = std::filesystem::temp_directory_path() / "grokmlp_split_test.csv";
  export_split_csv(split, path.string());
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "a,b,label,corrupted,subset");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == 49);
  std::filesystem::remove(path);
}
