#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <map>
#include <set>
#include <random>
#include <sstream>

#include "rlrnb/corpus.hpp"
#include "test_support.hpp"

using namespace rlrnb;
using rlrnb::testing::TempDir;

namespace {

Dataset parse(const std::string& text) {
  std::istringstream is(text);
  return read_tsv(is);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(LoadTsv, ParsesLabelsAndTokens) {
  TempDir dir;
  rlrnb::testing::write_file(dir / "d.tsv", "A\tx y\nB\tz\n");
  const auto d = load_tsv(dir / "d.tsv");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.classes(), (std::vector<std::string>{"A", "B"}));
  EXPECT_EQ(d[0].tokens, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(d[1].label, "B");
}

TEST(LoadTsv, ClassesInFirstAppearanceOrder) {
  EXPECT_EQ(parse("B\tp\nA\tq\nB\tr\n").classes(), (std::vector<std::string>{"B", "A"}));
}

TEST(LoadTsv, SkipsBlankLinesAndExtraSpaces) {
  const auto d = parse("\nA\t  x   y \n   \n\t\nB\tz");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].tokens, (std::vector<std::string>{"x", "y"}));
}

TEST(LoadTsv, ErrorsNameTheLine) {
  EXPECT_NE(error_of("A\t\n").find(":1:"), std::string::npos);
  EXPECT_NE(error_of("A\tx\nB no tab\n").find(":2:"), std::string::npos);
  EXPECT_NE(error_of("A\tx\n\tz\n").find(":2:"), std::string::npos);
  EXPECT_NE(error_of("").find("no instances"), std::string::npos);
  EXPECT_NE(error_of("\n  \n").find("no instances"), std::string::npos);
}

TEST(LoadTsv, EmptyAllowedWhenRequested) {
  std::istringstream is("");
  EXPECT_TRUE(read_tsv(is, {.allow_empty = true}).empty());
}

TEST(LoadTsv, MissingFile) { EXPECT_THROW(load_tsv("/nonexistent/rlrnb.tsv"), Error); }

TEST(Dataset, RejectsInvalidInstances) {
  EXPECT_THROW(Dataset({Instance{"A", {}}}), Error);
  EXPECT_THROW(Dataset({Instance{"", {"x"}}}), Error);
  EXPECT_THROW(Dataset({Instance{"A", {"x\ty"}}}), Error);
  EXPECT_THROW(Dataset({Instance{"A\nB", {"x"}}}), Error);
}

TEST(Dataset, ClassSetMatchesLabels) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = rlrnb::testing::random_dataset(rng, 1 + trial % 5, 40, 10, 4);
    std::set<std::string> labels;
    for (const auto& inst : d) labels.insert(inst.label);
    EXPECT_EQ(labels, std::set<std::string>(d.classes().begin(), d.classes().end()));
    EXPECT_EQ(labels.size(), d.classes().size());
  }
}

TEST(Tsv, RoundTripProperty) {
  std::mt19937_64 rng(5);
  TempDir dir;
  for (int trial = 0; trial < 25; ++trial) {
    const auto d = rlrnb::testing::random_dataset(rng, 2 + trial % 4, 1 + trial * 7, 30, 6);
    save_tsv(dir / "rt.tsv", d);
    EXPECT_EQ(load_tsv(dir / "rt.tsv"), d);
  }
}

TEST(Synthetic, SizeBookkeeping) {
  SyntheticSpec s;
  s.class_sizes = {{"A", 100}, {"B", 1}};
  s.vocab_size = 50;
  s.tokens_per_instance = 4;
  s.class_signal = {0.5, 0.5};
  s.seed = 9;
  const auto d = generate_synthetic(s);
  ASSERT_EQ(d.size(), 101u);
  std::size_t a = 0;
  for (const auto& inst : d) {
    a += inst.label == "A";
    EXPECT_EQ(inst.tokens.size(), 4u);
  }
  EXPECT_EQ(a, 100u);
  EXPECT_EQ(d.classes(), (std::vector<std::string>{"A", "B"}));
}

TEST(Synthetic, DeterministicBytes) {
  auto s = rlrnb::testing::three_class_spec(20, 77);
  std::ostringstream a, b;
  write_tsv(a, generate_synthetic(s));
  write_tsv(b, generate_synthetic(s));
  EXPECT_EQ(a.str(), b.str());
  s.seed = 78;
  std::ostringstream c;
  write_tsv(c, generate_synthetic(s));
  EXPECT_NE(a.str(), c.str());
}

TEST(Synthetic, FullSignalStaysInPreferredBlock) {
  SyntheticSpec s;
  s.class_sizes = {{"A", 50}, {"B", 50}, {"C", 50}};
  s.vocab_size = 30;
  s.tokens_per_instance = 6;
  s.class_signal = {1.0, 1.0, 1.0};
  s.seed = 1;
  const auto d = generate_synthetic(s);
  for (const auto& inst : d) {
    const int cls = inst.label[0] - 'A';
    for (const auto& tok : inst.tokens) {
      const int id = std::stoi(tok.substr(1));
      EXPECT_EQ(id / 10, cls) << tok;
    }
  }
}

// With zero signal every class draws from the same uniform distribution:
// neither the class-by-token homogeneity test nor the pooled goodness-of-fit
// test may reject at alpha = 0.01.
TEST(Synthetic, ZeroSignalIsHomogeneous) {
  SyntheticSpec s;
  s.class_sizes = {{"A", 5000}, {"B", 5000}};
  s.vocab_size = 20;
  s.tokens_per_instance = 10;
  s.class_signal = {0.0, 0.0};
  s.block_size = 5;
  s.seed = 2024;
  const auto d = generate_synthetic(s);
  ASSERT_EQ(d.size(), 10'000u);

  std::vector<std::vector<double>> counts(2, std::vector<double>(s.vocab_size, 0.0));
  for (const auto& inst : d)
    for (const auto& tok : inst.tokens) counts[inst.label == "B"][std::stoul(tok.substr(1))] += 1.0;

  std::vector<double> col(s.vocab_size, 0.0);
  double total = 0.0;
  std::vector<double> row(2, 0.0);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t w = 0; w < s.vocab_size; ++w) {
      col[w] += counts[c][w];
      row[c] += counts[c][w];
      total += counts[c][w];
    }
  double homogeneity = 0.0;
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t w = 0; w < s.vocab_size; ++w) {
      const double e = row[c] * col[w] / total;
      homogeneity += (counts[c][w] - e) * (counts[c][w] - e) / e;
    }
  double uniformity = 0.0;
  for (std::size_t w = 0; w < s.vocab_size; ++w) {
    const double e = total / static_cast<double>(s.vocab_size);
    uniformity += (col[w] - e) * (col[w] - e) / e;
  }
  const boost::math::chi_squared dist(static_cast<double>(s.vocab_size - 1));
  const double critical = boost::math::quantile(dist, 0.99);
  EXPECT_LT(homogeneity, critical);
  EXPECT_LT(uniformity, critical);
}

TEST(Synthetic, RejectsInvalidSpecs) {
  SyntheticSpec s;
  s.class_sizes = {{"A", 1}, {"B", 1}};
  s.class_signal = {0.1, 0.1};
  EXPECT_NO_THROW(generate_synthetic(s));
  auto bad = s;
  bad.class_signal = {0.1};
  EXPECT_THROW(generate_synthetic(bad), Error);
  bad = s;
  bad.class_signal = {0.1, 1.5};
  EXPECT_THROW(generate_synthetic(bad), Error);
  bad = s;
  bad.class_sizes[1].second = 0;
  EXPECT_THROW(generate_synthetic(bad), Error);
  bad = s;
  bad.vocab_size = 0;
  EXPECT_THROW(generate_synthetic(bad), Error);
  bad = s;
  bad.tokens_per_instance = 0;
  EXPECT_THROW(generate_synthetic(bad), Error);
  bad = s;
  bad.class_sizes[1].first = "A";
  EXPECT_THROW(generate_synthetic(bad), Error);
}
