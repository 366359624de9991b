#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "helpers.hpp"

using namespace lurk;

TEST(Text, SplitCsvHandlesQuotes) {
  EXPECT_EQ(text::split_csv("a,b,c"), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(text::split_csv("\"a,b\",\"say \"\"hi\"\"\",\r"), (std::vector<std::string>{"a,b", "say \"hi\"", ""}));
  EXPECT_EQ(text::split_csv(""), std::vector<std::string>{""});
}

TEST(Text, CsvFieldRoundTrip) {
  for (std::string s : {"plain", "with,comma", "with \"quote\"", ""}) {
    auto f = text::split_csv(text::csv_field(s) + ",x");
    ASSERT_EQ(f.size(), 2u);
    EXPECT_EQ(f[0], s);
  }
}

TEST(Text, DoubleFormattingRoundTrips) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(gen) / 7.0;
    EXPECT_EQ(*text::parse_double(text::fmt_double(v)), v);
  }
  EXPECT_EQ(text::fmt_double(0.0), "0");
  EXPECT_EQ(text::fmt_double(-0.0), "0");
  EXPECT_EQ(text::fmt_double(0.66), "0.66");
  EXPECT_FALSE(text::parse_double("1.5x"));
  EXPECT_FALSE(text::parse_double(""));
  EXPECT_EQ(text::parse_int<int>(" 42 "), 42);
  EXPECT_FALSE(text::parse_int<unsigned>("-1"));
}

TEST(Text, TrimLowerEndsWith) {
  EXPECT_EQ(text::trim("  a b \t\n"), "a b");
  EXPECT_EQ(text::lower("MiXeD"), "mixed");
  EXPECT_TRUE(text::ends_with("x.jsonl.gz", ".gz"));
  EXPECT_FALSE(text::ends_with("gz", ".gz"));
}

TEST(Text, OpenOutputCreatesParents) {
  auto dir = testing_util::temp_dir("open_output");
  { auto out = text::open_output((dir / "a" / "b" / "c.txt").string()); out << "ok"; }
  EXPECT_EQ(testing_util::read_text(dir / "a" / "b" / "c.txt"), "ok");
  EXPECT_THROW(text::open_input((dir / "missing").string()), Error);
}

TEST(Stats, QuantilesAndMedian) {
  std::vector<double> v{1, 2, 3, 4};
  EXPECT_EQ(stats::median(v), 2.5);
  EXPECT_EQ(stats::median({3, 1, 2}), 2.0);
  EXPECT_EQ(stats::quantile_sorted(v, 0.25), 1.75);
  EXPECT_EQ(stats::quantile_sorted(v, 0.0), 1.0);
  EXPECT_EQ(stats::quantile_sorted(v, 1.0), 4.0);
  EXPECT_THROW(stats::median({}), Error);
}

TEST(Stats, PearsonBasics) {
  std::vector<double> x{1, 2, 3, 4, 5}, y{2, 4, 6, 8, 10}, z{5, 4, 3, 2, 1}, c{1, 1, 1, 1, 1};
  EXPECT_NEAR(stats::pearson(x, y), 1.0, 1e-15);
  EXPECT_NEAR(stats::pearson(x, z), -1.0, 1e-15);
  EXPECT_THROW(stats::pearson(x, c), Error);
  EXPECT_THROW(stats::pearson(x, std::vector<double>{1, 2}), Error);
}
