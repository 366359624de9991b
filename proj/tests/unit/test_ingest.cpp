#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <zlib.h>

#include "helpers.hpp"

using namespace lurk;
using namespace testing_util;

namespace {

const char* kValidLine =
    R"({"tweet_id":"1","author_id":"a","created_at":"2023-01-05T10:00:00Z","lang":"en","kind":"original",)"
    R"("impressions":100,"likes":1,"replies":0,"retweets":2,"quotes":0,"urls":["https://x.com/a"],"author_followers":10})";

std::string line_with(const std::string& from, const std::string& to) {
  std::string s = kValidLine;
  auto pos = s.find(from);
  s.replace(pos, from.size(), to);
  return s;
}

} // namespace

TEST(ParseCorpus, ThreeValidOneMalformed) {
  auto dir = temp_dir("parse3");
  write_text(dir / "c.jsonl", std::string(kValidLine) + "\n" + line_with(R"("tweet_id":"1")", R"("tweet_id":"2")") +
                                  "\n{not json\n" + line_with(R"("tweet_id":"1")", R"("tweet_id":"3")") + "\n");
  ParseDiagnostics d;
  auto recs = parse_corpus((dir / "c.jsonl").string(), Schema::flat, &d);
  EXPECT_EQ(recs.size(), 3u);
  EXPECT_EQ(d.reject_count(), 1u);
  EXPECT_EQ(d.rejects.at("invalid_json"), 1u);
  ASSERT_EQ(d.reject_lines.size(), 1u);
  EXPECT_EQ(d.reject_lines[0].first, 3u);
  EXPECT_EQ(recs[2].tweet_id, "3");
}

TEST(ParseCorpus, EmptyFile) {
  auto dir = temp_dir("empty");
  write_text(dir / "e.jsonl", "");
  ParseDiagnostics d;
  auto recs = parse_corpus((dir / "e.jsonl").string(), Schema::flat, &d);
  EXPECT_TRUE(recs.empty());
  EXPECT_EQ(d.reject_count(), 0u);
}

TEST(ParseCorpus, MissingFileIsFatal) {
  EXPECT_THROW(parse_corpus("/nonexistent/corpus.jsonl", Schema::flat), Error);
}

TEST(ParseCorpus, MiniCorpusHasOneThousandRecords) {
  const auto expected = load_json(fixture("mini_expected.json"));
  ParseDiagnostics d;
  auto recs = parse_corpus(fixture("mini_corpus.jsonl"), Schema::flat, &d);
  EXPECT_EQ(recs.size(), expected["records"].get<std::size_t>());
  EXPECT_EQ(recs.size(), 1000u);
  EXPECT_EQ(d.reject_count(), 0u);
}

TEST(ParseCorpus, RejectReasons) {
  ParseDiagnostics d;
  EXPECT_FALSE(parse_line(line_with(R"("likes":1)", R"("likes":-1)"), Schema::flat, d));
  EXPECT_FALSE(parse_line(line_with(R"("kind":"original")", R"("kind":"story")"), Schema::flat, d));
  EXPECT_FALSE(parse_line(line_with(R"("kind":"original")", R"("kind":"retweet")"), Schema::flat, d));
  EXPECT_FALSE(parse_line(line_with("2023-01-05T10:00:00Z", "yesterday"), Schema::flat, d));
  EXPECT_FALSE(parse_line(line_with(R"("author_id":"a",)", ""), Schema::flat, d));
  EXPECT_FALSE(parse_line("[1,2,3]", Schema::flat, d));
  EXPECT_EQ(d.rejects.at("negative_count:likes"), 1u);
  EXPECT_EQ(d.rejects.at("invalid_field:kind"), 1u);
  EXPECT_EQ(d.rejects.at("missing_field:retweeted_author_id"), 1u);
  EXPECT_EQ(d.rejects.at("invalid_timestamp"), 1u);
  EXPECT_EQ(d.rejects.at("missing_field:author_id"), 1u);
  EXPECT_EQ(d.rejects.at("invalid_json"), 1u);
  EXPECT_EQ(d.records, 0u);
}

TEST(ParseCorpus, BlankLinesAreIgnored) {
  ParseDiagnostics d;
  EXPECT_FALSE(parse_line("   ", Schema::flat, d));
  EXPECT_EQ(d.lines, 0u);
  EXPECT_EQ(d.reject_count(), 0u);
}

TEST(ParseCorpus, ZonelessTimestampIsAssumedUtcAndCounted) {
  ParseDiagnostics d;
  auto r = parse_line(line_with("2023-01-05T10:00:00Z", "2023-01-05 10:00:00"), Schema::flat, d);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->created_at, at("2023-01-05T10:00:00Z"));
  EXPECT_EQ(d.assumed_utc, 1u);
  auto r2 = parse_line(line_with("2023-01-05T10:00:00Z", "2023-01-05T12:30:00+02:30"), Schema::flat, d);
  ASSERT_TRUE(r2);
  EXPECT_EQ(r2->created_at, at("2023-01-05T10:00:00Z"));
  EXPECT_EQ(d.assumed_utc, 1u);
}

TEST(ParseCorpus, SelfRetweetIsKeptAndFlagged) {
  ParseDiagnostics d;
  auto line = line_with(R"("kind":"original")", R"("kind":"retweet","retweeted_author_id":"a")");
  auto r = parse_line(line, Schema::flat, d);
  ASSERT_TRUE(r);
  EXPECT_TRUE(r->is_self_retweet());
  EXPECT_EQ(d.self_retweets, 1u);
}

TEST(ParseCorpus, ApiSchema) {
  const std::string line =
      R"({"id":"99","author_id":"u7","created_at":"2023-02-01T00:00:00.000Z","lang":"en",)"
      R"("public_metrics":{"impression_count":500,"like_count":4,"reply_count":1,"retweet_count":2,"quote_count":0},)"
      R"("referenced_tweets":[{"type":"retweeted","id":"5","author_id":"u9"}],)"
      R"("entities":{"urls":[{"url":"https://t.co/x","expanded_url":"https://www.example.com/p"}]},)"
      R"("author":{"public_metrics":{"followers_count":321}}})";
  ParseDiagnostics d;
  auto r = parse_line(line, Schema::api, d);
  ASSERT_TRUE(r) << (d.reject_lines.empty() ? "" : d.reject_lines[0].second);
  EXPECT_EQ(r->tweet_id, "99");
  EXPECT_EQ(r->kind, TweetKind::retweet);
  EXPECT_EQ(r->retweeted_author_id.value(), "u9");
  EXPECT_EQ(r->impressions, 500u);
  EXPECT_EQ(r->likes, 4u);
  EXPECT_EQ(r->author_followers, 321u);
  ASSERT_EQ(r->urls.size(), 1u);
  EXPECT_EQ(r->urls[0], "https://www.example.com/p");
}

TEST(ParseCorpus, FlatRoundTrip) {
  for (const auto& r : mini_corpus()) {
    ParseDiagnostics d;
    auto back = parse_line(to_flat_line(r), Schema::flat, d);
    ASSERT_TRUE(back);
    EXPECT_EQ(to_flat_line(*back), to_flat_line(r));
  }
}

TEST(ParseCorpus, GzipInputMatchesPlain) {
  auto dir = temp_dir("gz");
  const std::string plain = read_text(fixture("mini_corpus.jsonl"));
  const auto gz_path = (dir / "mini.jsonl.gz").string();
  gzFile f = gzopen(gz_path.c_str(), "wb");
  ASSERT_NE(f, nullptr);
  gzwrite(f, plain.data(), static_cast<unsigned>(plain.size()));
  gzclose(f);
  auto a = parse_corpus(fixture("mini_corpus.jsonl"), Schema::flat);
  auto b = parse_corpus(gz_path, Schema::flat);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(to_flat_line(a[i]), to_flat_line(b[i]));
}

TEST(ParseCorpus, LongLinesSpanReadBuffers) {
  auto dir = temp_dir("long");
  std::string line = kValidLine;
  std::string urls = "\"urls\":[";
  for (int i = 0; i < 5000; ++i) urls += std::string(i ? "," : "") + "\"https://example.com/" + std::to_string(i) + "\"";
  urls += "]";
  line.replace(line.find(R"("urls":["https://x.com/a"])"), std::string(R"("urls":["https://x.com/a"])").size(), urls);
  write_text(dir / "l.jsonl", line + "\n" + kValidLine);  // no trailing newline on the last line
  auto recs = parse_corpus((dir / "l.jsonl").string(), Schema::flat);
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].urls.size(), 5000u);
}

TEST(Timestamp, ParseAndFormat) {
  EXPECT_EQ(format_timestamp(at("2022-12-15")), "2022-12-15T00:00:00Z");
  EXPECT_EQ(format_timestamp(at("2024-02-29T23:59:59Z")), "2024-02-29T23:59:59Z");
  EXPECT_FALSE(parse_timestamp("2023-02-29"));
  EXPECT_FALSE(parse_timestamp("2023-01-01T25:00:00Z"));
  EXPECT_FALSE(parse_timestamp("2023-01-01T10:00:00Zjunk"));
  EXPECT_EQ(impression_metric_release(), at("2022-12-15T00:00:00Z"));
}

TEST(ApplyFilters, RecordBeforeCutoffIsExcluded) {
  FilterStats st;
  auto out = apply_filters({Rec("a").when("2022-12-10T09:00:00Z")}, CorpusFilter{}, &st);
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(st.excluded.at("before_min_date"), 1u);
}

TEST(ApplyFilters, EnglishOriginalAfterCutoffIsRetained) {
  auto out = apply_filters({Rec("a").when("2023-01-05T00:00:00Z")}, CorpusFilter{});
  EXPECT_EQ(out.size(), 1u);
}

TEST(ApplyFilters, CutoffInstantIsInclusive) {
  auto out = apply_filters({Rec("a").when("2022-12-15T00:00:00Z"), Rec("b").when("2022-12-14T23:59:59Z")},
                           CorpusFilter{});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].author_id, "a");
}

TEST(ApplyFilters, NonEnglishIsExcluded) {
  FilterStats st;
  auto out = apply_filters({Rec("a").lang("es"), Rec("b")}, CorpusFilter{}, &st);
  EXPECT_EQ(out.size(), 1u);
  EXPECT_EQ(st.excluded.at("language"), 1u);
}

TEST(ApplyFilters, MiniCorpusCounts) {
  const auto expected = load_json(fixture("mini_expected.json"));
  FilterStats st;
  auto out = apply_filters(mini_corpus(), CorpusFilter{}, &st);
  EXPECT_EQ(st.excluded.at("before_min_date"), expected["pre_cutoff"].get<std::uint64_t>());
  EXPECT_EQ(st.excluded.at("language"), expected["non_english"].get<std::uint64_t>());
  EXPECT_EQ(out.size(), expected["retained"].get<std::size_t>());
  EXPECT_EQ(out.size(), 857u);
}

TEST(ApplyFilters, EarlyMinDateRejectedForEngagement) {
  CorpusFilter f;
  f.min_date = at("2022-12-01");
  EXPECT_THROW(f.validate_for_engagement(), Error);
  EXPECT_NO_THROW(CorpusFilter{}.validate_for_engagement());
}

TEST(ApplyFiltersProperty, Idempotent) {
  std::vector<CorpusFilter> filters(3);
  filters[1].allowed_langs = {"en", "es"};
  filters[2].min_date = at("2023-01-15");
  for (const auto& f : filters) {
    auto once = apply_filters(mini_corpus(), f);
    auto twice = apply_filters(once, f);
    ASSERT_EQ(once.size(), twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(once[i].tweet_id, twice[i].tweet_id);
  }
}

TEST(ApplyFiltersProperty, RetainedPlusExcludedEqualsInput) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    CorpusFilter f;
    f.min_date = at("2022-12-01") + std::chrono::days(gen() % 60);
    if (gen() % 2) f.allowed_langs.insert("de");
    FilterStats st;
    auto out = apply_filters(mini_corpus(), f, &st);
    EXPECT_EQ(st.input, mini_corpus().size());
    EXPECT_EQ(st.retained, out.size());
    EXPECT_EQ(st.retained + st.excluded_total(), st.input);
    for (const auto& r : out) {
      EXPECT_GE(r.created_at, f.min_date);
      EXPECT_TRUE(f.allowed_langs.contains(r.lang));
    }
  }
}

TEST(ApplyFiltersProperty, OutputPreservesInputOrder) {
  auto out = apply_filters(mini_corpus(), CorpusFilter{});
  EXPECT_TRUE(std::is_sorted(out.begin(), out.end(),
                             [](const TweetRecord& a, const TweetRecord& b) { return a.tweet_id < b.tweet_id; }));
}

TEST(EngagementSubset, ReplyExcludedOriginalRetained) {
  auto out = engagement_subset({Rec("a", TweetKind::reply), Rec("b"), Rec("c", TweetKind::quote).target("x"),
                                retweet("d", "e")});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].author_id, "b");
}

TEST(EngagementSubset, MiniCorpusOriginals) {
  const auto expected = load_json(fixture("mini_expected.json"));
  auto out = engagement_subset(apply_filters(mini_corpus(), CorpusFilter{}));
  EXPECT_EQ(out.size(), expected["originals"].get<std::size_t>());
  EXPECT_EQ(out.size(), 323u);
}
