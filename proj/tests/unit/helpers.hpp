#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "lurk/lurkscope.hpp"

namespace testing_util {

inline std::string fixture(const std::string& name) { return std::string(LURK_FIXTURE_DIR) + "/" + name; }

inline nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("lurk_unit_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline lurk::Timestamp at(const std::string& s) { return lurk::parse_timestamp(s)->value; }

struct Rec {
  lurk::TweetRecord r;
  explicit Rec(std::string author, lurk::TweetKind kind = lurk::TweetKind::original) {
    static int counter = 0;
    r.tweet_id = "t" + std::to_string(++counter);
    r.author_id = std::move(author);
    r.kind = kind;
    r.lang = "en";
    r.created_at = at("2023-01-05T12:00:00Z");
  }
  Rec& target(std::string t) {
    r.retweeted_author_id = std::move(t);
    return *this;
  }
  Rec& lang(std::string l) {
    r.lang = std::move(l);
    return *this;
  }
  Rec& when(const std::string& s) {
    r.created_at = at(s);
    return *this;
  }
  Rec& metrics(std::uint64_t imp, std::uint64_t rt, std::uint64_t rp, std::uint64_t lk, std::uint64_t qt) {
    r.impressions = imp;
    r.retweets = rt;
    r.replies = rp;
    r.likes = lk;
    r.quotes = qt;
    return *this;
  }
  Rec& followers(std::uint64_t f) {
    r.author_followers = f;
    return *this;
  }
  Rec& url(std::string u) {
    r.urls.push_back(std::move(u));
    return *this;
  }
  operator lurk::TweetRecord() const { return r; }
};

inline lurk::TweetRecord retweet(const std::string& a, const std::string& b) {
  return Rec(a, lurk::TweetKind::retweet).target(b);
}

// Default synthetic corpus, generated once per test binary.
inline const lurk::GeneratedCorpus& default_corpus() {
  static const lurk::GeneratedCorpus g = lurk::generate(lurk::GeneratorConfig{});
  return g;
}

inline std::vector<lurk::TweetRecord> filtered(const std::vector<lurk::TweetRecord>& all) {
  return lurk::apply_filters(all, lurk::CorpusFilter{});
}

inline const std::vector<lurk::TweetRecord>& mini_corpus() {
  static const std::vector<lurk::TweetRecord> v = lurk::parse_corpus(fixture("mini_corpus.jsonl"), lurk::Schema::flat);
  return v;
}

inline Eigen::MatrixXd random_counts(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols, int max_count = 6,
                                     double density = 0.6) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> c(1, max_count);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      if (u(gen) < density) A(i, j) = c(gen);
  for (Eigen::Index i = 0; i < rows; ++i)
    if (A.row(i).sum() == 0) A(i, static_cast<Eigen::Index>(gen() % static_cast<std::uint64_t>(cols))) = 1;
  for (Eigen::Index j = 0; j < cols; ++j)
    if (A.col(j).sum() == 0) A(static_cast<Eigen::Index>(gen() % static_cast<std::uint64_t>(rows)), j) = 1;
  return A;
}

} // namespace testing_util
