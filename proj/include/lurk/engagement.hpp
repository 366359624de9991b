#pragma once

// Active Engagement (actions / impressions) at tweet, user and domain
// granularity, its log-scale correlation with popularity, and grouped
// boxplot summaries.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lurk/error.hpp"
#include "lurk/ingest.hpp"
#include "lurk/mediabias.hpp"
#include "lurk/stats.hpp"
#include "lurk/text.hpp"

namespace lurk {

enum class Action { retweet, reply, like, quote };

inline constexpr std::array<Action, 4> kAllActions{Action::retweet, Action::reply, Action::like, Action::quote};

inline std::string_view to_string(Action a) {
  switch (a) {
    case Action::retweet: return "retweet";
    case Action::reply: return "reply";
    case Action::like: return "like";
    case Action::quote: return "quote";
  }
  return "retweet";
}

inline std::size_t index_of(Action a) { return static_cast<std::size_t>(a); }

inline std::uint64_t action_count(const TweetRecord& t, Action a) {
  switch (a) {
    case Action::retweet: return t.retweets;
    case Action::reply: return t.replies;
    case Action::like: return t.likes;
    case Action::quote: return t.quotes;
  }
  return 0;
}

using ActionValues = std::array<double, 4>;

// Per-action ratios for one tweet; nullopt when impressions are zero.
inline std::optional<ActionValues> tweet_ae(const TweetRecord& t) {
  if (t.impressions == 0) return std::nullopt;
  ActionValues out{};
  const auto imp = static_cast<double>(t.impressions);
  for (auto a : kAllActions) out[index_of(a)] = static_cast<double>(action_count(t, a)) / imp;
  return out;
}

enum class Granularity { tweet, user, domain };

inline std::string_view to_string(Granularity g) {
  switch (g) {
    case Granularity::tweet: return "tweet";
    case Granularity::user: return "user";
    case Granularity::domain: return "domain";
  }
  return "tweet";
}

inline std::optional<Granularity> parse_granularity(std::string_view s) {
  if (s == "tweet") return Granularity::tweet;
  if (s == "user") return Granularity::user;
  if (s == "domain") return Granularity::domain;
  return std::nullopt;
}

struct EngagementRecord {
  std::string subject_id;
  Granularity granularity = Granularity::tweet;
  double impressions = 0.0;
  ActionValues counts{};
  ActionValues ae{};              // pooled: sum(actions) / sum(impressions)
  ActionValues mean_of_ratios{};  // over constituent tweets with impressions
  std::uint64_t n_tweets = 0;

  bool above_one() const {
    for (double v : ae)
      if (v > 1.0) return true;
    return false;
  }
};

struct WeightedKey {
  std::string key;
  double weight = 1.0;
};

struct AggregateStats {
  std::uint64_t tweets = 0;
  std::uint64_t unattributed_tweets = 0;        // key function returned nothing
  std::uint64_t zero_impression_subjects = 0;   // omitted
  std::uint64_t above_one = 0;                  // emitted subjects with some AE > 1
};

namespace detail {
inline void push_key(std::vector<WeightedKey>& out, std::string k) { out.push_back({std::move(k), 1.0}); }
inline void push_key(std::vector<WeightedKey>& out, std::optional<std::string> k) {
  if (k) out.push_back({std::move(*k), 1.0});
}
inline void push_key(std::vector<WeightedKey>& out, std::vector<WeightedKey> ks) {
  for (auto& k : ks) out.push_back(std::move(k));
}
} // namespace detail

// Streaming pooled aggregation. `KeyFn(const TweetRecord&)` returns a
// std::string, std::optional<std::string>, or std::vector<WeightedKey>; a
// tweet's impressions and actions are credited to each key scaled by its
// weight.
template <typename KeyFn>
class AeAggregator {
public:
  AeAggregator(Granularity g, KeyFn key_fn) : granularity_(g), key_fn_(std::move(key_fn)) {}

  void add(const TweetRecord& t) {
    ++stats_.tweets;
    std::vector<WeightedKey> keys;
    detail::push_key(keys, key_fn_(t));
    if (keys.empty()) {
      ++stats_.unattributed_tweets;
      return;
    }
    const auto ratios = tweet_ae(t);
    for (const auto& k : keys) {
      auto& acc = acc_[k.key];
      acc.impressions += k.weight * static_cast<double>(t.impressions);
      for (auto a : kAllActions) acc.counts[index_of(a)] += k.weight * static_cast<double>(action_count(t, a));
      ++acc.n_tweets;
      if (ratios) {
        ++acc.n_rated;
        for (std::size_t i = 0; i < 4; ++i) acc.ratio_sum[i] += (*ratios)[i];
      }
    }
  }

  std::vector<EngagementRecord> results(AggregateStats* stats = nullptr) const {
    AggregateStats s = stats_;
    std::vector<EngagementRecord> out;
    for (const auto& [key, acc] : acc_) {
      if (!(acc.impressions > 0)) {
        ++s.zero_impression_subjects;
        continue;
      }
      EngagementRecord r;
      r.subject_id = key;
      r.granularity = granularity_;
      r.impressions = acc.impressions;
      r.counts = acc.counts;
      r.n_tweets = acc.n_tweets;
      for (std::size_t i = 0; i < 4; ++i) {
        r.ae[i] = acc.counts[i] / acc.impressions;
        r.mean_of_ratios[i] = acc.n_rated > 0 ? acc.ratio_sum[i] / static_cast<double>(acc.n_rated) : 0.0;
      }
      if (r.above_one()) ++s.above_one;
      out.push_back(std::move(r));
    }
    if (stats) *stats = s;
    return out;
  }

private:
  struct Acc {
    double impressions = 0.0;
    ActionValues counts{};
    ActionValues ratio_sum{};
    std::uint64_t n_tweets = 0;
    std::uint64_t n_rated = 0;
  };
  Granularity granularity_;
  KeyFn key_fn_;
  std::map<std::string, Acc> acc_;
  AggregateStats stats_;
};

template <typename Range, typename KeyFn>
std::vector<EngagementRecord> aggregate_ae(const Range& records, Granularity g, KeyFn key_fn,
                                           AggregateStats* stats = nullptr) {
  AeAggregator<KeyFn> agg(g, std::move(key_fn));
  for (const TweetRecord& t : records) agg.add(t);
  return agg.results(stats);
}

inline auto tweet_key() {
  return [](const TweetRecord& t) { return t.tweet_id; };
}

inline auto user_key() {
  return [](const TweetRecord& t) { return t.author_id; };
}

enum class DomainAttribution { full, fractional };

// Each distinct table-matched domain in a tweet gets the tweet's counts in
// full, or 1/k of them under fractional attribution.
inline auto domain_keys(const DomainTable& table, DomainAttribution mode = DomainAttribution::full) {
  return [&table, mode](const TweetRecord& t) {
    std::set<std::string> matched;
    for (const auto& url : t.urls)
      if (const DomainProfile* p = match_url(table, url)) matched.insert(p->domain);
    std::vector<WeightedKey> keys;
    const double w = mode == DomainAttribution::full || matched.empty() ? 1.0 : 1.0 / static_cast<double>(matched.size());
    for (const auto& d : matched) keys.push_back({d, w});
    return keys;
  };
}

// ---------------------------------------------------------------------------
// correlation with popularity

// Pearson correlation of (log10 x, log10 y).
inline double log_pearson(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2) throw Error("log_pearson: need at least two points");
  std::vector<double> lx, ly;
  lx.reserve(points.size());
  ly.reserve(points.size());
  for (const auto& [x, y] : points) {
    if (!(x > 0) || !(y > 0)) throw Error("log_pearson: coordinates must be positive");
    lx.push_back(std::log10(x));
    ly.push_back(std::log10(y));
  }
  return stats::pearson(lx, ly);
}

struct CorrelationReport {
  Action action = Action::retweet;
  std::size_t n = 0;
  std::optional<double> pearson_r;  // absent when undefined
  std::string filter;
};

// Per-kind inclusion: tweets with impressions > 0, followers > 0 and a
// nonzero count for the action under study.
template <typename Range>
std::vector<CorrelationReport> followers_correlations(const Range& tweets) {
  std::vector<CorrelationReport> out;
  for (auto a : kAllActions) {
    std::vector<std::pair<double, double>> pts;
    for (const TweetRecord& t : tweets) {
      const auto c = action_count(t, a);
      if (t.impressions == 0 || t.author_followers == 0 || c == 0) continue;
      pts.emplace_back(static_cast<double>(t.author_followers),
                       static_cast<double>(c) / static_cast<double>(t.impressions));
    }
    CorrelationReport r;
    r.action = a;
    r.n = pts.size();
    r.filter = "impressions>0;followers>0;" + std::string(to_string(a)) + ">0;log10(followers)~log10(ae)";
    try {
      r.pearson_r = log_pearson(pts);
    } catch (const Error&) {
      r.pearson_r = std::nullopt;
    }
    out.push_back(std::move(r));
  }
  return out;
}

struct AeSummary {
  Action action = Action::retweet;
  std::size_t n_tweets = 0;
  double mean_ae = 0.0;
};

// Mean of per-tweet ratios over all tweets with impressions, zeros included.
template <typename Range>
std::vector<AeSummary> mean_tweet_ae(const Range& tweets) {
  ActionValues sum{};
  std::size_t n = 0;
  for (const TweetRecord& t : tweets) {
    auto ae = tweet_ae(t);
    if (!ae) continue;
    ++n;
    for (std::size_t i = 0; i < 4; ++i) sum[i] += (*ae)[i];
  }
  std::vector<AeSummary> out;
  for (auto a : kAllActions)
    out.push_back({a, n, n > 0 ? sum[index_of(a)] / static_cast<double>(n) : 0.0});
  return out;
}

// ---------------------------------------------------------------------------
// group summaries

struct BoxSummary {
  std::string group;
  Action action = Action::retweet;
  std::size_t n = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
  double whisker_low = 0, whisker_high = 0;  // most extreme points within 1.5 IQR of the box
  std::size_t n_outliers = 0;
};

inline BoxSummary box_summary(std::string group, Action action, std::vector<double> values) {
  if (values.empty()) throw Error("box summary of empty group " + group);
  std::sort(values.begin(), values.end());
  BoxSummary b;
  b.group = std::move(group);
  b.action = action;
  b.n = values.size();
  b.min = values.front();
  b.max = values.back();
  b.q1 = stats::quantile_sorted(values, 0.25);
  b.median = stats::quantile_sorted(values, 0.5);
  b.q3 = stats::quantile_sorted(values, 0.75);
  b.mean = stats::mean(values);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr, hi_fence = b.q3 + 1.5 * iqr;
  b.whisker_low = b.q1;
  b.whisker_high = b.q3;
  for (double v : values) {
    if (v < lo_fence || v > hi_fence) {
      ++b.n_outliers;
      continue;
    }
    b.whisker_low = std::min(b.whisker_low, v);
    b.whisker_high = std::max(b.whisker_high, v);
  }
  return b;
}

struct GroupStats {
  std::size_t grouped = 0;
  std::size_t ungrouped = 0;
  std::vector<std::string> empty_groups;
};

// Boxplot summaries of pooled AE per (group, action). Groups named in `groups`
// that end up with no subjects are omitted and listed in the stats.
inline std::vector<BoxSummary> group_ae(const std::vector<EngagementRecord>& records,
                                        const std::map<std::string, std::string>& groups,
                                        GroupStats* stats = nullptr) {
  GroupStats s;
  std::map<std::string, std::array<std::vector<double>, 4>> values;
  for (const auto& r : records) {
    auto it = groups.find(r.subject_id);
    if (it == groups.end()) {
      ++s.ungrouped;
      continue;
    }
    ++s.grouped;
    auto& v = values[it->second];
    for (std::size_t i = 0; i < 4; ++i) v[i].push_back(r.ae[i]);
  }
  std::set<std::string> labels;
  for (const auto& [subject, label] : groups) labels.insert(label);
  std::vector<BoxSummary> out;
  for (const auto& label : labels) {
    auto it = values.find(label);
    if (it == values.end()) {
      s.empty_groups.push_back(label);
      continue;
    }
    for (auto a : kAllActions) out.push_back(box_summary(label, a, it->second[index_of(a)]));
  }
  if (stats) *stats = std::move(s);
  return out;
}

// ---------------------------------------------------------------------------
// file formats

inline void write_engagement_csv(std::ostream& out, const std::vector<EngagementRecord>& rows) {
  out << "subject,granularity,action,impressions,count,ae\n";
  for (const auto& r : rows)
    for (auto a : kAllActions)
      out << text::csv_field(r.subject_id) << ',' << to_string(r.granularity) << ',' << to_string(a) << ','
          << text::fmt_double(r.impressions) << ',' << text::fmt_double(r.counts[index_of(a)]) << ','
          << text::fmt_double(r.ae[index_of(a)]) << '\n';
}

inline void write_mean_of_ratios_csv(std::ostream& out, const std::vector<EngagementRecord>& rows) {
  out << "subject,granularity,action,n_tweets,mean_ae\n";
  for (const auto& r : rows)
    for (auto a : kAllActions)
      out << text::csv_field(r.subject_id) << ',' << to_string(r.granularity) << ',' << to_string(a) << ','
          << r.n_tweets << ',' << text::fmt_double(r.mean_of_ratios[index_of(a)]) << '\n';
}

inline void write_correlations_csv(std::ostream& out, const std::vector<CorrelationReport>& rows) {
  out << "action,n,pearson_r,filter\n";
  for (const auto& r : rows)
    out << to_string(r.action) << ',' << r.n << ',' << (r.pearson_r ? text::fmt_double(*r.pearson_r) : "") << ','
        << text::csv_field(r.filter) << '\n';
}

inline void write_summary_csv(std::ostream& out, const std::vector<AeSummary>& rows) {
  out << "action,n_tweets,mean_ae,mean_ae_percent\n";
  for (const auto& r : rows)
    out << to_string(r.action) << ',' << r.n_tweets << ',' << text::fmt_double(r.mean_ae) << ','
        << text::fmt_double(100.0 * r.mean_ae) << '\n';
}

inline void write_group_csv(std::ostream& out, std::string_view group_by, const std::vector<BoxSummary>& rows) {
  out << "group_by,group,action,n,min,q1,median,q3,max,mean,whisker_low,whisker_high,n_outliers\n";
  for (const auto& b : rows)
    out << group_by << ',' << text::csv_field(b.group) << ',' << to_string(b.action) << ',' << b.n << ','
        << text::fmt_double(b.min) << ',' << text::fmt_double(b.q1) << ',' << text::fmt_double(b.median) << ','
        << text::fmt_double(b.q3) << ',' << text::fmt_double(b.max) << ',' << text::fmt_double(b.mean) << ','
        << text::fmt_double(b.whisker_low) << ',' << text::fmt_double(b.whisker_high) << ',' << b.n_outliers << '\n';
}

} // namespace lurk
