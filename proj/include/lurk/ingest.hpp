#pragma once

// Tweet-record ingestion: line-oriented JSON parsing (plain or gzip), record
// validation, and the date/language/kind filters that define the corpus.

#include <array>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "json.hpp"
#include "lurk/error.hpp"
#include "lurk/text.hpp"

namespace lurk {

using Timestamp = std::chrono::sys_seconds;

enum class TweetKind { original, retweet, quote, reply };

inline std::string_view to_string(TweetKind k) {
  switch (k) {
    case TweetKind::original: return "original";
    case TweetKind::retweet: return "retweet";
    case TweetKind::quote: return "quote";
    case TweetKind::reply: return "reply";
  }
  return "original";
}

inline std::optional<TweetKind> parse_kind(std::string_view s) {
  if (s == "original") return TweetKind::original;
  if (s == "retweet") return TweetKind::retweet;
  if (s == "quote") return TweetKind::quote;
  if (s == "reply") return TweetKind::reply;
  return std::nullopt;
}

struct TweetRecord {
  std::string tweet_id;
  std::string author_id;
  Timestamp created_at{};
  std::string lang;
  TweetKind kind = TweetKind::original;
  std::optional<std::string> retweeted_author_id;  // retweet and quote only
  std::uint64_t impressions = 0;
  std::uint64_t likes = 0;
  std::uint64_t replies = 0;
  std::uint64_t retweets = 0;
  std::uint64_t quotes = 0;
  std::vector<std::string> urls;
  std::uint64_t author_followers = 0;

  bool is_self_retweet() const {
    return kind == TweetKind::retweet && retweeted_author_id && *retweeted_author_id == author_id;
  }
};

// ---------------------------------------------------------------------------
// timestamps

namespace detail {

inline bool digits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
  if (pos + n > s.size()) return false;
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    const char c = s[i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

} // namespace detail

struct ParsedTime {
  Timestamp value;
  bool had_zone = true;
};

// Accepts `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM:SS[.fff][Z|+HH:MM|-HH:MM]` (a space
// may replace the `T`). A missing zone is read as UTC and reported.
inline std::optional<ParsedTime> parse_timestamp(std::string_view s) {
  using namespace std::chrono;
  s = text::trim(s);
  int y = 0, mo = 0, d = 0;
  if (!detail::digits(s, 0, 4, y) || s.size() < 10 || s[4] != '-' || !detail::digits(s, 5, 2, mo) ||
      s[7] != '-' || !detail::digits(s, 8, 2, d))
    return std::nullopt;
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  ParsedTime out{sys_days{ymd}, false};
  if (s.size() == 10) return out;

  if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  if (!detail::digits(s, 11, 2, hh) || s.size() < 19 || s[13] != ':' || !detail::digits(s, 14, 2, mm) ||
      s[16] != ':' || !detail::digits(s, 17, 2, ss))
    return std::nullopt;
  if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    const std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    if (pos == start) return std::nullopt;
  }
  seconds offset{0};
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      out.had_zone = true;
    } else if ((s[pos] == '+' || s[pos] == '-') && s.size() == pos + 6 && s[pos + 3] == ':') {
      int oh = 0, om = 0;
      if (!detail::digits(s, pos + 1, 2, oh) || !detail::digits(s, pos + 4, 2, om)) return std::nullopt;
      offset = hours{oh} + minutes{om};
      if (s[pos] == '-') offset = -offset;
      out.had_zone = true;
    } else {
      return std::nullopt;
    }
  }
  out.value += hours{hh} + minutes{mm} + seconds{ss} - offset;
  return out;
}

inline std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day_point = floor<days>(t);
  const year_month_day ymd{day_point};
  const hh_mm_ss hms{t - day_point};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02ld:%02ld:%02ldZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

// Date the platform started reporting impression counts.
inline Timestamp impression_metric_release() {
  using namespace std::chrono;
  return sys_days{year{2022} / December / 15};
}

// ---------------------------------------------------------------------------
// record schemas

enum class Schema { flat, api };

inline std::optional<Schema> parse_schema(std::string_view s) {
  if (s == "flat") return Schema::flat;
  if (s == "api") return Schema::api;
  return std::nullopt;
}

// Per-run parse tallies. `rejects` is keyed by reason.
struct ParseDiagnostics {
  std::uint64_t lines = 0;
  std::uint64_t records = 0;
  std::uint64_t assumed_utc = 0;
  std::uint64_t self_retweets = 0;
  std::map<std::string, std::uint64_t> rejects;
  std::vector<std::pair<std::uint64_t, std::string>> reject_lines;  // (line number, reason)

  std::uint64_t reject_count() const {
    std::uint64_t n = 0;
    for (const auto& [reason, count] : rejects) n += count;
    return n;
  }
};

namespace detail {

struct RecordReject {
  std::string reason;
};

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) throw RecordReject{std::string("missing_field:") + key};
  return *it;
}

inline std::string get_id(const nlohmann::json& obj, const char* key) {
  const auto& v = require(obj, key);
  if (v.is_string()) {
    if (v.get_ref<const std::string&>().empty()) throw RecordReject{std::string("invalid_field:") + key};
    return v.get<std::string>();
  }
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  throw RecordReject{std::string("invalid_field:") + key};
}

inline std::uint64_t get_count(const nlohmann::json& obj, const char* key) {
  const auto& v = require(obj, key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) throw RecordReject{std::string("negative_count:") + key};
  throw RecordReject{std::string("invalid_field:") + key};
}

inline std::uint64_t get_count_or_zero(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return 0;
  return get_count(obj, key);
}

inline std::string get_string(const nlohmann::json& obj, const char* key) {
  const auto& v = require(obj, key);
  if (!v.is_string()) throw RecordReject{std::string("invalid_field:") + key};
  return v.get<std::string>();
}

inline void finish_record(TweetRecord& rec, const std::string& created, ParseDiagnostics& diag) {
  auto ts = parse_timestamp(created);
  if (!ts) throw RecordReject{"invalid_timestamp"};
  rec.created_at = ts->value;
  const bool needs_ref = rec.kind == TweetKind::retweet || rec.kind == TweetKind::quote;
  if (needs_ref && !rec.retweeted_author_id) throw RecordReject{"missing_field:retweeted_author_id"};
  if (!needs_ref && rec.retweeted_author_id) throw RecordReject{"unexpected_field:retweeted_author_id"};
  if (!ts->had_zone) ++diag.assumed_utc;
}

inline TweetRecord parse_flat(const nlohmann::json& j, ParseDiagnostics& diag) {
  TweetRecord rec;
  rec.tweet_id = get_id(j, "tweet_id");
  rec.author_id = get_id(j, "author_id");
  rec.lang = get_string(j, "lang");
  auto kind = parse_kind(get_string(j, "kind"));
  if (!kind) throw RecordReject{"invalid_field:kind"};
  rec.kind = *kind;
  if (auto it = j.find("retweeted_author_id"); it != j.end() && !it->is_null())
    rec.retweeted_author_id = get_id(j, "retweeted_author_id");
  rec.impressions = get_count(j, "impressions");
  rec.likes = get_count(j, "likes");
  rec.replies = get_count(j, "replies");
  rec.retweets = get_count(j, "retweets");
  rec.quotes = get_count(j, "quotes");
  rec.author_followers = get_count(j, "author_followers");
  if (auto it = j.find("urls"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw RecordReject{"invalid_field:urls"};
    for (const auto& u : *it) {
      if (!u.is_string()) throw RecordReject{"invalid_field:urls"};
      rec.urls.push_back(u.get<std::string>());
    }
  }
  finish_record(rec, get_string(j, "created_at"), diag);
  return rec;
}

// API-shaped records: `id`, `author_id`, `created_at`, `lang`,
// `public_metrics{impression_count, like_count, reply_count, retweet_count,
// quote_count}`, `referenced_tweets[{type, id, author_id}]`,
// `entities.urls[{expanded_url|url}]`, `author.public_metrics.followers_count`.
inline TweetRecord parse_api(const nlohmann::json& j, ParseDiagnostics& diag) {
  TweetRecord rec;
  rec.tweet_id = get_id(j, "id");
  rec.author_id = get_id(j, "author_id");
  rec.lang = get_string(j, "lang");
  const auto& pm = require(j, "public_metrics");
  if (!pm.is_object()) throw RecordReject{"invalid_field:public_metrics"};
  rec.impressions = get_count(pm, "impression_count");
  rec.likes = get_count(pm, "like_count");
  rec.replies = get_count(pm, "reply_count");
  rec.retweets = get_count(pm, "retweet_count");
  rec.quotes = get_count_or_zero(pm, "quote_count");

  rec.kind = TweetKind::original;
  if (auto it = j.find("referenced_tweets"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw RecordReject{"invalid_field:referenced_tweets"};
    for (const auto& ref : *it) {
      if (!ref.is_object()) throw RecordReject{"invalid_field:referenced_tweets"};
      const std::string type = get_string(ref, "type");
      if (type == "retweeted" || type == "quoted") {
        rec.kind = type == "retweeted" ? TweetKind::retweet : TweetKind::quote;
        rec.retweeted_author_id = get_id(ref, "author_id");
        break;
      }
      if (type == "replied_to") rec.kind = TweetKind::reply;
    }
  }
  if (auto it = j.find("entities"); it != j.end() && it->is_object()) {
    if (auto u = it->find("urls"); u != it->end() && u->is_array()) {
      for (const auto& entry : *u) {
        if (!entry.is_object()) throw RecordReject{"invalid_field:entities.urls"};
        if (auto e = entry.find("expanded_url"); e != entry.end() && e->is_string())
          rec.urls.push_back(e->get<std::string>());
        else if (auto s = entry.find("url"); s != entry.end() && s->is_string())
          rec.urls.push_back(s->get<std::string>());
      }
    }
  }
  if (auto a = j.find("author"); a != j.end() && a->is_object()) {
    if (auto m = a->find("public_metrics"); m != a->end() && m->is_object())
      rec.author_followers = get_count_or_zero(*m, "followers_count");
  }
  finish_record(rec, get_string(j, "created_at"), diag);
  return rec;
}

} // namespace detail

// Parses one line. Returns nullopt for blank lines and rejects (the latter
// tallied in `diag`).
inline std::optional<TweetRecord> parse_line(std::string_view line, Schema schema, ParseDiagnostics& diag) {
  if (text::trim(line).empty()) return std::nullopt;
  ++diag.lines;
  auto reject = [&](std::string reason) {
    ++diag.rejects[reason];
    diag.reject_lines.emplace_back(diag.lines, std::move(reason));
    return std::nullopt;
  };
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return reject("invalid_json");
  try {
    TweetRecord rec = schema == Schema::flat ? detail::parse_flat(j, diag) : detail::parse_api(j, diag);
    ++diag.records;
    if (rec.is_self_retweet()) ++diag.self_retweets;
    return rec;
  } catch (const detail::RecordReject& r) {
    return reject(r.reason);
  } catch (const nlohmann::json::exception&) {
    return reject("invalid_json");
  }
}

inline nlohmann::json to_flat_json(const TweetRecord& r) {
  nlohmann::json j;
  j["tweet_id"] = r.tweet_id;
  j["author_id"] = r.author_id;
  j["created_at"] = format_timestamp(r.created_at);
  j["lang"] = r.lang;
  j["kind"] = std::string(to_string(r.kind));
  if (r.retweeted_author_id) j["retweeted_author_id"] = *r.retweeted_author_id;
  j["impressions"] = r.impressions;
  j["likes"] = r.likes;
  j["replies"] = r.replies;
  j["retweets"] = r.retweets;
  j["quotes"] = r.quotes;
  j["urls"] = r.urls;
  j["author_followers"] = r.author_followers;
  return j;
}

inline std::string to_flat_line(const TweetRecord& r) { return to_flat_json(r).dump(); }

// ---------------------------------------------------------------------------
// streaming reader

// Reads newline-delimited records one at a time. gzip input is decoded when the
// path ends in `.gz`. Memory use is bounded by the longest line.
class CorpusReader {
public:
  CorpusReader(const std::string& path, Schema schema) : schema_(schema) {
    if (text::ends_with(path, ".gz")) {
      gz_ = gzopen(path.c_str(), "rb");
      if (!gz_) throw Error("cannot open corpus file: " + path);
    } else {
      file_ = std::fopen(path.c_str(), "rb");
      if (!file_) throw Error("cannot open corpus file: " + path);
    }
    buf_.resize(1 << 16);
  }
  CorpusReader(const CorpusReader&) = delete;
  CorpusReader& operator=(const CorpusReader&) = delete;
  ~CorpusReader() {
    if (gz_) gzclose(gz_);
    if (file_) std::fclose(file_);
  }

  // Advances to the next valid record; false at end of input.
  bool next(TweetRecord& out) {
    std::string line;
    while (read_line(line)) {
      if (auto rec = parse_line(line, schema_, diag_)) {
        out = std::move(*rec);
        return true;
      }
    }
    return false;
  }

  const ParseDiagnostics& diagnostics() const { return diag_; }

private:
  bool read_line(std::string& line) {
    line.clear();
    bool any = false;
    for (;;) {
      char* got = gz_ ? gzgets(gz_, buf_.data(), static_cast<int>(buf_.size()))
                      : std::fgets(buf_.data(), static_cast<int>(buf_.size()), file_);
      if (!got) {
        if (gz_) {
          int err = Z_OK;
          const char* msg = gzerror(gz_, &err);
          if (err != Z_OK && err != Z_STREAM_END) throw Error(std::string("gzip read error: ") + msg);
        } else if (std::ferror(file_)) {
          throw Error("read error on corpus file");
        }
        return any;
      }
      any = true;
      std::string_view chunk(got);
      if (!chunk.empty() && chunk.back() == '\n') {
        chunk.remove_suffix(1);
        line.append(chunk);
        return true;
      }
      line.append(chunk);
    }
  }

  Schema schema_;
  gzFile gz_ = nullptr;
  std::FILE* file_ = nullptr;
  std::vector<char> buf_;
  ParseDiagnostics diag_;
};

// Calls `fn(const TweetRecord&)` for every valid record in input order.
template <typename Fn>
ParseDiagnostics for_each_record(const std::string& path, Schema schema, Fn&& fn) {
  CorpusReader reader(path, schema);
  TweetRecord rec;
  while (reader.next(rec)) fn(static_cast<const TweetRecord&>(rec));
  return reader.diagnostics();
}

inline std::vector<TweetRecord> parse_corpus(const std::string& path, Schema schema,
                                             ParseDiagnostics* diag = nullptr) {
  std::vector<TweetRecord> out;
  auto d = for_each_record(path, schema, [&](const TweetRecord& r) { out.push_back(r); });
  if (diag) *diag = std::move(d);
  return out;
}

// ---------------------------------------------------------------------------
// filters

struct CorpusFilter {
  Timestamp min_date = impression_metric_release();
  std::set<std::string> allowed_langs{"en"};
  std::set<TweetKind> kinds_for_engagement{TweetKind::original};
  std::set<TweetKind> kinds_for_network{TweetKind::retweet};

  // Impression counts are meaningless before the metric existed.
  void validate_for_engagement() const {
    if (min_date < impression_metric_release())
      throw Error("min_date " + format_timestamp(min_date) +
                  " precedes the impression-metric release; engagement values would be undefined");
  }
};

enum class ExclusionReason { before_min_date, language };

inline std::string_view to_string(ExclusionReason r) {
  return r == ExclusionReason::before_min_date ? "before_min_date" : "language";
}

struct FilterStats {
  std::uint64_t input = 0;
  std::uint64_t retained = 0;
  std::map<std::string, std::uint64_t> excluded;

  std::uint64_t excluded_total() const {
    std::uint64_t n = 0;
    for (const auto& [k, v] : excluded) n += v;
    return n;
  }
};

// Date check runs first; a record is counted under its first failing reason.
inline std::optional<ExclusionReason> exclusion_reason(const TweetRecord& r, const CorpusFilter& f) {
  if (r.created_at < f.min_date) return ExclusionReason::before_min_date;
  if (!f.allowed_langs.contains(r.lang)) return ExclusionReason::language;
  return std::nullopt;
}

// Streaming filter stage with running tallies.
class RecordFilter {
public:
  explicit RecordFilter(CorpusFilter f) : filter_(std::move(f)) {
    for (auto reason : {ExclusionReason::before_min_date, ExclusionReason::language})
      stats_.excluded[std::string(to_string(reason))] = 0;
  }

  bool accept(const TweetRecord& r) {
    ++stats_.input;
    if (auto why = exclusion_reason(r, filter_)) {
      ++stats_.excluded[std::string(to_string(*why))];
      return false;
    }
    ++stats_.retained;
    return true;
  }

  const FilterStats& stats() const { return stats_; }
  const CorpusFilter& filter() const { return filter_; }

private:
  CorpusFilter filter_;
  FilterStats stats_;
};

inline std::vector<TweetRecord> apply_filters(const std::vector<TweetRecord>& records, const CorpusFilter& f,
                                              FilterStats* stats = nullptr) {
  RecordFilter filter(f);
  std::vector<TweetRecord> out;
  for (const auto& r : records)
    if (filter.accept(r)) out.push_back(r);
  if (stats) *stats = filter.stats();
  return out;
}

inline bool in_engagement_subset(const TweetRecord& r, const CorpusFilter& f = {}) {
  return f.kinds_for_engagement.contains(r.kind);
}

inline std::vector<TweetRecord> engagement_subset(const std::vector<TweetRecord>& records,
                                                  const CorpusFilter& f = {}) {
  std::vector<TweetRecord> out;
  for (const auto& r : records)
    if (in_engagement_subset(r, f)) out.push_back(r);
  return out;
}

} // namespace lurk
