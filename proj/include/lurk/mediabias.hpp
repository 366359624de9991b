#pragma once

// News-outlet classification table: political leaning labels mapped onto a
// fixed numeric scale, reliability classes, URL -> registrable-domain
// matching, and per-user leaning as the mean score of shared URLs.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lurk/error.hpp"
#include "lurk/ingest.hpp"
#include "lurk/text.hpp"

namespace lurk {

enum class Leaning { ExtremeLeft, Left, LeftCenter, LeastBiased, RightCenter, Right, ExtremeRight };

inline constexpr std::array<Leaning, 7> kAllLeanings{Leaning::ExtremeLeft, Leaning::Left,  Leaning::LeftCenter,
                                                      Leaning::LeastBiased, Leaning::RightCenter, Leaning::Right,
                                                      Leaning::ExtremeRight};

inline constexpr double leaning_score(Leaning l) {
  switch (l) {
    case Leaning::ExtremeLeft: return -1.0;
    case Leaning::Left: return -0.66;
    case Leaning::LeftCenter: return -0.33;
    case Leaning::LeastBiased: return 0.0;
    case Leaning::RightCenter: return 0.33;
    case Leaning::Right: return 0.66;
    case Leaning::ExtremeRight: return 1.0;
  }
  return 0.0;
}

inline std::string_view to_string(Leaning l) {
  switch (l) {
    case Leaning::ExtremeLeft: return "ExtremeLeft";
    case Leaning::Left: return "Left";
    case Leaning::LeftCenter: return "LeftCenter";
    case Leaning::LeastBiased: return "LeastBiased";
    case Leaning::RightCenter: return "RightCenter";
    case Leaning::Right: return "Right";
    case Leaning::ExtremeRight: return "ExtremeRight";
  }
  return "LeastBiased";
}

namespace detail {
// Case-insensitive, ignoring spaces, '-' and '_'.
inline std::string label_key(std::string_view s) {
  std::string out;
  for (char c : text::trim(s))
    if (c != ' ' && c != '-' && c != '_') out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return out;
}
} // namespace detail

inline std::optional<Leaning> parse_leaning(std::string_view s) {
  const std::string k = detail::label_key(s);
  for (auto l : kAllLeanings)
    if (detail::label_key(to_string(l)) == k) return l;
  if (k == "center" || k == "leastbias") return Leaning::LeastBiased;
  return std::nullopt;
}

enum class Reliability { reliable, questionable, conspiracy_pseudoscience };

inline std::string_view to_string(Reliability r) {
  switch (r) {
    case Reliability::reliable: return "reliable";
    case Reliability::questionable: return "questionable";
    case Reliability::conspiracy_pseudoscience: return "conspiracy_pseudoscience";
  }
  return "reliable";
}

inline std::optional<Reliability> parse_reliability(std::string_view s) {
  const std::string k = detail::label_key(s);
  if (k == "reliable") return Reliability::reliable;
  if (k == "questionable") return Reliability::questionable;
  if (k == "conspiracypseudoscience" || k == "conspiracy") return Reliability::conspiracy_pseudoscience;
  return std::nullopt;
}

struct DomainProfile {
  std::string domain;
  std::optional<Leaning> leaning;
  Reliability reliability = Reliability::reliable;

  std::optional<double> leaning_score() const {
    if (!leaning) return std::nullopt;
    return lurk::leaning_score(*leaning);
  }
};

using DomainTable = std::map<std::string, DomainProfile>;

struct DomainTableDiagnostics {
  std::uint64_t rows = 0;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::size_t, std::string>> rejected;  // (line, reason)
};

// CSV with columns domain,leaning_label,reliability. An empty leaning label
// means "no leaning". Duplicate domains: the last row wins.
inline DomainTable load_domain_table(std::istream& in, DomainTableDiagnostics* diag = nullptr) {
  DomainTableDiagnostics local;
  DomainTableDiagnostics& d = diag ? *diag : local;
  DomainTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    auto f = text::split_csv(line);
    if (lineno == 1 && !f.empty() && text::lower(text::trim(f[0])) == "domain") continue;
    ++d.rows;
    if (f.size() != 3) {
      d.rejected.emplace_back(lineno, "expected 3 columns");
      continue;
    }
    DomainProfile p;
    p.domain = text::lower(text::trim(f[0]));
    if (p.domain.rfind("www.", 0) == 0) p.domain.erase(0, 4);
    if (p.domain.empty()) {
      d.rejected.emplace_back(lineno, "empty domain");
      continue;
    }
    if (!text::trim(f[1]).empty()) {
      p.leaning = parse_leaning(f[1]);
      if (!p.leaning) {
        d.rejected.emplace_back(lineno, "unknown leaning label: " + f[1]);
        continue;
      }
    }
    auto rel = parse_reliability(f[2]);
    if (!rel) {
      d.rejected.emplace_back(lineno, "unknown reliability: " + f[2]);
      continue;
    }
    p.reliability = *rel;
    if (table.contains(p.domain)) d.warnings.push_back("duplicate domain " + p.domain + " (line " + std::to_string(lineno) + " wins)");
    table[p.domain] = std::move(p);
  }
  return table;
}

inline DomainTable load_domain_table(const std::string& path, DomainTableDiagnostics* diag = nullptr) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open domain table: " + path);
  return load_domain_table(in, diag);
}

inline void write_domain_table(std::ostream& out, const DomainTable& table) {
  out << "domain,leaning_label,reliability\n";
  for (const auto& [name, p] : table)
    out << name << ',' << (p.leaning ? to_string(*p.leaning) : "") << ',' << to_string(p.reliability) << '\n';
}

// ---------------------------------------------------------------------------
// URL -> registrable domain

namespace detail {

// Multi-label public suffixes in common use by news outlets. Everything else is
// treated as a single-label suffix.
inline const std::set<std::string, std::less<>>& public_suffixes() {
  static const std::set<std::string, std::less<>> s{
      "ac.uk",  "co.uk",  "gov.uk", "ltd.uk", "me.uk",  "net.uk", "org.uk", "plc.uk", "com.au", "net.au",
      "org.au", "edu.au", "gov.au", "asn.au", "id.au",  "co.nz",  "net.nz", "org.nz", "govt.nz", "co.jp", "ne.jp",
      "or.jp",  "ac.jp",  "go.jp",  "co.in",  "net.in", "org.in", "gov.in", "co.za",  "org.za", "gov.za", "com.br",
      "net.br", "org.br", "gov.br", "com.mx", "org.mx", "gob.mx", "com.ar", "org.ar", "com.tr", "org.tr", "gov.tr",
      "com.cn", "net.cn", "org.cn", "gov.cn", "com.hk", "org.hk", "com.sg", "org.sg", "com.my", "co.kr",  "or.kr",
      "co.il",  "org.il", "com.ua", "org.ua", "in.ua",  "kiev.ua", "com.ru", "org.ru", "com.pl", "co.at",  "or.at",
      "com.es", "com.pt", "co.id",  "or.id",  "com.ph", "com.pk", "com.ng", "com.eg", "co.ke",  "com.tw", "org.tw",
      "com.vn", "co.th",  "com.co", "com.pe", "com.ve", "com.uy", "co.ve",  "gv.at"};
  return s;
}

// Link shorteners hide the real outlet; they are never matched.
inline const std::set<std::string, std::less<>>& shorteners() {
  static const std::set<std::string, std::less<>> s{"t.co",   "bit.ly", "tinyurl.com", "ow.ly",   "buff.ly",
                                                    "goo.gl", "dlvr.it", "trib.al",    "is.gd",   "lnkd.in",
                                                    "shorturl.at", "cutt.ly", "rebrand.ly", "tiny.cc", "j.mp"};
  return s;
}

inline bool valid_label(std::string_view label) {
  if (label.empty() || label.size() > 63 || label.front() == '-' || label.back() == '-') return false;
  for (char c : label)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-')) return false;
  return true;
}

} // namespace detail

// Registrable domain of an absolute http(s) URL: scheme, userinfo, port, path,
// query and fragment are stripped and the host is reduced to one label below
// its public suffix. Shortener links and invalid hosts give nullopt.
inline std::optional<std::string> extract_domain(std::string_view url) {
  url = text::trim(url);
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) return std::nullopt;
  const std::string scheme = text::lower(url.substr(0, scheme_end));
  if (scheme != "http" && scheme != "https") return std::nullopt;
  std::string_view rest = url.substr(scheme_end + 3);
  const auto auth_end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, auth_end);
  if (auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
  if (auto colon = authority.find(':'); colon != std::string_view::npos) authority = authority.substr(0, colon);
  std::string host = text::lower(authority);
  if (!host.empty() && host.back() == '.') host.pop_back();
  if (host.empty()) return std::nullopt;

  std::vector<std::string_view> labels;
  std::string_view hv = host;
  while (true) {
    auto dot = hv.find('.');
    labels.push_back(hv.substr(0, dot));
    if (dot == std::string_view::npos) break;
    hv.remove_prefix(dot + 1);
  }
  if (labels.size() < 2) return std::nullopt;
  for (auto l : labels)
    if (!detail::valid_label(l)) return std::nullopt;
  // All-numeric hosts are IP literals.
  if (std::all_of(host.begin(), host.end(), [](char c) { return (c >= '0' && c <= '9') || c == '.'; }))
    return std::nullopt;

  const std::size_t n = labels.size();
  std::size_t suffix_labels = 1;
  if (n >= 2) {
    const std::string two = std::string(labels[n - 2]) + "." + std::string(labels[n - 1]);
    if (detail::public_suffixes().contains(two)) suffix_labels = 2;
  }
  if (n <= suffix_labels) return std::nullopt;
  std::string domain;
  for (std::size_t i = n - suffix_labels - 1; i < n; ++i) {
    if (!domain.empty()) domain.push_back('.');
    domain.append(labels[i]);
  }
  if (detail::shorteners().contains(domain)) return std::nullopt;
  return domain;
}

// ---------------------------------------------------------------------------
// per-user leaning

struct LeaningOptions {
  bool include_unreliable = true;  // labeled questionable/conspiracy outlets count toward the mean
};

struct UserLeaning {
  std::string user_id;
  std::uint64_t n_urls = 0;        // matched URLs with a leaning score
  std::uint64_t unmatched_urls = 0;
  std::optional<double> score;     // absent when n_urls == 0
};

// Matches a URL against the table; nullopt when no profile applies.
inline const DomainProfile* match_url(const DomainTable& table, std::string_view url) {
  auto d = extract_domain(url);
  if (!d) return nullptr;
  auto it = table.find(*d);
  return it == table.end() ? nullptr : &it->second;
}

// Mean leaning score over every URL occurrence (with multiplicity).
template <typename Range>
UserLeaning user_leaning(std::string user_id, const Range& records, const DomainTable& table,
                         LeaningOptions opts = {}) {
  UserLeaning out;
  out.user_id = std::move(user_id);
  double sum = 0.0;
  for (const TweetRecord& r : records) {
    for (const auto& url : r.urls) {
      const DomainProfile* p = match_url(table, url);
      if (!p || !p->leaning || (!opts.include_unreliable && p->reliability != Reliability::reliable)) {
        ++out.unmatched_urls;
        continue;
      }
      sum += leaning_score(*p->leaning);
      ++out.n_urls;
    }
  }
  if (out.n_urls > 0) out.score = sum / static_cast<double>(out.n_urls);
  return out;
}

// Streaming accumulator for all users at once. Output is ordered by user id.
class LeaningAccumulator {
public:
  LeaningAccumulator(DomainTable table, LeaningOptions opts = {}) : table_(std::move(table)), opts_(opts) {}

  void add(const TweetRecord& r) {
    auto& acc = per_user_[r.author_id];
    for (const auto& url : r.urls) {
      const DomainProfile* p = match_url(table_, url);
      if (!p) {
        ++acc.unmatched;
        continue;
      }
      ++acc.class_shares[p->leaning ? static_cast<int>(*p->leaning) : -1];
      if (!p->leaning || (!opts_.include_unreliable && p->reliability != Reliability::reliable)) {
        ++acc.unmatched;
        continue;
      }
      acc.sum += leaning_score(*p->leaning);
      ++acc.matched;
    }
  }

  std::vector<UserLeaning> results() const {
    std::vector<UserLeaning> out;
    for (const auto& [id, acc] : per_user_) {
      UserLeaning u{id, acc.matched, acc.unmatched, std::nullopt};
      if (acc.matched > 0) u.score = acc.sum / static_cast<double>(acc.matched);
      out.push_back(std::move(u));
    }
    return out;
  }

  // Number of URL occurrences per leaning class, per user. Unlabeled outlets
  // are not counted.
  std::map<std::string, std::map<Leaning, std::uint64_t>> class_shares() const {
    std::map<std::string, std::map<Leaning, std::uint64_t>> out;
    for (const auto& [id, acc] : per_user_)
      for (const auto& [cls, n] : acc.class_shares)
        if (cls >= 0) out[id][static_cast<Leaning>(cls)] = n;
    return out;
  }

private:
  struct Acc {
    double sum = 0.0;
    std::uint64_t matched = 0;
    std::uint64_t unmatched = 0;
    std::map<int, std::uint64_t> class_shares;
  };
  DomainTable table_;
  LeaningOptions opts_;
  std::map<std::string, Acc> per_user_;
};

inline void write_user_leaning_csv(std::ostream& out, const std::vector<UserLeaning>& rows) {
  out << "user_id,n_urls,score\n";
  for (const auto& u : rows)
    out << text::csv_field(u.user_id) << ',' << u.n_urls << ',' << (u.score ? text::fmt_double(*u.score) : "") << '\n';
}

} // namespace lurk
