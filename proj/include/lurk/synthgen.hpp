#pragma once

// Seeded generator of synthetic polarized corpora with known ground truth
// (planted communities, hub influencers, engagement rates, domain sharing),
// plus a dense reference implementation of correspondence analysis.
//
// Random stream: a single std::mt19937_64 (fully specified by the standard)
// with every distribution implemented here, so output bytes do not depend on
// the standard library vendor.
//   uniform()   = (next() >> 11) * 2^-53
//   normal()    = Box-Muller, both variates used in turn
//   poisson(l)  = Knuth product method for l < 30, else rounded normal
//   binomial    = BINV inversion when n*min(p,1-p) < 30, else rounded normal

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "lurk/engagement.hpp"
#include "lurk/error.hpp"
#include "lurk/graph.hpp"
#include "lurk/ingest.hpp"
#include "lurk/mediabias.hpp"
#include "lurk/text.hpp"

namespace lurk {

class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Open interval (0, 1), safe for logarithms.
  double uniform_pos() {
    double u = 0.0;
    while (u == 0.0) u = uniform();
    return u;
  }

  std::size_t index(std::size_t n) {
    if (n == 0) throw Error("index(0)");
    return std::min(static_cast<std::size_t>(uniform() * static_cast<double>(n)), n - 1);
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos(), u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    spare_ = rad * std::sin(ang);
    has_spare_ = true;
    return rad * std::cos(ang);
  }

  std::uint64_t poisson(double lambda) {
    if (!(lambda > 0)) return 0;
    if (lambda < 30.0) {
      const double limit = std::exp(-lambda);
      std::uint64_t k = 0;
      double p = 1.0;
      for (;;) {
        p *= uniform();
        if (p <= limit) return k;
        ++k;
      }
    }
    const double x = std::round(lambda + std::sqrt(lambda) * normal());
    return x < 0 ? 0 : static_cast<std::uint64_t>(x);
  }

  std::uint64_t binomial(std::uint64_t n, double p) {
    if (n == 0 || !(p > 0)) return 0;
    if (p >= 1.0) return n;
    if (p > 0.5) return n - binomial(n, 1.0 - p);
    const double nd = static_cast<double>(n);
    const double q = 1.0 - p;
    if (nd * p < 30.0) {
      const double s = p / q;
      const double a = (nd + 1.0) * s;
      double r = std::pow(q, nd);
      double u = uniform();
      std::uint64_t x = 0;
      while (u > r) {
        u -= r;
        ++x;
        if (x > n) return n;
        r *= a / static_cast<double>(x) - s;
        if (!(r > 0)) break;
      }
      return x;
    }
    const double x = std::round(nd * p + std::sqrt(nd * p * q) * normal());
    return static_cast<std::uint64_t>(std::clamp(x, 0.0, nd));
  }

  // Continuous Pareto with scale xmin and tail index alpha.
  double pareto(double xmin, double alpha) { return xmin * std::pow(uniform_pos(), -1.0 / alpha); }

  template <typename Weights>
  std::size_t categorical(const Weights& w) {
    double total = 0.0;
    for (double x : w) total += x;
    if (!(total > 0)) throw Error("categorical weights sum to zero");
    double u = uniform() * total;
    std::size_t i = 0;
    for (double x : w) {
      if (u < x) return i;
      u -= x;
      ++i;
    }
    return i - 1;
  }

private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// ---------------------------------------------------------------------------
// configuration

using LeaningMix = std::array<double, 7>;  // ExtremeLeft .. ExtremeRight

struct GeneratorConfig {
  std::uint64_t seed = 1;
  std::size_t n_users = 1000;
  std::size_t n_influencers_per_side = 10;
  double community_a_fraction = 0.5;
  double p_in = 0.3;
  double p_cross = 0.015;
  double top_hub_boost = 1.5;       // p_in multiplier for the first A-side influencer
  double retweets_per_edge = 1.7;   // mean multiplicity of a planted user -> influencer edge
  double self_retweet_rate = 0.01;  // per-user probability of one self-retweet

  double originals_per_author = 20.0;
  double followers_min = 50.0;
  double followers_alpha = 1.0;
  double followers_max = 5e7;
  double impressions_log10_mean = 6.0;
  double impressions_log10_sd = 0.4;
  double zero_impression_rate = 0.002;

  ActionValues ae_targets{0.002909, 0.002479, 0.011154, 0.000612};  // retweet, reply, like, quote
  ActionValues log_pearson_targets{-0.3469, -0.5649, -0.2250, -0.5690};
  double ae_log10_sd = 0.35;
  std::map<std::string, double> lurk_rate_by_group;  // "A", "B"; default 1 - sum(ae_targets)

  double url_probability = 0.6;
  std::map<std::string, LeaningMix> domain_mix;        // per community, over reliable outlets
  std::map<std::string, double> unreliable_share;      // per community, among URL tweets
  double unreliable_ae_factor = 2.0;
  double unmatched_url_probability = 0.1;

  double noise_fraction = 0.25;    // extra records that the filters or the analysis ignore
  std::size_t total_records = 0;   // when > 0, noise pads the corpus to exactly this size

  std::string start_date = "2022-11-22T00:00:00Z";
  std::string cutoff_date = "2022-12-15T00:00:00Z";
  std::string end_date = "2023-03-01T00:00:00Z";

  double lurk_rate(const std::string& group) const {
    if (auto it = lurk_rate_by_group.find(group); it != lurk_rate_by_group.end()) return it->second;
    double s = 0.0;
    for (double t : ae_targets) s += t;
    return 1.0 - s;
  }
  LeaningMix mix(const std::string& group) const {
    if (auto it = domain_mix.find(group); it != domain_mix.end()) return it->second;
    return group == "A" ? LeaningMix{0.25, 0.30, 0.25, 0.12, 0.05, 0.02, 0.01}
                        : LeaningMix{0.01, 0.02, 0.05, 0.12, 0.25, 0.30, 0.25};
  }
  double unreliable(const std::string& group) const {
    if (auto it = unreliable_share.find(group); it != unreliable_share.end()) return it->second;
    return group == "A" ? 0.1 : 0.3;
  }

  void validate() const {
    if (n_users == 0) throw Error("config: n_users must be positive");
    if (n_influencers_per_side == 0) throw Error("config: at least one influencer per side is required");
    if (!(p_in > p_cross) || p_cross < 0 || p_in > 1) throw Error("config: need 1 >= p_in > p_cross >= 0");
    if (!(community_a_fraction > 0 && community_a_fraction < 1))
      throw Error("config: community_a_fraction must lie in (0, 1)");
    if (!(retweets_per_edge >= 1)) throw Error("config: retweets_per_edge must be >= 1");
    if (!(originals_per_author >= 1)) throw Error("config: originals_per_author must be >= 1");
    if (!(followers_min >= 1) || !(followers_alpha > 0) || !(followers_max > followers_min))
      throw Error("config: invalid follower distribution");
    if (!(impressions_log10_sd >= 0)) throw Error("config: impressions_log10_sd must be >= 0");
    if (!(ae_log10_sd > 0)) throw Error("config: ae_log10_sd must be positive");
    for (double t : ae_targets)
      if (!(t > 0 && t < 1)) throw Error("config: AE targets must lie in (0, 1)");
    for (double r : log_pearson_targets)
      if (!(r > -1 && r < 1)) throw Error("config: correlation targets must lie in (-1, 1)");
    for (const char* g : {"A", "B"}) {
      const double l = lurk_rate(g);
      if (!(l >= 0 && l < 1)) throw Error(std::string("config: lurk rate for group ") + g + " must lie in [0, 1)");
      const double u = unreliable(g);
      if (!(u >= 0 && u <= 1)) throw Error("config: unreliable_share must lie in [0, 1]");
      for (double w : mix(g))
        if (w < 0) throw Error("config: negative domain_mix weight");
    }
    for (double p : {self_retweet_rate, zero_impression_rate, url_probability, unmatched_url_probability})
      if (!(p >= 0 && p <= 1)) throw Error("config: probabilities must lie in [0, 1]");
    if (!(unreliable_ae_factor > 0)) throw Error("config: unreliable_ae_factor must be positive");
    if (!(noise_fraction >= 0)) throw Error("config: noise_fraction must be >= 0");
    auto s = parse_timestamp(start_date), c = parse_timestamp(cutoff_date), e = parse_timestamp(end_date);
    if (!s || !c || !e) throw Error("config: invalid date");
    if (!(s->value < c->value && c->value < e->value)) throw Error("config: need start < cutoff < end");
  }

  // Small corpus used by the test fixtures: 10 hubs, exactly 1,000 records.
  static GeneratorConfig mini() {
    GeneratorConfig c;
    c.seed = 7;
    c.n_users = 100;
    c.n_influencers_per_side = 5;
    c.p_in = 0.6;
    c.p_cross = 0.03;
    c.top_hub_boost = 1.5;
    c.retweets_per_edge = 1.5;
    c.originals_per_author = 3.0;
    c.total_records = 1000;
    return c;
  }
};

namespace detail {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

} // namespace detail

inline nlohmann::json to_json(const GeneratorConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  j["n_users"] = c.n_users;
  j["n_influencers_per_side"] = c.n_influencers_per_side;
  j["community_a_fraction"] = c.community_a_fraction;
  j["p_in"] = c.p_in;
  j["p_cross"] = c.p_cross;
  j["top_hub_boost"] = c.top_hub_boost;
  j["retweets_per_edge"] = c.retweets_per_edge;
  j["self_retweet_rate"] = c.self_retweet_rate;
  j["originals_per_author"] = c.originals_per_author;
  j["followers_min"] = c.followers_min;
  j["followers_alpha"] = c.followers_alpha;
  j["followers_max"] = c.followers_max;
  j["impressions_log10_mean"] = c.impressions_log10_mean;
  j["impressions_log10_sd"] = c.impressions_log10_sd;
  j["zero_impression_rate"] = c.zero_impression_rate;
  j["ae_targets"] = c.ae_targets;
  j["log_pearson_targets"] = c.log_pearson_targets;
  j["ae_log10_sd"] = c.ae_log10_sd;
  j["lurk_rate_by_group"] = {{"A", c.lurk_rate("A")}, {"B", c.lurk_rate("B")}};
  j["url_probability"] = c.url_probability;
  j["domain_mix"] = {{"A", c.mix("A")}, {"B", c.mix("B")}};
  j["unreliable_share"] = {{"A", c.unreliable("A")}, {"B", c.unreliable("B")}};
  j["unreliable_ae_factor"] = c.unreliable_ae_factor;
  j["unmatched_url_probability"] = c.unmatched_url_probability;
  j["noise_fraction"] = c.noise_fraction;
  j["total_records"] = c.total_records;
  j["start_date"] = c.start_date;
  j["cutoff_date"] = c.cutoff_date;
  j["end_date"] = c.end_date;
  return j;
}

// Missing keys keep their defaults; unknown keys are rejected to catch typos.
// `"preset": "mini"` starts from the mini configuration.
inline GeneratorConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("generator config must be a JSON object");
  GeneratorConfig c;
  if (auto it = j.find("preset"); it != j.end()) {
    const auto name = it->get<std::string>();
    if (name == "mini")
      c = GeneratorConfig::mini();
    else if (name != "default")
      throw Error("unknown generator preset: " + name);
  }
  const nlohmann::json known = to_json(c);
  for (const auto& [key, value] : j.items())
    if (key != "preset" && !known.contains(key)) throw Error("unknown generator config key: " + key);
  try {
    detail::read_opt(j, "seed", c.seed);
    detail::read_opt(j, "n_users", c.n_users);
    detail::read_opt(j, "n_influencers_per_side", c.n_influencers_per_side);
    detail::read_opt(j, "community_a_fraction", c.community_a_fraction);
    detail::read_opt(j, "p_in", c.p_in);
    detail::read_opt(j, "p_cross", c.p_cross);
    detail::read_opt(j, "top_hub_boost", c.top_hub_boost);
    detail::read_opt(j, "retweets_per_edge", c.retweets_per_edge);
    detail::read_opt(j, "self_retweet_rate", c.self_retweet_rate);
    detail::read_opt(j, "originals_per_author", c.originals_per_author);
    detail::read_opt(j, "followers_min", c.followers_min);
    detail::read_opt(j, "followers_alpha", c.followers_alpha);
    detail::read_opt(j, "followers_max", c.followers_max);
    detail::read_opt(j, "impressions_log10_mean", c.impressions_log10_mean);
    detail::read_opt(j, "impressions_log10_sd", c.impressions_log10_sd);
    detail::read_opt(j, "zero_impression_rate", c.zero_impression_rate);
    detail::read_opt(j, "ae_targets", c.ae_targets);
    detail::read_opt(j, "log_pearson_targets", c.log_pearson_targets);
    detail::read_opt(j, "ae_log10_sd", c.ae_log10_sd);
    detail::read_opt(j, "lurk_rate_by_group", c.lurk_rate_by_group);
    detail::read_opt(j, "url_probability", c.url_probability);
    detail::read_opt(j, "domain_mix", c.domain_mix);
    detail::read_opt(j, "unreliable_share", c.unreliable_share);
    detail::read_opt(j, "unreliable_ae_factor", c.unreliable_ae_factor);
    detail::read_opt(j, "unmatched_url_probability", c.unmatched_url_probability);
    detail::read_opt(j, "noise_fraction", c.noise_fraction);
    detail::read_opt(j, "total_records", c.total_records);
    detail::read_opt(j, "start_date", c.start_date);
    detail::read_opt(j, "cutoff_date", c.cutoff_date);
    detail::read_opt(j, "end_date", c.end_date);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid generator config: ") + e.what());
  }
  c.validate();
  return c;
}

inline GeneratorConfig load_generator_config(const std::string& path) {
  auto in = text::open_input(path);
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error("generator config is not valid JSON: " + path);
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// bundled outlet table

struct SyntheticOutlet {
  const char* domain;
  std::optional<Leaning> leaning;
  Reliability reliability;
  char community;  // preferred sharer for unreliable outlets, '-' for reliable ones
};

inline const std::vector<SyntheticOutlet>& synthetic_outlets() {
  using L = Leaning;
  using R = Reliability;
  static const std::vector<SyntheticOutlet> v{
      {"redbanner-news.com", L::ExtremeLeft, R::reliable, '-'},
      {"peoplesvoice-daily.org", L::ExtremeLeft, R::reliable, '-'},
      {"leftfront.net", L::ExtremeLeft, R::reliable, '-'},
      {"progressive-times.com", L::Left, R::reliable, '-'},
      {"leftside-herald.co.uk", L::Left, R::reliable, '-'},
      {"bluewave-journal.com", L::Left, R::reliable, '-'},
      {"metro-ledger.com", L::LeftCenter, R::reliable, '-'},
      {"civic-chronicle.org", L::LeftCenter, R::reliable, '-'},
      {"eastbay-courier.com", L::LeftCenter, R::reliable, '-'},
      {"wire-report.com", L::LeastBiased, R::reliable, '-'},
      {"factline-news.com", L::LeastBiased, R::reliable, '-'},
      {"neutral-gazette.co.uk", L::LeastBiased, R::reliable, '-'},
      {"market-observer.com", L::RightCenter, R::reliable, '-'},
      {"heartland-tribune.com", L::RightCenter, R::reliable, '-'},
      {"capital-review.com.au", L::RightCenter, R::reliable, '-'},
      {"liberty-dispatch.com", L::Right, R::reliable, '-'},
      {"patriot-post-daily.com", L::Right, R::reliable, '-'},
      {"redstate-wire.net", L::Right, R::reliable, '-'},
      {"ironflag-news.com", L::ExtremeRight, R::reliable, '-'},
      {"nationfirst-report.com", L::ExtremeRight, R::reliable, '-'},
      {"truecourse-media.org", L::ExtremeRight, R::reliable, '-'},
      {"real-left-leaks.com", L::ExtremeLeft, R::questionable, 'A'},
      {"anticap-truth.net", L::Left, R::questionable, 'A'},
      {"hidden-cures-now.com", std::nullopt, R::conspiracy_pseudoscience, 'A'},
      {"freedom-alarm.com", L::ExtremeRight, R::questionable, 'B'},
      {"eagle-truth-report.com", L::Right, R::questionable, 'B'},
      {"deepstate-watch.net", L::ExtremeRight, R::questionable, 'B'},
      {"wake-up-patriot.org", L::Right, R::questionable, 'B'},
      {"chemtrail-alert.net", std::nullopt, R::conspiracy_pseudoscience, 'B'},
      {"moonhoax-files.org", std::nullopt, R::conspiracy_pseudoscience, 'B'},
  };
  return v;
}

inline DomainTable synthetic_domain_table() {
  DomainTable t;
  for (const auto& o : synthetic_outlets()) t[o.domain] = DomainProfile{o.domain, o.leaning, o.reliability};
  return t;
}

// ---------------------------------------------------------------------------
// generation

struct GroundTruth {
  std::map<std::string, char> community;  // users and influencers -> 'A' | 'B'
  std::vector<std::string> planted_hubs;  // all influencers, A side first
  std::string top_hub;
  std::string anchor;
  ActionValues target_ae{};
  std::map<std::string, ActionValues> target_ae_by_group;
  ActionValues target_log_pearson{};
  std::uint64_t records = 0;
  std::uint64_t planted_retweets = 0;
  std::uint64_t planted_edges = 0;
  std::uint64_t self_retweets = 0;
  std::uint64_t originals = 0;
  std::uint64_t noise_records = 0;
  std::uint64_t pre_cutoff_records = 0;
  std::uint64_t non_english_records = 0;
  std::uint64_t reply_quote_records = 0;
};

struct GeneratedCorpus {
  GeneratorConfig config;
  std::vector<TweetRecord> records;  // chronological, tweet ids assigned in that order
  GroundTruth truth;
  DomainTable domains;
  std::vector<std::string> seeds;    // hubs plus one below-threshold user and one absent id
};

namespace detail {

inline std::string padded(const std::string& prefix, std::size_t i, std::size_t width) {
  std::string n = std::to_string(i);
  if (n.size() < width) n.insert(0, width - n.size(), '0');
  return prefix + n;
}

inline std::size_t digits_for(std::size_t n) {
  std::size_t d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

} // namespace detail

inline GeneratedCorpus generate(const GeneratorConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  GeneratedCorpus out;
  out.config = cfg;
  out.domains = synthetic_domain_table();
  GroundTruth& truth = out.truth;

  const Timestamp t_start = parse_timestamp(cfg.start_date)->value;
  const Timestamp t_cut = parse_timestamp(cfg.cutoff_date)->value;
  const Timestamp t_end = parse_timestamp(cfg.end_date)->value;
  auto time_in = [&](Timestamp lo, Timestamp hi) {
    const auto span = (hi - lo).count();
    return lo + std::chrono::seconds(static_cast<std::int64_t>(rng.uniform() * static_cast<double>(span)));
  };

  // actors
  const std::size_t uw = std::max<std::size_t>(4, detail::digits_for(cfg.n_users - 1));
  const std::size_t iw = std::max<std::size_t>(2, detail::digits_for(cfg.n_influencers_per_side - 1));
  struct Actor {
    std::string id;
    char community;
    bool influencer;
    std::uint64_t followers;
  };
  std::vector<Actor> actors;
  for (std::size_t i = 0; i < cfg.n_users; ++i)
    actors.push_back({detail::padded("u", i, uw), rng.bernoulli(cfg.community_a_fraction) ? 'A' : 'B', false, 0});
  std::vector<std::size_t> infl_a, infl_b;
  for (char side : {'A', 'B'})
    for (std::size_t k = 0; k < cfg.n_influencers_per_side; ++k) {
      (side == 'A' ? infl_a : infl_b).push_back(actors.size());
      actors.push_back({detail::padded(std::string("i") + side, k, iw), side, true, 0});
    }
  for (auto& a : actors) {
    const double f = std::min(rng.pareto(cfg.followers_min, cfg.followers_alpha), cfg.followers_max);
    a.followers = static_cast<std::uint64_t>(std::floor(f));
    truth.community[a.id] = a.community;
  }
  for (auto i : infl_a) truth.planted_hubs.push_back(actors[i].id);
  for (auto i : infl_b) truth.planted_hubs.push_back(actors[i].id);
  truth.top_hub = actors[infl_a.front()].id;
  truth.anchor = truth.top_hub;

  struct Draft {
    TweetRecord rec;
    std::uint64_t order;
  };
  std::vector<Draft> drafts;
  auto push = [&](TweetRecord r) { drafts.push_back({std::move(r), drafts.size()}); };

  // retweet network
  for (std::size_t u = 0; u < cfg.n_users; ++u) {
    const Actor& user = actors[u];
    for (auto* side : {&infl_a, &infl_b}) {
      for (std::size_t pos = 0; pos < side->size(); ++pos) {
        const Actor& target = actors[(*side)[pos]];
        double p = target.community == user.community ? cfg.p_in : cfg.p_cross;
        if (target.id == truth.top_hub && target.community == user.community) p = std::min(1.0, p * cfg.top_hub_boost);
        if (!rng.bernoulli(p)) continue;
        ++truth.planted_edges;
        const std::uint64_t mult = 1 + rng.poisson(cfg.retweets_per_edge - 1.0);
        for (std::uint64_t k = 0; k < mult; ++k) {
          TweetRecord r;
          r.author_id = user.id;
          r.created_at = time_in(t_cut, t_end);
          r.lang = "en";
          r.kind = TweetKind::retweet;
          r.retweeted_author_id = target.id;
          r.author_followers = user.followers;
          push(std::move(r));
          ++truth.planted_retweets;
        }
      }
    }
    if (rng.bernoulli(cfg.self_retweet_rate)) {
      TweetRecord r;
      r.author_id = user.id;
      r.created_at = time_in(t_cut, t_end);
      r.lang = "en";
      r.kind = TweetKind::retweet;
      r.retweeted_author_id = user.id;
      r.author_followers = user.followers;
      push(std::move(r));
      ++truth.self_retweets;
    }
  }

  // original tweets: skeleton first, engagement in a second pass once the
  // follower standardization is known
  const auto& outlets = synthetic_outlets();
  std::map<char, std::vector<std::size_t>> unreliable_pool;
  std::array<std::vector<std::size_t>, 7> reliable_by_class;
  for (std::size_t i = 0; i < outlets.size(); ++i) {
    if (outlets[i].reliability == Reliability::reliable)
      reliable_by_class[static_cast<std::size_t>(*outlets[i].leaning)].push_back(i);
    else
      unreliable_pool[outlets[i].community].push_back(i);
  }
  const double share_a = cfg.community_a_fraction;
  const double q_unrel =
      cfg.url_probability * (share_a * cfg.unreliable("A") + (1.0 - share_a) * cfg.unreliable("B"));
  const double m_rel = 1.0 / (1.0 + (cfg.unreliable_ae_factor - 1.0) * q_unrel);
  const double m_unrel = cfg.unreliable_ae_factor * m_rel;
  double target_sum = 0.0;
  for (double t : cfg.ae_targets) target_sum += t;

  struct OriginalDraft {
    std::size_t draft;
    std::size_t actor;
    double multiplier;  // reliability and group factors
  };
  std::vector<OriginalDraft> originals;
  std::uint64_t story = 0;
  for (std::size_t a = 0; a < actors.size(); ++a) {
    const Actor& author = actors[a];
    const std::string group(1, author.community);
    const double group_factor = (1.0 - cfg.lurk_rate(group)) / target_sum;
    const std::uint64_t n = 1 + rng.poisson(cfg.originals_per_author - 1.0);
    for (std::uint64_t k = 0; k < n; ++k) {
      TweetRecord r;
      r.author_id = author.id;
      r.created_at = time_in(t_cut, t_end);
      r.lang = "en";
      r.kind = TweetKind::original;
      r.author_followers = author.followers;
      double m = m_rel;
      if (rng.bernoulli(cfg.url_probability)) {
        std::size_t outlet = 0;
        if (rng.bernoulli(cfg.unreliable(group))) {
          const auto& pool = unreliable_pool[author.community];
          outlet = pool[rng.index(pool.size())];
          m = m_unrel;
        } else {
          const auto& cls = reliable_by_class[rng.categorical(cfg.mix(group))];
          outlet = cls[rng.index(cls.size())];
        }
        static constexpr std::array<const char*, 3> prefixes{"https://www.", "https://", "http://news."};
        r.urls.push_back(std::string(prefixes[rng.index(prefixes.size())]) + outlets[outlet].domain + "/story/" +
                         std::to_string(++story));
      }
      if (rng.bernoulli(cfg.unmatched_url_probability)) {
        static constexpr std::array<const char*, 4> others{"https://t.co/", "https://bit.ly/",
                                                           "https://www.personal-blog.net/post/",
                                                           "https://video-share.com/watch?v="};
        r.urls.push_back(std::string(others[rng.index(others.size())]) + std::to_string(rng.next() % 1000000));
      }
      originals.push_back({drafts.size(), a, m * group_factor});
      push(std::move(r));
    }
  }
  truth.originals = originals.size();

  // Engagement model per action a:
  //   log10 rate = log10(target_a * K_a * multiplier) + rho_a * sd * z + e,
  // z = empirically standardized log10 followers, e ~ N(0, sd_e^2) with
  //   sd_e^2 = sd^2 (1 - rho_a^2) - var(log10 multiplier),
  // so corr(log10 followers, log10 rate) = rho_a and mean rate = target_a.
  std::vector<double> z(originals.size());
  {
    double s = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < originals.size(); ++i) {
      z[i] = std::log10(static_cast<double>(actors[originals[i].actor].followers));
      s += z[i];
    }
    const double mean = s / static_cast<double>(z.size());
    for (double v : z) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(z.size()));
    for (double& v : z) v = sd > 0 ? (v - mean) / sd : 0.0;
  }
  double var_shift = 0.0;
  {
    double s = 0.0, ss = 0.0;
    for (const auto& o : originals) {
      const double l = std::log10(o.multiplier);
      s += l;
      ss += l * l;
    }
    const double n = static_cast<double>(originals.size());
    var_shift = std::max(0.0, ss / n - (s / n) * (s / n));
  }
  const double sd = cfg.ae_log10_sd;
  ActionValues slope{}, sd_noise{}, norm{};
  for (std::size_t a = 0; a < 4; ++a) {
    const double rho = cfg.log_pearson_targets[a];
    const double noise_var = sd * sd * (1.0 - rho * rho) - var_shift;
    if (!(noise_var > 0))
      throw Error("config: ae_log10_sd too small for the requested correlation and group/reliability effects");
    slope[a] = rho * sd;
    sd_noise[a] = std::sqrt(noise_var);
    double mean_pow = 0.0;
    for (double zi : z) mean_pow += std::pow(10.0, slope[a] * zi);
    mean_pow /= static_cast<double>(z.size());
    const double noise_mean = std::exp(0.5 * std::pow(sd_noise[a] * std::numbers::ln10, 2.0));
    norm[a] = 1.0 / (mean_pow * noise_mean);
  }
  for (std::size_t i = 0; i < originals.size(); ++i) {
    TweetRecord& r = drafts[originals[i].draft].rec;
    if (rng.bernoulli(cfg.zero_impression_rate)) {
      r.impressions = 0;
      continue;
    }
    const double li = cfg.impressions_log10_mean + cfg.impressions_log10_sd * rng.normal();
    r.impressions = static_cast<std::uint64_t>(std::max(1.0, std::round(std::pow(10.0, li))));
    for (auto act : kAllActions) {
      const std::size_t a = index_of(act);
      const double lr = std::log10(cfg.ae_targets[a] * norm[a] * originals[i].multiplier) + slope[a] * z[i] +
                        sd_noise[a] * rng.normal();
      const double rate = std::min(0.5, std::pow(10.0, lr));
      const std::uint64_t c = rng.binomial(r.impressions, rate);
      switch (act) {
        case Action::retweet: r.retweets = c; break;
        case Action::reply: r.replies = c; break;
        case Action::like: r.likes = c; break;
        case Action::quote: r.quotes = c; break;
      }
    }
  }

  for (std::size_t a = 0; a < 4; ++a) truth.target_ae[a] = cfg.ae_targets[a];
  for (const char* g : {"A", "B"}) {
    const double factor = (1.0 - cfg.lurk_rate(g)) / target_sum;
    const double expected_m = 1.0 + (cfg.unreliable_ae_factor - 1.0) * cfg.url_probability * cfg.unreliable(g);
    ActionValues v{};
    for (std::size_t a = 0; a < 4; ++a) v[a] = cfg.ae_targets[a] * factor * expected_m * m_rel;
    truth.target_ae_by_group[g] = v;
  }
  truth.target_log_pearson = cfg.log_pearson_targets;

  // noise: pre-cutoff, non-English, replies and quotes
  const std::size_t planted = drafts.size();
  std::size_t n_noise = 0;
  if (cfg.total_records > 0) {
    if (planted > cfg.total_records)
      throw Error("config: total_records " + std::to_string(cfg.total_records) + " is smaller than the " +
                  std::to_string(planted) + " planted records");
    n_noise = cfg.total_records - planted;
  } else {
    n_noise = static_cast<std::size_t>(std::llround(cfg.noise_fraction * static_cast<double>(planted)));
  }
  static constexpr std::array<const char*, 4> foreign{"es", "de", "fr", "uk"};
  for (std::size_t k = 0; k < n_noise; ++k) {
    const Actor& author = actors[rng.index(cfg.n_users)];
    const Actor& target = actors[cfg.n_users + rng.index(2 * cfg.n_influencers_per_side)];
    TweetRecord r;
    r.author_id = author.id;
    r.author_followers = author.followers;
    const double u = rng.uniform();
    if (u < 0.5) {
      r.created_at = time_in(t_start, t_cut);
      r.lang = "en";
      r.kind = rng.bernoulli(0.5) ? TweetKind::original : TweetKind::retweet;
      ++truth.pre_cutoff_records;
    } else if (u < 0.75) {
      r.created_at = time_in(t_cut, t_end);
      r.lang = foreign[rng.index(foreign.size())];
      r.kind = rng.bernoulli(0.5) ? TweetKind::original : TweetKind::retweet;
      ++truth.non_english_records;
    } else {
      r.created_at = time_in(t_cut, t_end);
      r.lang = "en";
      r.kind = rng.bernoulli(0.5) ? TweetKind::reply : TweetKind::quote;
      ++truth.reply_quote_records;
    }
    if (r.kind == TweetKind::retweet || r.kind == TweetKind::quote) r.retweeted_author_id = target.id;
    if (r.kind != TweetKind::retweet) {
      r.impressions = static_cast<std::uint64_t>(std::round(std::pow(10.0, 3.0 + 2.0 * rng.uniform())));
      r.likes = rng.binomial(r.impressions, 0.01);
      r.replies = rng.binomial(r.impressions, 0.002);
      r.retweets = rng.binomial(r.impressions, 0.003);
      r.quotes = rng.binomial(r.impressions, 0.0005);
    }
    push(std::move(r));
  }
  truth.noise_records = n_noise;

  std::stable_sort(drafts.begin(), drafts.end(), [](const Draft& a, const Draft& b) {
    return a.rec.created_at != b.rec.created_at ? a.rec.created_at < b.rec.created_at : a.order < b.order;
  });
  const std::size_t tw = std::max<std::size_t>(8, detail::digits_for(drafts.size()));
  out.records.reserve(drafts.size());
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    drafts[i].rec.tweet_id = detail::padded("t", i, tw);
    out.records.push_back(std::move(drafts[i].rec));
  }
  truth.records = out.records.size();

  out.seeds = truth.planted_hubs;
  out.seeds.push_back(actors.front().id);
  out.seeds.push_back("ghost_account");
  return out;
}

inline nlohmann::json to_json(const GroundTruth& t) {
  nlohmann::json j;
  nlohmann::json comm = nlohmann::json::object();
  for (const auto& [id, c] : t.community) comm[id] = std::string(1, c);
  j["community"] = comm;
  j["planted_hubs"] = t.planted_hubs;
  j["top_hub"] = t.top_hub;
  j["anchor"] = t.anchor;
  nlohmann::json ae = nlohmann::json::object(), pr = nlohmann::json::object();
  for (auto a : kAllActions) {
    ae[std::string(to_string(a))] = t.target_ae[index_of(a)];
    pr[std::string(to_string(a))] = t.target_log_pearson[index_of(a)];
  }
  j["target_ae"] = ae;
  j["target_log_pearson"] = pr;
  nlohmann::json by_group = nlohmann::json::object();
  for (const auto& [g, v] : t.target_ae_by_group) {
    nlohmann::json row = nlohmann::json::object();
    for (auto a : kAllActions) row[std::string(to_string(a))] = v[index_of(a)];
    by_group[g] = row;
  }
  j["target_ae_by_group"] = by_group;
  j["counts"] = {{"records", t.records},
                 {"planted_retweets", t.planted_retweets},
                 {"planted_edges", t.planted_edges},
                 {"self_retweets", t.self_retweets},
                 {"originals", t.originals},
                 {"noise_records", t.noise_records},
                 {"pre_cutoff_records", t.pre_cutoff_records},
                 {"non_english_records", t.non_english_records},
                 {"reply_quote_records", t.reply_quote_records}};
  return j;
}

inline GroundTruth ground_truth_from_json(const nlohmann::json& j) {
  GroundTruth t;
  for (const auto& [id, c] : j.at("community").items()) t.community[id] = c.get<std::string>().at(0);
  t.planted_hubs = j.at("planted_hubs").get<std::vector<std::string>>();
  t.top_hub = j.at("top_hub").get<std::string>();
  t.anchor = j.at("anchor").get<std::string>();
  for (auto a : kAllActions) {
    t.target_ae[index_of(a)] = j.at("target_ae").at(std::string(to_string(a))).get<double>();
    t.target_log_pearson[index_of(a)] = j.at("target_log_pearson").at(std::string(to_string(a))).get<double>();
  }
  for (const auto& [g, row] : j.at("target_ae_by_group").items()) {
    ActionValues v{};
    for (auto a : kAllActions) v[index_of(a)] = row.at(std::string(to_string(a))).get<double>();
    t.target_ae_by_group[g] = v;
  }
  const auto& c = j.at("counts");
  t.records = c.at("records");
  t.planted_retweets = c.at("planted_retweets");
  t.planted_edges = c.at("planted_edges");
  t.self_retweets = c.at("self_retweets");
  t.originals = c.at("originals");
  t.noise_records = c.at("noise_records");
  t.pre_cutoff_records = c.at("pre_cutoff_records");
  t.non_english_records = c.at("non_english_records");
  t.reply_quote_records = c.at("reply_quote_records");
  return t;
}

// Writes corpus.jsonl, ground_truth.json, domains.csv, seeds.txt and
// config.json into `dir` (created if needed).
inline void write_generated(const GeneratedCorpus& g, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  {
    auto out = text::open_output((base / "corpus.jsonl").string());
    for (const auto& r : g.records) out << to_flat_line(r) << '\n';
  }
  {
    auto out = text::open_output((base / "ground_truth.json").string());
    out << to_json(g.truth).dump(2) << '\n';
  }
  {
    auto out = text::open_output((base / "domains.csv").string());
    write_domain_table(out, g.domains);
  }
  {
    auto out = text::open_output((base / "config.json").string());
    out << to_json(g.config).dump(2) << '\n';
  }
  write_id_list((base / "seeds.txt").string(), g.seeds);
}

// ---------------------------------------------------------------------------
// dense reference for correspondence analysis

struct DenseSvd {
  Eigen::VectorXd singular_values;  // descending
  Eigen::MatrixXd U;                // thin, m x k
  Eigen::MatrixXd V;                // n x k
  std::size_t sweeps = 0;
};

// One-sided (Hestenes) Jacobi SVD: rotates column pairs of M until they are
// mutually orthogonal; the column norms are then the singular values.
inline DenseSvd jacobi_svd(const Eigen::MatrixXd& M) {
  const bool transposed = M.rows() < M.cols();
  Eigen::MatrixXd W = transposed ? Eigen::MatrixXd(M.transpose()) : M;
  const Eigen::Index n = W.cols();
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
  DenseSvd out;
  constexpr double eps = 1e-15;
  for (; out.sweeps < 100; ++out.sweeps) {
    bool rotated = false;
    for (Eigen::Index p = 0; p + 1 < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) {
        double alpha = 0, beta = 0, gamma = 0;
        for (Eigen::Index i = 0; i < W.rows(); ++i) {
          alpha += W(i, p) * W(i, p);
          beta += W(i, q) * W(i, q);
          gamma += W(i, p) * W(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Eigen::Index i = 0; i < W.rows(); ++i) {
          const double wp = W(i, p), wq = W(i, q);
          W(i, p) = c * wp - s * wq;
          W(i, q) = s * wp + c * wq;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double vp = V(i, p), vq = V(i, q);
          V(i, p) = c * vp - s * vq;
          V(i, q) = s * vp + c * vq;
        }
      }
    if (!rotated) break;
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::vector<double> norms(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    order[static_cast<std::size_t>(j)] = j;
    norms[static_cast<std::size_t>(j)] = W.col(j).norm();
  }
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return norms[static_cast<std::size_t>(a)] > norms[static_cast<std::size_t>(b)];
  });
  Eigen::MatrixXd left(W.rows(), n), right(n, n);
  out.singular_values.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index j = order[static_cast<std::size_t>(k)];
    const double s = norms[static_cast<std::size_t>(j)];
    out.singular_values[k] = s;
    left.col(k) = s > 0 ? Eigen::VectorXd(W.col(j) / s) : Eigen::VectorXd::Zero(W.rows());
    right.col(k) = V.col(j);
  }
  if (transposed) {
    out.U = right;
    out.V = left;
  } else {
    out.U = left;
    out.V = right;
  }
  return out;
}

struct DenseCaResult {
  Eigen::MatrixXd P;
  Eigen::VectorXd r, c;
  Eigen::MatrixXd S;
  DenseSvd svd;
  double sigma1 = 0.0;
  Eigen::VectorXd u1, v1;  // raw singular vectors; sign as returned by Jacobi
};

// Builds P, r, c and S entry by entry from the definitions and takes a full
// dense SVD. Small matrices only.
inline DenseCaResult dense_ca_oracle(const Eigen::MatrixXd& A) {
  if (A.rows() > 200 || A.cols() > 50) throw Error("dense oracle limited to 200 x 50");
  if (A.rows() == 0 || A.cols() == 0) throw Error("dense oracle: empty matrix");
  DenseCaResult out;
  const double total = A.sum();
  out.P = A / total;
  out.r = out.P.rowwise().sum();
  out.c = out.P.colwise().sum().transpose();
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    if (!(out.r[i] > 0)) throw Error("dense oracle: zero row " + std::to_string(i));
  for (Eigen::Index j = 0; j < A.cols(); ++j)
    if (!(out.c[j] > 0)) throw Error("dense oracle: zero column " + std::to_string(j));
  out.S.resize(A.rows(), A.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      out.S(i, j) = (out.P(i, j) - out.r[i] * out.c[j]) / std::sqrt(out.r[i] * out.c[j]);
  out.svd = jacobi_svd(out.S);
  out.sigma1 = out.svd.singular_values[0];
  if (!(out.sigma1 > 1e-12)) throw Error("dense oracle: degenerate matrix (S is zero)");
  out.u1 = out.svd.U.col(0);
  out.v1 = out.svd.V.col(0);
  return out;
}

} // namespace lurk
