#pragma once

// Plot-ready analysis artifacts: binned density grids and histograms over
// ideology scores, neighbor opinions, shared-domain leaning classes and
// engagement vs. popularity. No rendering happens here.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "lurk/dip.hpp"
#include "lurk/engagement.hpp"
#include "lurk/error.hpp"
#include "lurk/graph.hpp"
#include "lurk/ideology.hpp"
#include "lurk/mediabias.hpp"
#include "lurk/stats.hpp"
#include "lurk/text.hpp"

namespace lurk {

namespace detail {

inline std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
  if (bins == 0) throw Error("bin count must be positive");
  if (!(hi > lo)) throw Error("bin range must be increasing");
  std::vector<double> e(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  e[bins] = hi;
  return e;
}

// Bin of `v` on `edges`: [e_i, e_{i+1}) except the last bin, which is closed.
inline std::optional<std::size_t> find_bin(const std::vector<double>& edges, double v) {
  if (!(v >= edges.front()) || !(v <= edges.back())) return std::nullopt;
  auto it = std::upper_bound(edges.begin(), edges.end(), v);
  std::size_t idx = static_cast<std::size_t>(it - edges.begin());
  idx = idx == 0 ? 0 : idx - 1;
  return std::min(idx, edges.size() - 2);
}

} // namespace detail

struct DensityGrid {
  std::vector<double> x_edges;
  std::vector<double> y_edges;
  std::vector<std::uint64_t> counts;  // x-major: counts[x_bin * ny + y_bin]
  std::string x_label;
  std::string y_label;
  std::uint64_t skipped = 0;          // population members outside the grid

  static DensityGrid uniform(double x_lo, double x_hi, std::size_t nx, double y_lo, double y_hi, std::size_t ny,
                             std::string x_label = "x", std::string y_label = "y") {
    DensityGrid g;
    g.x_edges = detail::uniform_edges(x_lo, x_hi, nx);
    g.y_edges = detail::uniform_edges(y_lo, y_hi, ny);
    g.counts.assign(nx * ny, 0);
    g.x_label = std::move(x_label);
    g.y_label = std::move(y_label);
    return g;
  }

  std::size_t nx() const { return x_edges.size() - 1; }
  std::size_t ny() const { return y_edges.size() - 1; }
  std::uint64_t count(std::size_t xb, std::size_t yb) const { return counts.at(xb * ny() + yb); }
  double log_density(std::size_t xb, std::size_t yb) const {
    return std::log10(static_cast<double>(count(xb, yb)) + 1.0);
  }

  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }
  std::uint64_t population() const { return total() + skipped; }

  bool add(double x, double y) {
    auto xb = detail::find_bin(x_edges, x);
    auto yb = detail::find_bin(y_edges, y);
    if (!xb || !yb) {
      ++skipped;
      return false;
    }
    ++counts[*xb * ny() + *yb];
    return true;
  }

  // Sum over x-bins, per y-bin is the y-marginal; this one sums over y.
  std::vector<std::uint64_t> x_marginal() const {
    std::vector<std::uint64_t> m(nx(), 0);
    for (std::size_t i = 0; i < nx(); ++i)
      for (std::size_t j = 0; j < ny(); ++j) m[i] += count(i, j);
    return m;
  }
};

enum class Normalization { count, density };

struct HistogramSeries {
  std::vector<double> bin_edges;
  Normalization mode = Normalization::count;
  std::vector<std::string> names;
  std::vector<std::vector<std::uint64_t>> counts;
  std::vector<std::uint64_t> skipped;  // values outside the edges

  static HistogramSeries uniform(double lo, double hi, std::size_t bins) {
    HistogramSeries h;
    h.bin_edges = detail::uniform_edges(lo, hi, bins);
    return h;
  }

  std::size_t bins() const { return bin_edges.size() - 1; }

  std::size_t add_series(std::string name, const std::vector<double>& values) {
    std::vector<std::uint64_t> c(bins(), 0);
    std::uint64_t skip = 0;
    for (double v : values) {
      if (auto b = detail::find_bin(bin_edges, v))
        ++c[*b];
      else
        ++skip;
    }
    names.push_back(std::move(name));
    counts.push_back(std::move(c));
    skipped.push_back(skip);
    return names.size() - 1;
  }

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    return std::nullopt;
  }

  std::uint64_t total(std::size_t s) const {
    std::uint64_t t = 0;
    for (auto c : counts.at(s)) t += c;
    return t;
  }

  // Probability density (integrates to one over the binned mass).
  std::vector<double> density(std::size_t s) const {
    const double t = static_cast<double>(total(s));
    std::vector<double> d(bins(), 0.0);
    if (t == 0) return d;
    for (std::size_t b = 0; b < bins(); ++b)
      d[b] = static_cast<double>(counts[s][b]) / (t * (bin_edges[b + 1] - bin_edges[b]));
    return d;
  }
};

// ---------------------------------------------------------------------------
// neighbor opinion (echo chamber) grid

enum class NeighborMode { out, in };

struct EchoChamberGrid {
  DensityGrid grid;
  std::uint64_t population = 0;            // scored non-influencer users
  std::uint64_t without_neighbors = 0;     // no scored neighbor (skipped)
  std::uint64_t not_in_graph = 0;          // skipped
  double diagonal_share = 0.0;             // mass with sign(own) == sign(neighbors)
};

// x = own score, y = edge-weighted mean score of neighbors. Influencers are
// left off the user axis; a neighbor's score is its influencer score if it has
// one, else its user score.
inline EchoChamberGrid neighbor_opinion_grid(const IdeologyScores& scores, const RetweetGraph& g, std::size_t bins,
                                             NeighborMode mode = NeighborMode::out) {
  EchoChamberGrid out;
  out.grid = DensityGrid::uniform(-1.0, 1.0, bins, -1.0, 1.0, bins, "own_score", "neighbor_mean_score");
  const auto node_scores = scores.node_map();
  const std::unordered_set<std::string> influencers(scores.influencer_ids.begin(), scores.influencer_ids.end());
  std::uint64_t diagonal = 0, placed = 0;
  for (std::size_t i = 0; i < scores.user_ids.size(); ++i) {
    const auto& id = scores.user_ids[i];
    if (influencers.contains(id)) continue;
    ++out.population;
    auto node = g.find(id);
    if (!node) {
      ++out.not_in_graph;
      ++out.grid.skipped;
      continue;
    }
    double wsum = 0.0, ssum = 0.0;
    for (const auto& nb : mode == NeighborMode::out ? g.out_neighbors(*node) : g.in_neighbors(*node)) {
      if (nb.node == *node) continue;
      auto it = node_scores.find(g.id(nb.node));
      if (it == node_scores.end()) continue;
      wsum += static_cast<double>(nb.weight);
      ssum += static_cast<double>(nb.weight) * it->second;
    }
    if (!(wsum > 0)) {
      ++out.without_neighbors;
      ++out.grid.skipped;
      continue;
    }
    const double x = scores.user_scores[i];
    const double y = ssum / wsum;
    if (out.grid.add(x, y)) {
      ++placed;
      if ((x < 0) == (y < 0)) ++diagonal;
    }
  }
  out.diagonal_share = placed > 0 ? static_cast<double>(diagonal) / static_cast<double>(placed) : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// ideology histograms

struct IdeologyHistograms {
  HistogramSeries hist;
  std::vector<std::string> top_influencers;  // order of the per-influencer series
  double user_dip = 0.0;                     // dip statistic of the user scores
};

// "users" and "influencers" series on shared edges over [-1, 1], plus one
// "retweeters:<id>" series per top-k influencer by unique in-degree when a
// graph is supplied.
inline IdeologyHistograms ideology_histograms(const IdeologyScores& scores, std::size_t bins,
                                              const RetweetGraph* g = nullptr, std::size_t top_k = 10) {
  IdeologyHistograms out;
  out.hist = HistogramSeries::uniform(-1.0, 1.0, bins);
  out.hist.add_series("users", scores.user_scores);
  out.hist.add_series("influencers", scores.influencer_scores);
  out.user_dip = scores.user_scores.empty() ? 0.0 : dip_statistic(scores.user_scores);
  if (!g) return out;

  const auto users = scores.user_map();
  std::vector<std::pair<std::uint32_t, std::string>> ranked;
  for (const auto& id : scores.influencer_ids)
    if (auto node = g->find(id)) ranked.emplace_back(g->unique_in_degree(*node), id);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  if (ranked.size() > top_k) ranked.resize(top_k);
  for (const auto& [deg, id] : ranked) {
    std::vector<double> vals;
    const auto node = *g->find(id);
    for (const auto& nb : g->in_neighbors(node)) {
      if (nb.node == node) continue;
      if (auto it = users.find(g->id(nb.node)); it != users.end()) vals.push_back(it->second);
    }
    out.hist.add_series("retweeters:" + id, vals);
    out.top_influencers.push_back(id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ideology by leaning class of shared domains

struct LeaningClassSummary {
  Leaning leaning = Leaning::LeastBiased;
  std::size_t users = 0;
  std::size_t influencers = 0;
  std::optional<double> user_median;
  std::optional<double> influencer_median;
};

struct LeaningDistributions {
  HistogramSeries hist;  // series "<Class>:users" and "<Class>:influencers"
  std::vector<LeaningClassSummary> classes;
};

// A user joins every class whose domains they shared at least `min_shares`
// times.
inline LeaningDistributions leaning_ideology_distributions(
    const IdeologyScores& scores, const std::map<std::string, std::map<Leaning, std::uint64_t>>& class_shares,
    std::uint64_t min_shares = 2, std::size_t bins = 50) {
  LeaningDistributions out;
  out.hist = HistogramSeries::uniform(-1.0, 1.0, bins);
  const auto users = scores.user_map();
  const auto influencers = scores.influencer_map();
  for (auto cls : kAllLeanings) {
    std::vector<double> u, inf;
    for (const auto& [id, shares] : class_shares) {
      auto it = shares.find(cls);
      if (it == shares.end() || it->second < min_shares) continue;
      if (auto i = influencers.find(id); i != influencers.end())
        inf.push_back(i->second);
      else if (auto j = users.find(id); j != users.end())
        u.push_back(j->second);
    }
    LeaningClassSummary s;
    s.leaning = cls;
    s.users = u.size();
    s.influencers = inf.size();
    if (!u.empty()) s.user_median = stats::median(u);
    if (!inf.empty()) s.influencer_median = stats::median(inf);
    out.hist.add_series(std::string(to_string(cls)) + ":users", u);
    out.hist.add_series(std::string(to_string(cls)) + ":influencers", inf);
    out.classes.push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// engagement vs. followers

struct AeDensityOptions {
  std::size_t bins = 100;
  double log_followers_lo = 0.0, log_followers_hi = 8.0;
  double log_ae_lo = -7.0, log_ae_hi = 1.0;
};

// Per action, a grid over (log10 followers, log10 AE). The population is every
// tweet with impressions; tweets with zero followers or zero AE for the action
// cannot be placed on log axes and count as skipped.
template <typename Range>
std::array<DensityGrid, 4> ae_followers_density(const Range& tweets, const AeDensityOptions& opts = {}) {
  std::array<DensityGrid, 4> grids;
  for (auto a : kAllActions)
    grids[index_of(a)] = DensityGrid::uniform(opts.log_followers_lo, opts.log_followers_hi, opts.bins, opts.log_ae_lo,
                                              opts.log_ae_hi, opts.bins, "log10_followers",
                                              "log10_ae_" + std::string(to_string(a)));
  for (const TweetRecord& t : tweets) {
    auto ae = tweet_ae(t);
    if (!ae) continue;
    for (auto a : kAllActions) {
      auto& grid = grids[index_of(a)];
      const double v = (*ae)[index_of(a)];
      if (t.author_followers == 0 || !(v > 0)) {
        ++grid.skipped;
        continue;
      }
      grid.add(std::log10(static_cast<double>(t.author_followers)), std::log10(v));
    }
  }
  return grids;
}

// ---------------------------------------------------------------------------
// file formats

inline void write_grid_csv(std::ostream& out, const DensityGrid& g) {
  out << "x_bin,y_bin,count,log_density\n";
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t j = 0; j < g.ny(); ++j)
      out << i << ',' << j << ',' << g.count(i, j) << ',' << text::fmt_double(g.log_density(i, j)) << '\n';
}

inline nlohmann::json grid_sidecar(const DensityGrid& g) {
  nlohmann::json j;
  j["x_label"] = g.x_label;
  j["y_label"] = g.y_label;
  j["x_edges"] = g.x_edges;
  j["y_edges"] = g.y_edges;
  j["counted"] = g.total();
  j["skipped"] = g.skipped;
  j["population"] = g.population();
  j["log_density"] = "log10(count+1)";
  return j;
}

inline void write_histogram_csv(std::ostream& out, const HistogramSeries& h) {
  out << "bin_left,bin_right,series,count\n";
  for (std::size_t s = 0; s < h.names.size(); ++s) {
    const auto dens = h.mode == Normalization::density ? h.density(s) : std::vector<double>{};
    for (std::size_t b = 0; b < h.bins(); ++b) {
      out << text::fmt_double(h.bin_edges[b]) << ',' << text::fmt_double(h.bin_edges[b + 1]) << ','
          << text::csv_field(h.names[s]) << ',';
      if (h.mode == Normalization::density)
        out << text::fmt_double(dens[b]);
      else
        out << h.counts[s][b];
      out << '\n';
    }
  }
}

} // namespace lurk
