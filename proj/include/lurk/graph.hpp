#pragma once

// Weighted directed retweet network (edge A->B when A retweeted B) and
// influencer ranking/selection by unique in-degree.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <tuple>
#include <utility>
#include <vector>

#include "lurk/error.hpp"
#include "lurk/ingest.hpp"
#include "lurk/text.hpp"

namespace lurk {

struct GraphOptions {
  bool include_self_loops_in_degree = false;
};

struct Edge {
  std::uint32_t src;
  std::uint32_t dst;
  std::uint64_t weight;
};

// Immutable after construction. Nodes are indexed in lexicographic id order;
// edges are held twice in compressed form, grouped by destination (primary)
// and by source.
class RetweetGraph {
public:
  RetweetGraph() = default;

  // `edges` may contain duplicates; their weights are summed.
  RetweetGraph(std::vector<std::string> ids, std::vector<Edge> edges, GraphOptions opts = {})
      : ids_(std::move(ids)), opts_(opts) {
    for (std::size_t i = 1; i < ids_.size(); ++i)
      if (!(ids_[i - 1] < ids_[i])) throw Error("graph node ids must be sorted and unique");
    for (std::uint32_t i = 0; i < ids_.size(); ++i) index_.emplace(ids_[i], i);

    std::sort(edges.begin(), edges.end(),
              [](const Edge& a, const Edge& b) { return std::tie(a.dst, a.src) < std::tie(b.dst, b.src); });
    std::vector<Edge> merged;
    for (const auto& e : edges) {
      if (e.src >= ids_.size() || e.dst >= ids_.size()) throw Error("edge endpoint out of range");
      if (e.weight == 0) continue;
      if (!merged.empty() && merged.back().src == e.src && merged.back().dst == e.dst)
        merged.back().weight += e.weight;
      else
        merged.push_back(e);
    }

    const std::size_t n = ids_.size();
    in_offsets_.assign(n + 1, 0);
    out_offsets_.assign(n + 1, 0);
    unique_in_degree_.assign(n, 0);
    for (const auto& e : merged) {
      ++in_offsets_[e.dst + 1];
      ++out_offsets_[e.src + 1];
      if (e.src != e.dst || opts_.include_self_loops_in_degree) ++unique_in_degree_[e.dst];
      total_weight_ += e.weight;
      if (e.src == e.dst) self_loop_weight_ += e.weight;
    }
    for (std::size_t i = 0; i < n; ++i) {
      in_offsets_[i + 1] += in_offsets_[i];
      out_offsets_[i + 1] += out_offsets_[i];
    }
    in_src_.resize(merged.size());
    in_weight_.resize(merged.size());
    out_dst_.resize(merged.size());
    out_weight_.resize(merged.size());
    std::vector<std::size_t> in_fill(in_offsets_.begin(), in_offsets_.end() - 1);
    std::vector<std::size_t> out_fill(out_offsets_.begin(), out_offsets_.end() - 1);
    // merged is sorted by (dst, src), so in-lists come out sorted by src.
    for (const auto& e : merged) {
      in_src_[in_fill[e.dst]] = e.src;
      in_weight_[in_fill[e.dst]++] = e.weight;
    }
    std::stable_sort(merged.begin(), merged.end(),
                     [](const Edge& a, const Edge& b) { return std::tie(a.src, a.dst) < std::tie(b.src, b.dst); });
    for (const auto& e : merged) {
      out_dst_[out_fill[e.src]] = e.dst;
      out_weight_[out_fill[e.src]++] = e.weight;
    }
  }

  std::size_t node_count() const { return ids_.size(); }
  std::size_t edge_count() const { return in_src_.size(); }
  std::uint64_t total_weight() const { return total_weight_; }
  std::uint64_t self_loop_weight() const { return self_loop_weight_; }
  const GraphOptions& options() const { return opts_; }

  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::uint32_t i) const { return ids_.at(i); }

  std::optional<std::uint32_t> find(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::uint32_t unique_in_degree(std::uint32_t node) const { return unique_in_degree_.at(node); }
  const std::vector<std::uint32_t>& unique_in_degrees() const { return unique_in_degree_; }

  struct Neighbor {
    std::uint32_t node;
    std::uint64_t weight;
  };

  // Who retweeted `node`, in source-index order.
  std::vector<Neighbor> in_neighbors(std::uint32_t node) const {
    std::vector<Neighbor> out;
    for (std::size_t k = in_offsets_.at(node); k < in_offsets_[node + 1]; ++k)
      out.push_back({in_src_[k], in_weight_[k]});
    return out;
  }

  // Whom `node` retweeted, in destination-index order.
  std::vector<Neighbor> out_neighbors(std::uint32_t node) const {
    std::vector<Neighbor> out;
    for (std::size_t k = out_offsets_.at(node); k < out_offsets_[node + 1]; ++k)
      out.push_back({out_dst_[k], out_weight_[k]});
    return out;
  }

  std::uint64_t weight(std::uint32_t src, std::uint32_t dst) const {
    const auto begin = in_src_.begin() + static_cast<std::ptrdiff_t>(in_offsets_.at(dst));
    const auto end = in_src_.begin() + static_cast<std::ptrdiff_t>(in_offsets_[dst + 1]);
    auto it = std::lower_bound(begin, end, src);
    if (it == end || *it != src) return 0;
    return in_weight_[static_cast<std::size_t>(it - in_src_.begin())];
  }

  // Edges ordered by (src id, dst id).
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (std::uint32_t s = 0; s < ids_.size(); ++s)
      for (std::size_t k = out_offsets_[s]; k < out_offsets_[s + 1]; ++k) out.push_back({s, out_dst_[k], out_weight_[k]});
    return out;
  }

  friend bool operator==(const RetweetGraph& a, const RetweetGraph& b) {
    return a.ids_ == b.ids_ && a.in_offsets_ == b.in_offsets_ && a.in_src_ == b.in_src_ &&
           a.in_weight_ == b.in_weight_ && a.unique_in_degree_ == b.unique_in_degree_;
  }

private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::uint32_t> index_;
  GraphOptions opts_;
  std::vector<std::size_t> in_offsets_, out_offsets_;
  std::vector<std::uint32_t> in_src_, out_dst_;
  std::vector<std::uint64_t> in_weight_, out_weight_;
  std::vector<std::uint32_t> unique_in_degree_;
  std::uint64_t total_weight_ = 0;
  std::uint64_t self_loop_weight_ = 0;
};

struct GraphBuildStats {
  std::uint64_t consumed = 0;           // retweet records turned into edge weight
  std::uint64_t ignored_kind = 0;       // records not in the network kinds
  std::uint64_t missing_target = 0;     // retweets without a retweeted author
  std::uint64_t self_retweets = 0;
};

// Sequential fold over a record stream.
class GraphBuilder {
public:
  explicit GraphBuilder(GraphOptions opts = {}, std::set<TweetKind> kinds = {TweetKind::retweet})
      : opts_(opts), kinds_(std::move(kinds)) {}

  void add(const TweetRecord& r) {
    if (!kinds_.contains(r.kind)) {
      ++stats_.ignored_kind;
      return;
    }
    if (!r.retweeted_author_id || r.retweeted_author_id->empty()) {
      ++stats_.missing_target;
      return;
    }
    const std::uint32_t s = intern(r.author_id);
    const std::uint32_t d = intern(*r.retweeted_author_id);
    if (s == d) ++stats_.self_retweets;
    ++pairs_[(static_cast<std::uint64_t>(s) << 32) | d];
    ++stats_.consumed;
  }

  void add_edge(const std::string& src, const std::string& dst, std::uint64_t weight) {
    const std::uint32_t s = intern(src);
    const std::uint32_t d = intern(dst);
    pairs_[(static_cast<std::uint64_t>(s) << 32) | d] += weight;
  }

  const GraphBuildStats& stats() const { return stats_; }

  RetweetGraph finish() const {
    std::vector<std::uint32_t> order(names_.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return names_[a] < names_[b]; });
    std::vector<std::uint32_t> remap(names_.size());
    std::vector<std::string> ids(names_.size());
    for (std::uint32_t pos = 0; pos < order.size(); ++pos) {
      remap[order[pos]] = pos;
      ids[pos] = names_[order[pos]];
    }
    std::vector<Edge> edges;
    edges.reserve(pairs_.size());
    for (const auto& [key, w] : pairs_)
      edges.push_back({remap[static_cast<std::uint32_t>(key >> 32)], remap[static_cast<std::uint32_t>(key)], w});
    return RetweetGraph(std::move(ids), std::move(edges), opts_);
  }

private:
  std::uint32_t intern(const std::string& id) {
    auto [it, inserted] = index_.try_emplace(id, static_cast<std::uint32_t>(names_.size()));
    if (inserted) names_.push_back(id);
    return it->second;
  }

  GraphOptions opts_;
  std::set<TweetKind> kinds_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<std::string> names_;
  std::unordered_map<std::uint64_t, std::uint64_t> pairs_;
  GraphBuildStats stats_;
};

template <typename Range>
RetweetGraph build_graph(const Range& records, GraphOptions opts = {}, GraphBuildStats* stats = nullptr) {
  GraphBuilder builder(opts);
  for (const auto& r : records) builder.add(r);
  if (stats) *stats = builder.stats();
  return builder.finish();
}

struct RankedNode {
  std::string id;
  std::uint32_t unique_in_degree;
  friend bool operator==(const RankedNode&, const RankedNode&) = default;
};

// Descending unique in-degree, ties by ascending id.
inline std::vector<RankedNode> rank_by_in_degree(const RetweetGraph& g) {
  std::vector<RankedNode> out;
  out.reserve(g.node_count());
  for (std::uint32_t i = 0; i < g.node_count(); ++i) out.push_back({g.id(i), g.unique_in_degree(i)});
  std::sort(out.begin(), out.end(), [](const RankedNode& a, const RankedNode& b) {
    if (a.unique_in_degree != b.unique_in_degree) return a.unique_in_degree > b.unique_in_degree;
    return a.id < b.id;
  });
  return out;
}

struct InfluencerSet {
  std::vector<std::string> members;  // rank order
  std::string seed_source;
  std::uint32_t min_unique_in_degree = 100;
  std::vector<std::string> missing_seeds;         // not in the graph
  std::vector<std::string> below_threshold_seeds;  // in the graph, in-degree too low
};

inline InfluencerSet select_influencers(const RetweetGraph& g, const std::vector<std::string>& seeds,
                                        std::uint32_t threshold, std::string seed_source = {}) {
  InfluencerSet set;
  set.seed_source = std::move(seed_source);
  set.min_unique_in_degree = threshold;
  std::set<std::string> wanted;
  for (const auto& s : seeds) {
    if (!wanted.insert(s).second) continue;
    auto idx = g.find(s);
    if (!idx)
      set.missing_seeds.push_back(s);
    else if (g.unique_in_degree(*idx) < threshold)
      set.below_threshold_seeds.push_back(s);
  }
  for (const auto& node : rank_by_in_degree(g))
    if (node.unique_in_degree >= threshold && wanted.contains(node.id)) set.members.push_back(node.id);
  if (set.members.empty())
    throw Error("no influencer seed reaches unique in-degree " + std::to_string(threshold) + " (" +
                std::to_string(set.missing_seeds.size()) + " seeds absent from graph, " +
                std::to_string(set.below_threshold_seeds.size()) + " below threshold)");
  return set;
}

// ---------------------------------------------------------------------------
// file formats

// One id per line; blank lines and `#` comments ignored.
inline std::vector<std::string> read_id_list(const std::string& path) {
  auto in = text::open_input(path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    ids.emplace_back(t);
  }
  return ids;
}

inline void write_id_list(const std::string& path, const std::vector<std::string>& ids) {
  auto out = text::open_output(path);
  for (const auto& id : ids) out << id << '\n';
}

inline void write_edge_list(std::ostream& out, const RetweetGraph& g) {
  out << "src,dst,weight\n";
  for (const auto& e : g.edges())
    out << text::csv_field(g.id(e.src)) << ',' << text::csv_field(g.id(e.dst)) << ',' << e.weight << '\n';
}

inline void write_edge_list(const std::string& path, const RetweetGraph& g) {
  auto out = text::open_output(path);
  write_edge_list(out, g);
}

inline RetweetGraph read_edge_list(const std::string& path, GraphOptions opts = {}) {
  auto in = text::open_input(path);
  GraphBuilder builder(opts);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    auto f = text::split_csv(line);
    if (lineno == 1 && f.size() == 3 && f[0] == "src") continue;
    if (f.size() != 3) throw Error(path + ":" + std::to_string(lineno) + ": expected src,dst,weight");
    auto w = text::parse_int<std::uint64_t>(f[2]);
    if (!w || f[0].empty() || f[1].empty())
      throw Error(path + ":" + std::to_string(lineno) + ": invalid edge");
    builder.add_edge(f[0], f[1], *w);
  }
  return builder.finish();
}

} // namespace lurk
