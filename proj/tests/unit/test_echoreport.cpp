#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "helpers.hpp"

using namespace lurk;
using namespace testing_util;

namespace {

IdeologyScores make_scores(std::vector<std::pair<std::string, double>> users,
                           std::vector<std::pair<std::string, double>> influencers = {}) {
  IdeologyScores s;
  for (auto& [id, v] : users) {
    s.user_ids.push_back(id);
    s.user_scores.push_back(v);
    s.user_raw.push_back(v);
  }
  for (auto& [id, v] : influencers) {
    s.influencer_ids.push_back(id);
    s.influencer_scores.push_back(v);
    s.influencer_raw.push_back(v);
  }
  return s;
}

RetweetGraph graph_from(const std::vector<std::tuple<std::string, std::string, int>>& edges) {
  GraphBuilder b;
  for (const auto& [s, d, w] : edges) b.add_edge(s, d, static_cast<std::uint64_t>(w));
  return b.finish();
}

struct MiniPipeline {
  RetweetGraph graph;
  IdeologyScores scores;
};

const MiniPipeline& mini_pipeline() {
  static const MiniPipeline p = [] {
    MiniPipeline out;
    out.graph = build_graph(filtered(mini_corpus()));
    auto infl = select_influencers(out.graph, read_id_list(fixture("mini_seeds.txt")), 5);
    out.scores = estimate_ideology(build_interaction_matrix(out.graph, infl), "iA00");
    return out;
  }();
  return p;
}

// q99 of the dip under the uniform null, linearly interpolated in n.
double dip_threshold(std::size_t n) {
  std::ifstream in(fixture("dip_critical.csv"));
  std::string line;
  std::getline(in, line);
  std::vector<std::pair<double, double>> table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = text::split_csv(line);
    table.emplace_back(std::stod(f[0]), std::stod(f[2]));
  }
  const double x = static_cast<double>(n);
  if (x <= table.front().first) return table.front().second;
  for (std::size_t i = 1; i < table.size(); ++i)
    if (x <= table[i].first) {
      const auto [x0, y0] = table[i - 1];
      const auto [x1, y1] = table[i];
      return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
    }
  return table.back().second;
}

} // namespace

TEST(NeighborGrid, SingleNeighborCell) {
  auto s = make_scores({{"u", -0.9}}, {{"i", -0.8}});
  auto g = graph_from({{"u", "i", 1}});
  auto grid = neighbor_opinion_grid(s, g, 20);
  ASSERT_EQ(grid.grid.total(), 1u);
  const auto xb = *detail::find_bin(grid.grid.x_edges, -0.9);
  const auto yb = *detail::find_bin(grid.grid.y_edges, -0.8);
  EXPECT_EQ(grid.grid.count(xb, yb), 1u);
  EXPECT_EQ(grid.diagonal_share, 1.0);
}

TEST(NeighborGrid, SymmetricNeighborsAverageToZero) {
  auto s = make_scores({{"u", 0.5}}, {{"a", 1.0}, {"b", -1.0}});
  auto g = graph_from({{"u", "a", 1}, {"u", "b", 1}});
  auto grid = neighbor_opinion_grid(s, g, 4);
  EXPECT_EQ(grid.grid.count(3, 2), 1u);  // y = 0 falls in [0, 0.5)
}

TEST(NeighborGrid, WeightsAndModes) {
  auto s = make_scores({{"u", -0.2}, {"v", 0.9}}, {{"a", 1.0}, {"b", -1.0}});
  auto g = graph_from({{"u", "a", 1}, {"u", "b", 3}, {"v", "u", 2}});
  auto out = neighbor_opinion_grid(s, g, 8);
  EXPECT_EQ(out.population, 2u);
  EXPECT_EQ(out.grid.total(), 2u);
  auto in = neighbor_opinion_grid(s, g, 8, NeighborMode::in);
  EXPECT_EQ(in.grid.total(), 1u);  // only u is retweeted by a scored node
  EXPECT_EQ(in.without_neighbors, 1u);
}

TEST(NeighborGrid, MassConservation) {
  const auto& p = mini_pipeline();
  auto s = p.scores;
  s.user_ids.push_back("absent_from_graph");
  s.user_scores.push_back(0.1);
  s.user_raw.push_back(0.1);
  auto grid = neighbor_opinion_grid(s, p.graph, 50);
  EXPECT_EQ(grid.grid.total() + grid.grid.skipped, grid.population);
  EXPECT_EQ(grid.grid.population(), grid.population);
  EXPECT_EQ(grid.not_in_graph, 1u);
}

TEST(NeighborGrid, MiniCorpusIsMostlyOnDiagonal) {
  const auto& p = mini_pipeline();
  auto grid = neighbor_opinion_grid(p.scores, p.graph, 50);
  EXPECT_GE(grid.diagonal_share, 0.9);
}

TEST(Histogram, AllAtMinusOneSaturatesOneBin) {
  auto h = HistogramSeries::uniform(-1, 1, 10);
  h.add_series("users", std::vector<double>(25, -1.0));
  EXPECT_EQ(h.counts[0][0], 25u);
  EXPECT_EQ(h.total(0), 25u);
}

TEST(Histogram, EdgesAndOutOfRange) {
  auto h = HistogramSeries::uniform(-1, 1, 4);
  h.add_series("s", {1.0, -0.5, 0.0, 1.5, -2.0});
  EXPECT_EQ(h.counts[0][3], 1u);  // upper edge closed
  EXPECT_EQ(h.counts[0][1], 1u);
  EXPECT_EQ(h.counts[0][2], 1u);
  EXPECT_EQ(h.skipped[0], 2u);
}

TEST(Histogram, SymmetricScoresGiveMirroredCounts) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> vals;
  for (int i = 0; i < 500; ++i) {
    const double v = u(gen);
    vals.push_back(v);
    vals.push_back(-v);
  }
  auto h = HistogramSeries::uniform(-1, 1, 20);
  h.add_series("s", vals);
  for (std::size_t b = 0; b < 20; ++b) EXPECT_NEAR(static_cast<double>(h.counts[0][b]), h.counts[0][19 - b], 2.0);
}

TEST(Histogram, DensityIntegratesToOne) {
  auto h = HistogramSeries::uniform(-1, 1, 7);
  h.add_series("s", {-0.9, -0.1, 0.2, 0.2, 0.95});
  double integral = 0;
  auto d = h.density(0);
  for (std::size_t b = 0; b < 7; ++b) integral += d[b] * (h.bin_edges[b + 1] - h.bin_edges[b]);
  EXPECT_NEAR(integral, 1.0, 1e-12);
}

TEST(IdeologyHistograms, SeriesAndDip) {
  const auto& p = mini_pipeline();
  auto h = ideology_histograms(p.scores, 50, &p.graph, 3);
  EXPECT_EQ(h.hist.names.size(), 5u);
  EXPECT_EQ(h.top_influencers.size(), 3u);
  EXPECT_EQ(h.top_influencers[0], "iA00");
  EXPECT_EQ(h.hist.total(0), p.scores.user_ids.size());
  EXPECT_GT(h.user_dip, dip_threshold(p.scores.user_ids.size()));
}

TEST(Dip, MatchesReferenceImplementation) {
  std::ifstream in(fixture("dip_reference.csv"));
  std::string line;
  std::getline(in, line);
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = text::split_csv(line);
    ASSERT_EQ(f.size(), 3u);
    std::istringstream vs(f[2]);
    std::vector<double> values;
    for (double v; vs >> v;) values.push_back(v);
    EXPECT_NEAR(dip_statistic(values), std::stod(f[1]), 1e-12) << "case " << f[0];
    ++n;
  }
  EXPECT_EQ(n, 40u);
}

TEST(Dip, ConstantAndTinySamples) {
  EXPECT_DOUBLE_EQ(dip_statistic({1, 1, 1, 1}), 1.0 / 8.0);
  EXPECT_DOUBLE_EQ(dip_statistic({0.5}), 0.5);
}

TEST(Dip, InvariantToOrderAndAffineMaps) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd;
  std::vector<double> v;
  for (int i = 0; i < 200; ++i) v.push_back(nd(gen) + (i % 2 ? 3 : -3));
  const double d = dip_statistic(v);
  std::shuffle(v.begin(), v.end(), gen);
  EXPECT_DOUBLE_EQ(dip_statistic(v), d);
  for (auto& x : v) x = 2.5 * x - 7;
  EXPECT_NEAR(dip_statistic(v), d, 1e-12);
  EXPECT_GT(d, dip_threshold(v.size()));
}

TEST(LeaningDistributions, MinSharesThreshold) {
  auto s = make_scores({{"once", -0.5}, {"twice", -0.4}});
  std::map<std::string, std::map<Leaning, std::uint64_t>> shares{{"once", {{Leaning::Left, 1}}},
                                                                  {"twice", {{Leaning::Left, 2}}}};
  auto d = leaning_ideology_distributions(s, shares, 2, 10);
  const auto& left = d.classes[static_cast<std::size_t>(Leaning::Left)];
  EXPECT_EQ(left.users, 1u);
  EXPECT_EQ(*left.user_median, -0.4);
  EXPECT_EQ(d.hist.names.size(), 14u);
}

TEST(LeaningDistributions, InfluencersSeparated) {
  auto s = make_scores({{"u", 0.3}}, {{"i", 0.8}});
  std::map<std::string, std::map<Leaning, std::uint64_t>> shares{{"u", {{Leaning::Right, 3}}},
                                                                  {"i", {{Leaning::Right, 5}}}};
  auto d = leaning_ideology_distributions(s, shares);
  const auto& right = d.classes[static_cast<std::size_t>(Leaning::Right)];
  EXPECT_EQ(right.users, 1u);
  EXPECT_EQ(right.influencers, 1u);
  EXPECT_EQ(*right.influencer_median, 0.8);
}

TEST(LeaningDistributions, MiniCorpusLeftClassLeansNegative) {
  const auto& p = mini_pipeline();
  LeaningAccumulator acc(load_domain_table(fixture("domains.csv")));
  for (const auto& r : filtered(mini_corpus())) acc.add(r);
  auto d = leaning_ideology_distributions(p.scores, acc.class_shares());
  const auto& left = d.classes[static_cast<std::size_t>(Leaning::Left)];
  ASSERT_TRUE(left.user_median);
  EXPECT_LT(*left.user_median, 0.0);
}

TEST(AeDensity, SingleTweetSingleCell) {
  auto grids = ae_followers_density(std::vector<TweetRecord>{Rec("a").metrics(1000, 5, 1, 20, 2).followers(300)});
  for (const auto& g : grids) {
    EXPECT_EQ(g.total(), 1u);
    std::size_t nonzero = 0;
    for (auto c : g.counts) nonzero += c > 0;
    EXPECT_EQ(nonzero, 1u);
  }
}

TEST(AeDensity, ZeroActionsAreSkippedNotDropped) {
  auto grids = ae_followers_density(std::vector<TweetRecord>{Rec("a").metrics(1000, 0, 1, 20, 0).followers(300)});
  EXPECT_EQ(grids[index_of(Action::retweet)].skipped, 1u);
  EXPECT_EQ(grids[index_of(Action::retweet)].population(), 1u);
}

TEST(AeDensity, DuplicatedCorpusDoublesCounts) {
  auto tweets = engagement_subset(filtered(mini_corpus()));
  auto doubled = tweets;
  doubled.insert(doubled.end(), tweets.begin(), tweets.end());
  auto a = ae_followers_density(tweets);
  auto b = ae_followers_density(doubled);
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t i = 0; i < a[k].counts.size(); ++i) EXPECT_EQ(b[k].counts[i], 2 * a[k].counts[i]);
    EXPECT_EQ(b[k].skipped, 2 * a[k].skipped);
  }
}

TEST(AeDensity, FollowerMarginalFollowsPlantedPowerLaw) {
  const auto& g = default_corpus();
  auto tweets = engagement_subset(filtered(g.records));
  AeDensityOptions opts;
  opts.bins = 16;  // half-decade bins
  auto grid = ae_followers_density(tweets, opts)[index_of(Action::like)];
  auto marginal = grid.x_marginal();
  // Least squares of log10 count against bin centre, weighted by count (the
  // inverse variance of a log Poisson count), over bins above the Pareto floor.
  std::vector<double> xs, ys, ws;
  for (std::size_t i = 0; i < marginal.size(); ++i) {
    const double lo = grid.x_edges[i], hi = grid.x_edges[i + 1];
    if (lo < std::log10(g.config.followers_min) || marginal[i] == 0) continue;
    xs.push_back(0.5 * (lo + hi));
    ys.push_back(std::log10(static_cast<double>(marginal[i])));
    ws.push_back(static_cast<double>(marginal[i]));
  }
  ASSERT_GE(xs.size(), 4u);
  double sw = 0, mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sw += ws[i];
    mx += ws[i] * xs[i];
    my += ws[i] * ys[i];
  }
  mx /= sw;
  my /= sw;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += ws[i] * (xs[i] - mx) * (ys[i] - my);
    sxx += ws[i] * (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  EXPECT_NEAR(slope, -g.config.followers_alpha, 0.1 * g.config.followers_alpha);
}

TEST(GridOutput, CsvAndSidecarAreDeterministic) {
  const auto& p = mini_pipeline();
  auto a = neighbor_opinion_grid(p.scores, p.graph, 10);
  auto b = neighbor_opinion_grid(p.scores, p.graph, 10);
  std::ostringstream sa, sb;
  write_grid_csv(sa, a.grid);
  write_grid_csv(sb, b.grid);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(grid_sidecar(a.grid).dump(), grid_sidecar(b.grid).dump());
  auto j = grid_sidecar(a.grid);
  EXPECT_EQ(j["counted"].get<std::uint64_t>() + j["skipped"].get<std::uint64_t>(), j["population"].get<std::uint64_t>());
}

TEST(GridOutput, LogDensityIsLogCountPlusOne) {
  auto g = DensityGrid::uniform(0, 1, 2, 0, 1, 2);
  for (int i = 0; i < 9; ++i) g.add(0.1, 0.9);
  EXPECT_DOUBLE_EQ(g.log_density(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(g.log_density(1, 1), 0.0);
  EXPECT_FALSE(g.add(2.0, 0.5));
  EXPECT_EQ(g.population(), 10u);
}

TEST(HistogramOutput, CsvRows) {
  auto h = HistogramSeries::uniform(-1, 1, 2);
  h.add_series("a,b", {-0.5, 0.5, 0.6});
  std::ostringstream out;
  write_histogram_csv(out, h);
  EXPECT_EQ(out.str(), "bin_left,bin_right,series,count\n-1,0,\"a,b\",1\n0,1,\"a,b\",2\n");
}
