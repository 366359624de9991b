#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lurk/lurkscope.hpp"

namespace fs = std::filesystem;
using namespace lurk;

namespace {

std::string join(const fs::path& dir, const std::string& name) { return (dir / name).string(); }

void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = text::open_output(path);
  out << j.dump(2) << '\n';
}

void write_counts_csv(const std::string& path, const std::map<std::string, std::uint64_t>& counts) {
  auto out = text::open_output(path);
  out << "reason,count\n";
  for (const auto& [reason, n] : counts) out << text::csv_field(reason) << ',' << n << '\n';
}

Timestamp parse_date_flag(const std::string& s) {
  auto t = parse_timestamp(s);
  if (!t) throw Error("invalid date: " + s);
  return t->value;
}

std::set<std::string> split_langs(const std::vector<std::string>& raw) {
  std::set<std::string> out;
  for (const auto& item : raw)
    for (const auto& part : text::split_csv(item)) {
      auto t = text::trim(part);
      if (!t.empty()) out.emplace(t);
    }
  return out;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

int run_synth(const SynthArgs& a) {
  GeneratorConfig cfg;
  if (!a.config.empty())
    cfg = load_generator_config(a.config);
  else if (a.preset == "mini")
    cfg = GeneratorConfig::mini();
  else if (!a.preset.empty() && a.preset != "default")
    throw Error("unknown preset: " + a.preset);
  if (a.seed) cfg.seed = *a.seed;
  auto g = generate(cfg);
  write_generated(g, a.out_dir);
  std::cerr << "synth: " << g.records.size() << " records, " << g.truth.planted_retweets << " planted retweets, "
            << g.truth.originals << " originals -> " << a.out_dir << '\n';
  return 0;
}

struct IngestArgs {
  std::string input;
  std::string schema = "flat";
  std::string min_date = "2022-12-15";
  std::vector<std::string> langs{"en"};
  std::string output;
  std::string rejects_out;
  std::string exclusions_out;
  std::string stats_out;
  bool allow_early = false;
};

int run_ingest(const IngestArgs& a) {
  auto schema = parse_schema(a.schema);
  if (!schema) throw Error("unknown schema: " + a.schema);
  CorpusFilter f;
  f.min_date = parse_date_flag(a.min_date);
  f.allowed_langs = split_langs(a.langs);
  if (!a.allow_early) f.validate_for_engagement();

  RecordFilter filter(f);
  auto out = text::open_output(a.output);
  auto diag = for_each_record(a.input, *schema, [&](const TweetRecord& r) {
    if (filter.accept(r)) out << to_flat_line(r) << '\n';
  });
  const auto& st = filter.stats();
  if (!a.rejects_out.empty()) write_counts_csv(a.rejects_out, diag.rejects);
  if (!a.exclusions_out.empty()) write_counts_csv(a.exclusions_out, st.excluded);
  if (!a.stats_out.empty()) {
    nlohmann::json j;
    j["lines"] = diag.lines;
    j["records"] = diag.records;
    j["rejects"] = diag.reject_count();
    j["assumed_utc"] = diag.assumed_utc;
    j["self_retweets"] = diag.self_retweets;
    j["retained"] = st.retained;
    j["excluded"] = st.excluded;
    j["min_date"] = format_timestamp(f.min_date);
    j["langs"] = f.allowed_langs;
    write_json(a.stats_out, j);
  }
  for (const auto& [line, reason] : diag.reject_lines)
    std::cerr << "ingest: rejected line " << line << ": " << reason << '\n';
  std::cerr << "ingest: " << diag.records << " records, " << diag.reject_count() << " rejects, " << st.retained
            << " retained\n";
  return 0;
}

struct GraphArgs {
  std::string input;
  std::string schema = "flat";
  std::string seeds;
  std::uint32_t min_indegree = 100;
  std::string graph_out;
  std::string influencers_out;
  std::string ranking_out;
  bool self_loops = false;
};

int run_graph(const GraphArgs& a) {
  auto schema = parse_schema(a.schema);
  if (!schema) throw Error("unknown schema: " + a.schema);
  GraphOptions opts;
  opts.include_self_loops_in_degree = a.self_loops;
  GraphBuilder builder(opts);
  for_each_record(a.input, *schema, [&](const TweetRecord& r) { builder.add(r); });
  const auto g = builder.finish();
  const auto& st = builder.stats();
  std::cerr << "graph: " << g.node_count() << " nodes, " << g.edge_count() << " edges, weight " << g.total_weight()
            << " (" << st.missing_target << " retweets without target, " << st.self_retweets << " self-retweets)\n";
  if (!a.graph_out.empty()) write_edge_list(a.graph_out, g);
  if (!a.ranking_out.empty()) {
    auto out = text::open_output(a.ranking_out);
    out << "id,unique_in_degree\n";
    for (const auto& n : rank_by_in_degree(g)) out << text::csv_field(n.id) << ',' << n.unique_in_degree << '\n';
  }
  if (!a.seeds.empty()) {
    auto set = select_influencers(g, read_id_list(a.seeds), a.min_indegree, a.seeds);
    for (const auto& s : set.missing_seeds) std::cerr << "graph: seed not in graph: " << s << '\n';
    for (const auto& s : set.below_threshold_seeds) std::cerr << "graph: seed below threshold: " << s << '\n';
    std::cerr << "graph: " << set.members.size() << " influencers at unique in-degree >= " << a.min_indegree << '\n';
    if (!a.influencers_out.empty()) write_id_list(a.influencers_out, set.members);
  }
  return 0;
}

struct IdeologyArgs {
  std::string graph;
  std::string influencers;
  std::string anchor;
  std::uint32_t min_distinct = 2;
  double tol = 1e-10;
  std::size_t max_iter = 10000;
  std::uint64_t seed = 1;
  std::string scores_out;
  std::string stats_out;
};

int run_ideology(const IdeologyArgs& a) {
  const auto g = read_edge_list(a.graph);
  InfluencerSet infl;
  infl.members = read_id_list(a.influencers);
  infl.seed_source = a.influencers;
  MatrixOptions mo;
  mo.min_distinct = a.min_distinct;
  const auto m = build_interaction_matrix(g, infl, mo);
  for (const auto& d : m.dropped_cols) std::cerr << "ideology: dropped influencer without qualifying retweeters: " << d << '\n';
  SolverOptions so;
  so.tol = a.tol;
  so.max_iter = a.max_iter;
  so.seed = a.seed;
  const auto scores = estimate_ideology(m, a.anchor, so);
  for (const auto& u : scores.unscored_influencers) std::cerr << "ideology: influencer left unscored: " << u << '\n';
  write_scores_csv(a.scores_out, scores);
  std::cerr << "ideology: " << m.rows() << "x" << m.cols() << " matrix, sigma1 " << text::fmt_double(scores.sigma1)
            << ", " << scores.iterations << " iterations, residual " << text::fmt_double(scores.residual) << '\n';
  if (!a.stats_out.empty()) {
    nlohmann::json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    j["sigma1"] = scores.sigma1;
    j["anchor"] = scores.anchor_id;
    j["iterations"] = scores.iterations;
    j["residual"] = scores.residual;
    j["unscored_influencers"] = scores.unscored_influencers;
    write_json(a.stats_out, j);
  }
  return 0;
}

struct EngagementArgs {
  std::string input;
  std::string schema = "flat";
  std::string domains;
  std::string scores;
  std::vector<std::string> granularity{"tweet", "user", "domain"};
  std::vector<std::string> group_by;
  std::string attribution = "full";
  bool exclude_unreliable_leaning = false;
  std::string out_dir;
};

int run_engagement(const EngagementArgs& a) {
  auto schema = parse_schema(a.schema);
  if (!schema) throw Error("unknown schema: " + a.schema);
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);

  std::vector<TweetRecord> tweets;
  for_each_record(a.input, *schema, [&](const TweetRecord& r) {
    if (in_engagement_subset(r)) tweets.push_back(r);
  });
  std::optional<DomainTable> table;
  if (!a.domains.empty()) {
    DomainTableDiagnostics dd;
    table = load_domain_table(a.domains, &dd);
    for (const auto& w : dd.warnings) std::cerr << "engagement: " << w << '\n';
    for (const auto& [line, why] : dd.rejected) std::cerr << "engagement: domain table line " << line << ": " << why << '\n';
  }
  const auto mode = a.attribution == "fractional" ? DomainAttribution::fractional : DomainAttribution::full;
  if (a.attribution != "full" && a.attribution != "fractional") throw Error("unknown attribution: " + a.attribution);

  std::map<Granularity, std::vector<EngagementRecord>> results;
  nlohmann::json stats;
  stats["tweets"] = tweets.size();
  for (const auto& name : a.granularity) {
    auto gran = parse_granularity(name);
    if (!gran) throw Error("unknown granularity: " + name);
    AggregateStats as;
    std::vector<EngagementRecord> rows;
    if (*gran == Granularity::tweet)
      rows = aggregate_ae(tweets, *gran, tweet_key(), &as);
    else if (*gran == Granularity::user)
      rows = aggregate_ae(tweets, *gran, user_key(), &as);
    else {
      if (!table) throw Error("domain granularity needs --domains");
      rows = aggregate_ae(tweets, *gran, domain_keys(*table, mode), &as);
    }
    {
      auto out = text::open_output(join(dir, "engagement_" + name + ".csv"));
      write_engagement_csv(out, rows);
    }
    {
      auto out = text::open_output(join(dir, "mean_of_ratios_" + name + ".csv"));
      write_mean_of_ratios_csv(out, rows);
    }
    stats[name] = {{"subjects", rows.size()},
                   {"unattributed_tweets", as.unattributed_tweets},
                   {"zero_impression_subjects", as.zero_impression_subjects},
                   {"ae_above_one", as.above_one}};
    results[*gran] = std::move(rows);
  }
  {
    auto out = text::open_output(join(dir, "summary.csv"));
    write_summary_csv(out, mean_tweet_ae(tweets));
  }
  {
    auto out = text::open_output(join(dir, "correlations.csv"));
    write_correlations_csv(out, followers_correlations(tweets));
  }

  std::vector<std::string> group_by = a.group_by;
  if (group_by.empty()) {
    if (!a.scores.empty()) group_by.push_back("ideology");
    if (table) {
      group_by.push_back("reliability");
      group_by.push_back("leaning");
    }
  }
  for (const auto& gb : group_by) {
    std::map<std::string, std::string> groups;
    Granularity gran = Granularity::user;
    if (gb == "ideology") {
      if (a.scores.empty()) throw Error("--group-by ideology needs --scores");
      for (const auto& [id, s] : read_scores_csv(a.scores).node_map()) groups[id] = s < 0 ? "negative" : "positive";
    } else if (gb == "reliability" || gb == "leaning") {
      if (!table) throw Error("--group-by " + gb + " needs --domains");
      gran = Granularity::domain;
      for (const auto& [name, p] : *table) {
        if (gb == "reliability")
          groups[name] = std::string(to_string(p.reliability));
        else if (p.leaning)
          groups[name] = std::string(to_string(*p.leaning));
      }
    } else {
      throw Error("unknown --group-by: " + gb);
    }
    auto it = results.find(gran);
    if (it == results.end()) throw Error("--group-by " + gb + " needs granularity " + std::string(to_string(gran)));
    GroupStats gs;
    auto boxes = group_ae(it->second, groups, &gs);
    for (const auto& e : gs.empty_groups) std::cerr << "engagement: empty group " << gb << "/" << e << '\n';
    auto out = text::open_output(join(dir, "groups_" + gb + ".csv"));
    write_group_csv(out, gb, boxes);
  }

  if (table) {
    LeaningOptions lo;
    lo.include_unreliable = !a.exclude_unreliable_leaning;
    LeaningAccumulator acc(*table, lo);
    for (const auto& t : tweets) acc.add(t);
    auto out = text::open_output(join(dir, "user_leaning.csv"));
    write_user_leaning_csv(out, acc.results());
  }
  write_json(join(dir, "engagement_stats.json"), stats);
  std::cerr << "engagement: " << tweets.size() << " original tweets -> " << a.out_dir << '\n';
  return 0;
}

struct ReportArgs {
  std::string scores;
  std::string graph;
  std::string input;
  std::string schema = "flat";
  std::string domains;
  std::string out_dir;
  std::size_t bins = 50;
  std::size_t grid_bins = 100;
  std::size_t top_k = 10;
  std::uint64_t min_shares = 2;
  std::string neighbors = "out";
};

int run_report(const ReportArgs& a) {
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  const auto scores = read_scores_csv(a.scores);
  std::optional<RetweetGraph> g;
  if (!a.graph.empty()) g = read_edge_list(a.graph);

  {
    auto h = ideology_histograms(scores, a.bins, g ? &*g : nullptr, a.top_k);
    auto out = text::open_output(join(dir, "ideology_histograms.csv"));
    write_histogram_csv(out, h.hist);
    nlohmann::json j;
    j["bins"] = a.bins;
    j["series"] = h.hist.names;
    j["top_influencers"] = h.top_influencers;
    j["user_dip"] = h.user_dip;
    j["users"] = scores.user_ids.size();
    j["influencers"] = scores.influencer_ids.size();
    write_json(join(dir, "ideology_histograms.json"), j);
  }
  if (g) {
    if (a.neighbors != "out" && a.neighbors != "in") throw Error("--neighbors must be out or in");
    auto echo = neighbor_opinion_grid(scores, *g, a.grid_bins, a.neighbors == "out" ? NeighborMode::out : NeighborMode::in);
    auto out = text::open_output(join(dir, "neighbor_opinion_grid.csv"));
    write_grid_csv(out, echo.grid);
    auto j = grid_sidecar(echo.grid);
    j["neighbors"] = a.neighbors;
    j["diagonal_share"] = echo.diagonal_share;
    j["without_neighbors"] = echo.without_neighbors;
    j["not_in_graph"] = echo.not_in_graph;
    write_json(join(dir, "neighbor_opinion_grid.json"), j);
  }
  if (!a.input.empty()) {
    auto schema = parse_schema(a.schema);
    if (!schema) throw Error("unknown schema: " + a.schema);
    std::vector<TweetRecord> tweets;
    std::optional<DomainTable> table;
    if (!a.domains.empty()) table = load_domain_table(a.domains);
    std::optional<LeaningAccumulator> acc;
    if (table) acc.emplace(*table);
    for_each_record(a.input, *schema, [&](const TweetRecord& r) {
      if (!in_engagement_subset(r)) return;
      tweets.push_back(r);
      if (acc) acc->add(r);
    });
    AeDensityOptions opts;
    opts.bins = a.grid_bins;
    auto grids = ae_followers_density(tweets, opts);
    for (auto act : kAllActions) {
      const std::string name = "ae_followers_" + std::string(to_string(act));
      auto out = text::open_output(join(dir, name + ".csv"));
      write_grid_csv(out, grids[index_of(act)]);
      write_json(join(dir, name + ".json"), grid_sidecar(grids[index_of(act)]));
    }
    if (acc) {
      auto d = leaning_ideology_distributions(scores, acc->class_shares(), a.min_shares, a.bins);
      auto out = text::open_output(join(dir, "leaning_ideology.csv"));
      write_histogram_csv(out, d.hist);
      nlohmann::json j = nlohmann::json::array();
      for (const auto& c : d.classes) {
        nlohmann::json row;
        row["class"] = std::string(to_string(c.leaning));
        row["users"] = c.users;
        row["influencers"] = c.influencers;
        row["user_median"] = c.user_median ? nlohmann::json(*c.user_median) : nlohmann::json();
        row["influencer_median"] = c.influencer_median ? nlohmann::json(*c.influencer_median) : nlohmann::json();
        j.push_back(row);
      }
      write_json(join(dir, "leaning_ideology.json"), {{"min_shares", a.min_shares}, {"classes", j}});
    }
  }
  std::cerr << "report: written to " << a.out_dir << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"lurkscope: retweet-network ideology and active-engagement analysis"};
  app.require_subcommand(1);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic polarized corpus with ground truth");
  synth->add_option("--config", sa.config, "Generator config (JSON)")->check(CLI::ExistingFile);
  synth->add_option("--preset", sa.preset, "default or mini (ignored with --config)");
  synth->add_option("--seed", sa.seed, "Override the config seed");
  synth->add_option("--out-dir", sa.out_dir, "Output directory")->required();

  IngestArgs ia;
  auto* ingest = app.add_subcommand("ingest", "Parse and filter tweet records");
  ingest->add_option("--input", ia.input, "Newline-delimited records (.gz accepted)")->required();
  ingest->add_option("--schema", ia.schema, "flat or api")->capture_default_str();
  ingest->add_option("--min-date", ia.min_date, "Keep records created at or after this UTC date")->capture_default_str();
  ingest->add_option("--lang", ia.langs, "Allowed language codes (repeatable or comma separated)")->capture_default_str();
  ingest->add_option("--output", ia.output, "Filtered corpus (flat schema)")->required();
  ingest->add_option("--rejects-out", ia.rejects_out, "Parse rejects CSV reason,count");
  ingest->add_option("--exclusions-out", ia.exclusions_out, "Filter exclusions CSV reason,count");
  ingest->add_option("--stats-out", ia.stats_out, "Run statistics (JSON)");
  ingest->add_flag("--allow-pre-impression-dates", ia.allow_early,
                   "Permit --min-date before the impression-metric release");

  GraphArgs ga;
  auto* graph = app.add_subcommand("graph", "Build the retweet network and select influencers");
  graph->add_option("--input", ga.input, "Filtered corpus")->required();
  graph->add_option("--schema", ga.schema, "flat or api")->capture_default_str();
  graph->add_option("--seeds", ga.seeds, "Influencer seed ids, one per line");
  graph->add_option("--min-indegree", ga.min_indegree, "Minimum unique in-degree for influencers")->capture_default_str();
  graph->add_option("--graph-out", ga.graph_out, "Edge list CSV src,dst,weight");
  graph->add_option("--influencers-out", ga.influencers_out, "Selected influencers, one per line");
  graph->add_option("--ranking-out", ga.ranking_out, "All nodes ranked by unique in-degree");
  graph->add_flag("--include-self-loops", ga.self_loops, "Count self-retweets toward unique in-degree");

  IdeologyArgs da;
  auto* ideology = app.add_subcommand("ideology", "Correspondence-analysis latent ideology");
  ideology->add_option("--graph", da.graph, "Edge list CSV")->required();
  ideology->add_option("--influencers", da.influencers, "Influencer ids, one per line")->required();
  ideology->add_option("--anchor", da.anchor, "Influencer whose side scores negative")->required();
  ideology->add_option("--min-distinct", da.min_distinct, "Distinct influencers a user must retweet")->capture_default_str();
  ideology->add_option("--tol", da.tol, "Relative residual tolerance")->capture_default_str();
  ideology->add_option("--max-iter", da.max_iter, "Iteration budget")->capture_default_str();
  ideology->add_option("--seed", da.seed, "Start-vector seed")->capture_default_str();
  ideology->add_option("--scores-out", da.scores_out, "Scores CSV id,kind,score,raw_score")->required();
  ideology->add_option("--stats-out", da.stats_out, "Solver statistics (JSON)");

  EngagementArgs ea;
  auto* engagement = app.add_subcommand("engagement", "Active Engagement tables, correlations and group summaries");
  engagement->add_option("--input", ea.input, "Filtered corpus")->required();
  engagement->add_option("--schema", ea.schema, "flat or api")->capture_default_str();
  engagement->add_option("--domains", ea.domains, "Domain table CSV domain,leaning_label,reliability");
  engagement->add_option("--scores", ea.scores, "Ideology scores CSV (for --group-by ideology)");
  engagement->add_option("--granularity", ea.granularity, "tweet, user and/or domain")->capture_default_str();
  engagement->add_option("--group-by", ea.group_by, "ideology, reliability and/or leaning");
  engagement->add_option("--attribution", ea.attribution, "Domain attribution: full or fractional")->capture_default_str();
  engagement->add_flag("--exclude-unreliable-leaning", ea.exclude_unreliable_leaning,
                       "Leave questionable/conspiracy outlets out of user leaning means");
  engagement->add_option("--out-dir", ea.out_dir, "Output directory")->required();

  ReportArgs ra;
  auto* report = app.add_subcommand("report", "Plot-ready histograms and density grids");
  report->add_option("--scores", ra.scores, "Ideology scores CSV")->required();
  report->add_option("--graph", ra.graph, "Edge list CSV (neighbor grid, per-influencer histograms)");
  report->add_option("--input", ra.input, "Filtered corpus (engagement and leaning plots)");
  report->add_option("--schema", ra.schema, "flat or api")->capture_default_str();
  report->add_option("--domains", ra.domains, "Domain table CSV");
  report->add_option("--out-dir", ra.out_dir, "Output directory")->required();
  report->add_option("--bins", ra.bins, "Histogram bins")->capture_default_str();
  report->add_option("--grid-bins", ra.grid_bins, "Density grid bins per axis")->capture_default_str();
  report->add_option("--top-k", ra.top_k, "Per-influencer retweeter histograms")->capture_default_str();
  report->add_option("--min-shares", ra.min_shares, "Shares of a leaning class needed to join it")->capture_default_str();
  report->add_option("--neighbors", ra.neighbors, "out or in")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*synth) return run_synth(sa);
    if (*ingest) return run_ingest(ia);
    if (*graph) return run_graph(ga);
    if (*ideology) return run_ideology(da);
    if (*engagement) return run_engagement(ea);
    if (*report) return run_report(ra);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
