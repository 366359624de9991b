#pragma once

// Latent ideology by correspondence analysis of the user x influencer retweet
// matrix. The standardized residual matrix
//
//     S = Dr^{-1/2} (P - r c^T) Dc^{-1/2},   P = A / sum(A),  r = P 1,  c = P^T 1
//
// is never formed; it is applied as the sparse term Dr^{-1/2} P Dc^{-1/2}
// minus the rank-one term sqrt(r) sqrt(c)^T. Only the leading singular
// triplet is extracted.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "lurk/error.hpp"
#include "lurk/graph.hpp"
#include "lurk/stats.hpp"
#include "lurk/text.hpp"

namespace lurk {

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct InteractionMatrix {
  SparseRowMatrix counts;  // integer retweet counts, rows = users, cols = influencers
  std::vector<std::string> row_ids;
  std::vector<std::string> col_ids;
  Eigen::VectorXd row_sums;
  Eigen::VectorXd col_sums;
  std::vector<std::string> dropped_cols;  // influencers with no qualifying retweeter

  Eigen::Index rows() const { return counts.rows(); }
  Eigen::Index cols() const { return counts.cols(); }
  double total() const { return row_sums.sum(); }
};

struct MatrixOptions {
  std::uint32_t min_distinct = 2;  // distinct influencers a user must retweet
  bool include_self_loops = false;
};

namespace detail {

inline void fill_sums(InteractionMatrix& m) {
  m.row_sums = Eigen::VectorXd::Zero(m.counts.rows());
  m.col_sums = Eigen::VectorXd::Zero(m.counts.cols());
  for (Eigen::Index i = 0; i < m.counts.outerSize(); ++i)
    for (SparseRowMatrix::InnerIterator it(m.counts, i); it; ++it) {
      m.row_sums[it.row()] += it.value();
      m.col_sums[it.col()] += it.value();
    }
}

} // namespace detail

// Builds a matrix from explicit counts, keeping every row and column as given.
// Intended for tests and small hand-made inputs.
inline InteractionMatrix make_interaction_matrix(const Eigen::MatrixXd& dense, std::vector<std::string> row_ids = {},
                                                 std::vector<std::string> col_ids = {}) {
  InteractionMatrix m;
  if (row_ids.empty())
    for (Eigen::Index i = 0; i < dense.rows(); ++i) row_ids.push_back("r" + std::to_string(i));
  if (col_ids.empty())
    for (Eigen::Index j = 0; j < dense.cols(); ++j) col_ids.push_back("c" + std::to_string(j));
  if (static_cast<Eigen::Index>(row_ids.size()) != dense.rows() ||
      static_cast<Eigen::Index>(col_ids.size()) != dense.cols())
    throw Error("id list size does not match matrix shape");
  if ((dense.array() < 0).any()) throw Error("interaction counts must be non-negative");
  m.counts = dense.sparseView();
  m.counts.makeCompressed();
  m.row_ids = std::move(row_ids);
  m.col_ids = std::move(col_ids);
  detail::fill_sums(m);
  return m;
}

inline InteractionMatrix build_interaction_matrix(const RetweetGraph& g, const InfluencerSet& infl,
                                                  MatrixOptions opts = {}) {
  if (infl.members.empty()) throw Error("influencer set is empty");
  std::unordered_map<std::uint32_t, Eigen::Index> col_of;
  std::vector<std::string> cols;
  for (const auto& id : infl.members) {
    auto node = g.find(id);
    if (!node) throw Error("influencer not in graph: " + id);
    if (col_of.emplace(*node, static_cast<Eigen::Index>(cols.size())).second) cols.push_back(id);
  }

  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<std::string> rows;
  std::vector<double> col_mass(cols.size(), 0.0);
  for (std::uint32_t u = 0; u < g.node_count(); ++u) {
    std::vector<std::pair<Eigen::Index, double>> entries;
    for (const auto& nb : g.out_neighbors(u)) {
      if (nb.node == u && !opts.include_self_loops) continue;
      auto it = col_of.find(nb.node);
      if (it != col_of.end()) entries.emplace_back(it->second, static_cast<double>(nb.weight));
    }
    if (entries.size() < opts.min_distinct || entries.empty()) continue;
    const auto row = static_cast<Eigen::Index>(rows.size());
    rows.push_back(g.id(u));
    for (const auto& [c, w] : entries) {
      triplets.emplace_back(row, c, w);
      col_mass[static_cast<std::size_t>(c)] += w;
    }
  }

  // Drop columns nobody qualifying retweeted.
  InteractionMatrix m;
  std::vector<Eigen::Index> new_col(cols.size(), -1);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (col_mass[j] > 0) {
      new_col[j] = static_cast<Eigen::Index>(m.col_ids.size());
      m.col_ids.push_back(cols[j]);
    } else {
      m.dropped_cols.push_back(cols[j]);
    }
  }
  for (auto& t : triplets) t = Eigen::Triplet<double>(t.row(), new_col[static_cast<std::size_t>(t.col())], t.value());

  if (rows.size() < 2 || m.col_ids.size() < 2)
    throw Error("interaction matrix is " + std::to_string(rows.size()) + "x" + std::to_string(m.col_ids.size()) +
                " after pruning; correspondence analysis needs at least 2x2 (min_distinct=" +
                std::to_string(opts.min_distinct) + ")");
  m.row_ids = std::move(rows);
  m.counts.resize(static_cast<Eigen::Index>(m.row_ids.size()), static_cast<Eigen::Index>(m.col_ids.size()));
  m.counts.setFromTriplets(triplets.begin(), triplets.end());
  m.counts.makeCompressed();
  detail::fill_sums(m);
  return m;
}

// A linear map with products in both directions.
template <typename Op>
concept LinearOperator = requires(const Op& op, const Eigen::VectorXd& x) {
  { op.rows() } -> std::convertible_to<Eigen::Index>;
  { op.cols() } -> std::convertible_to<Eigen::Index>;
  { op.apply(x) } -> std::convertible_to<Eigen::VectorXd>;
  { op.apply_transpose(x) } -> std::convertible_to<Eigen::VectorXd>;
};

class NormalizedMatrix {
public:
  explicit NormalizedMatrix(const InteractionMatrix& m) : total_(m.total()) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!(m.row_sums[i] > 0)) throw Error("zero row mass for user " + m.row_ids[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!(m.col_sums[j] > 0)) throw Error("zero column mass for influencer " + m.col_ids[static_cast<std::size_t>(j)]);
    r_ = m.row_sums / total_;
    c_ = m.col_sums / total_;
    sqrt_r_ = r_.cwiseSqrt();
    sqrt_c_ = c_.cwiseSqrt();
    // (Dr^{-1/2} P Dc^{-1/2})_ij = A_ij / sqrt(R_i C_j); the grand total cancels.
    scaled_ = m.counts;
    for (Eigen::Index i = 0; i < scaled_.outerSize(); ++i)
      for (SparseRowMatrix::InnerIterator it(scaled_, i); it; ++it)
        it.valueRef() = it.value() / std::sqrt(m.row_sums[it.row()] * m.col_sums[it.col()]);
    probabilities_ = m.counts / total_;
  }

  Eigen::Index rows() const { return scaled_.rows(); }
  Eigen::Index cols() const { return scaled_.cols(); }

  // S v
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    Eigen::VectorXd out = scaled_ * v;
    out -= sqrt_r_ * sqrt_c_.dot(v);
    return out;
  }

  // S^T u
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& u) const {
    Eigen::VectorXd out = scaled_.transpose() * u;
    out -= sqrt_c_ * sqrt_r_.dot(u);
    return out;
  }

  // Materializes S from the factored form; small inputs only.
  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd s = Eigen::MatrixXd(scaled_);
    s -= sqrt_r_ * sqrt_c_.transpose();
    return s;
  }

  const SparseRowMatrix& probabilities() const { return probabilities_; }
  const Eigen::VectorXd& row_masses() const { return r_; }
  const Eigen::VectorXd& col_masses() const { return c_; }
  double grand_total() const { return total_; }

private:
  double total_;
  Eigen::VectorXd r_, c_, sqrt_r_, sqrt_c_;
  SparseRowMatrix scaled_;
  SparseRowMatrix probabilities_;
};

static_assert(LinearOperator<NormalizedMatrix>);

struct SolverOptions {
  double tol = 1e-10;
  std::size_t max_iter = 10000;  // total Lanczos steps across restarts
  std::uint64_t seed = 1;
  Eigen::Index krylov_dim = 20;
};

struct SingularTriplet {
  double sigma = 0.0;
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  std::size_t iterations = 0;
  std::size_t restarts = 0;
  double residual = 0.0;  // max(|S v - sigma u|, |S^T u - sigma v|) / sigma
};

namespace detail {

// Uniform on [-1, 1) from raw mt19937_64 output; platform independent.
inline Eigen::VectorXd seeded_vector(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = static_cast<double>(gen() >> 11) * 0x1.0p-52 - 1.0;
  return v;
}

// Two passes of classical Gram-Schmidt against the first `k` columns.
inline void reorthogonalize(Eigen::VectorXd& x, const Eigen::MatrixXd& basis, Eigen::Index k) {
  if (k == 0) return;
  for (int pass = 0; pass < 2; ++pass) x.noalias() -= basis.leftCols(k) * (basis.leftCols(k).transpose() * x);
}

} // namespace detail

// Leading singular triplet by Golub-Kahan-Lanczos bidiagonalization with full
// reorthogonalization, restarted explicitly from the current Ritz vector.
// Converged when both residuals are within tol * sigma.
template <LinearOperator Op>
SingularTriplet leading_singular_triplet(const Op& op, const SolverOptions& opts = {}) {
  if (!(opts.tol > 0)) throw Error("solver tolerance must be positive");
  const Eigen::Index m = op.rows(), n = op.cols();
  if (m == 0 || n == 0) throw Error("empty operator");
  const Eigen::Index k = std::max<Eigen::Index>(1, std::min({opts.krylov_dim, m, n}));

  // Starting in the range of S^T discards the right null space up front.
  Eigen::VectorXd v = op.apply_transpose(detail::seeded_vector(m, opts.seed));
  double vnorm = v.norm();
  if (!(vnorm > 0)) throw Error("degenerate matrix: S is zero (rows and columns are independent)");
  v /= vnorm;

  SingularTriplet out;
  Eigen::MatrixXd U(m, k), V(n, k);
  Eigen::VectorXd alpha(k), beta(k);
  for (;;) {
    V.col(0) = v;
    Eigen::Index steps = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
      Eigen::VectorXd u = op.apply(V.col(j));
      if (j > 0) u -= beta[j - 1] * U.col(j - 1);
      detail::reorthogonalize(u, U, j);
      alpha[j] = u.norm();
      ++out.iterations;
      if (!(alpha[j] > std::numeric_limits<double>::min())) break;
      U.col(j) = u / alpha[j];
      steps = j + 1;
      Eigen::VectorXd w = op.apply_transpose(U.col(j)) - alpha[j] * V.col(j);
      detail::reorthogonalize(w, V, j + 1);
      beta[j] = w.norm();
      if (j + 1 < k) {
        if (!(beta[j] > 1e-14 * alpha[j])) break;  // invariant subspace found
        V.col(j + 1) = w / beta[j];
      }
    }
    if (steps == 0) throw Error("degenerate matrix: leading singular value is zero");

    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(steps, steps);
    for (Eigen::Index j = 0; j < steps; ++j) {
      B(j, j) = alpha[j];
      if (j + 1 < steps) B(j, j + 1) = beta[j];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double sigma = svd.singularValues()[0];
    Eigen::VectorXd u1 = U.leftCols(steps) * svd.matrixU().col(0);
    Eigen::VectorXd v1 = V.leftCols(steps) * svd.matrixV().col(0);
    u1.normalize();
    v1.normalize();

    if (!(sigma > opts.tol))
      throw Error("degenerate matrix: leading singular value " + text::fmt_double(sigma) + " <= tolerance");
    const double res_u = (op.apply(v1) - sigma * u1).norm();
    const double res_v = (op.apply_transpose(u1) - sigma * v1).norm();
    out.residual = std::max(res_u, res_v) / sigma;
    out.sigma = sigma;
    out.u = std::move(u1);
    out.v = std::move(v1);
    if (out.residual <= opts.tol) return out;
    if (out.iterations >= opts.max_iter)
      throw Error("leading singular triplet did not converge after " + std::to_string(out.iterations) +
                  " iterations (relative residual " + text::fmt_double(out.residual) + ")");
    ++out.restarts;
    v = out.v;
  }
}

struct IdeologyScores {
  std::vector<std::string> user_ids;
  std::vector<double> user_scores;  // rescaled to [-1, 1]
  std::vector<double> user_raw;     // sign-aligned entries of the unit left singular vector
  std::vector<std::string> influencer_ids;
  std::vector<double> influencer_scores;  // median of retweeters' scores
  std::vector<double> influencer_raw;     // median of retweeters' raw scores
  std::vector<std::string> unscored_influencers;
  double sigma1 = 0.0;
  std::string anchor_id;
  std::size_t iterations = 0;
  double residual = 0.0;

  std::unordered_map<std::string, double> user_map() const {
    std::unordered_map<std::string, double> out;
    for (std::size_t i = 0; i < user_ids.size(); ++i) out.emplace(user_ids[i], user_scores[i]);
    return out;
  }
  std::unordered_map<std::string, double> influencer_map() const {
    std::unordered_map<std::string, double> out;
    for (std::size_t i = 0; i < influencer_ids.size(); ++i) out.emplace(influencer_ids[i], influencer_scores[i]);
    return out;
  }
  // Influencers take their own score; everyone else their user score.
  std::unordered_map<std::string, double> node_map() const {
    auto out = user_map();
    for (std::size_t i = 0; i < influencer_ids.size(); ++i) out[influencer_ids[i]] = influencer_scores[i];
    return out;
  }
};

// Orients the leading left singular vector so the anchor influencer scores
// negative, rescales by max |entry|, and scores each influencer by the median
// of its retweeters.
inline IdeologyScores score_users_and_influencers(const InteractionMatrix& m, const SingularTriplet& t,
                                                  const std::string& anchor_id) {
  auto anchor_it = std::find(m.col_ids.begin(), m.col_ids.end(), anchor_id);
  if (anchor_it == m.col_ids.end()) throw Error("anchor influencer not among matrix columns: " + anchor_id);
  const auto anchor_col = static_cast<Eigen::Index>(anchor_it - m.col_ids.begin());
  if (t.u.size() != m.rows() || t.v.size() != m.cols()) throw Error("singular triplet does not match matrix shape");

  // retweeters per column
  std::vector<std::vector<Eigen::Index>> retweeters(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.counts.outerSize(); ++i)
    for (SparseRowMatrix::InnerIterator it(m.counts, i); it; ++it)
      if (it.value() > 0) retweeters[static_cast<std::size_t>(it.col())].push_back(it.row());

  auto column_median = [&](const Eigen::VectorXd& s, Eigen::Index col) {
    std::vector<double> vals;
    for (auto row : retweeters[static_cast<std::size_t>(col)]) vals.push_back(s[row]);
    return stats::median(std::move(vals));
  };

  Eigen::VectorXd raw = t.u;
  const double anchor_median = column_median(raw, anchor_col);
  double orientation = 0.0;
  if (anchor_median != 0.0)
    orientation = anchor_median;
  else if (t.v[anchor_col] != 0.0)
    orientation = t.v[anchor_col];
  else
    throw Error("anchor influencer " + anchor_id + " sits at zero; cannot orient the ideology axis");
  if (orientation > 0) raw = -raw;

  const double scale = raw.cwiseAbs().maxCoeff();
  if (!(scale > 0)) throw Error("all user scores are zero");

  IdeologyScores out;
  out.sigma1 = t.sigma;
  out.anchor_id = anchor_id;
  out.iterations = t.iterations;
  out.residual = t.residual;
  out.user_ids = m.row_ids;
  out.user_raw.assign(raw.data(), raw.data() + raw.size());
  out.user_scores.resize(out.user_raw.size());
  Eigen::VectorXd scaled = raw / scale;
  for (Eigen::Index i = 0; i < scaled.size(); ++i) out.user_scores[static_cast<std::size_t>(i)] = scaled[i];
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (retweeters[static_cast<std::size_t>(j)].empty()) {
      out.unscored_influencers.push_back(m.col_ids[static_cast<std::size_t>(j)]);
      continue;
    }
    out.influencer_ids.push_back(m.col_ids[static_cast<std::size_t>(j)]);
    out.influencer_scores.push_back(column_median(scaled, j));
    out.influencer_raw.push_back(column_median(raw, j));
  }
  for (const auto& d : m.dropped_cols) out.unscored_influencers.push_back(d);
  return out;
}

// build -> normalize -> leading triplet -> score. The solve runs on rows in id
// order, so any row permutation of `m` gives bit-identical scores.
inline IdeologyScores estimate_ideology(const InteractionMatrix& m, const std::string& anchor_id,
                                        const SolverOptions& opts = {}) {
  std::vector<std::size_t> order(m.row_ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return m.row_ids[a] < m.row_ids[b]; });
  if (std::is_sorted(order.begin(), order.end())) {
    NormalizedMatrix s(m);
    return score_users_and_influencers(m, leading_singular_triplet(s, opts), anchor_id);
  }

  InteractionMatrix c;
  c.col_ids = m.col_ids;
  c.dropped_cols = m.dropped_cols;
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < order.size(); ++r) {
    c.row_ids.push_back(m.row_ids[order[r]]);
    for (SparseRowMatrix::InnerIterator it(m.counts, static_cast<Eigen::Index>(order[r])); it; ++it)
      triplets.emplace_back(static_cast<Eigen::Index>(r), it.col(), it.value());
  }
  c.counts.resize(m.rows(), m.cols());
  c.counts.setFromTriplets(triplets.begin(), triplets.end());
  c.counts.makeCompressed();
  detail::fill_sums(c);
  NormalizedMatrix s(c);
  IdeologyScores sorted = score_users_and_influencers(c, leading_singular_triplet(s, opts), anchor_id);

  IdeologyScores out = sorted;
  out.user_ids = m.row_ids;
  for (std::size_t r = 0; r < order.size(); ++r) {
    out.user_scores[order[r]] = sorted.user_scores[r];
    out.user_raw[order[r]] = sorted.user_raw[r];
  }
  return out;
}

// ---------------------------------------------------------------------------
// file formats

inline void write_scores_csv(std::ostream& out, const IdeologyScores& s) {
  out << "id,kind,score,raw_score\n";
  for (std::size_t i = 0; i < s.user_ids.size(); ++i)
    out << text::csv_field(s.user_ids[i]) << ",user," << text::fmt_double(s.user_scores[i]) << ','
        << text::fmt_double(s.user_raw[i]) << '\n';
  for (std::size_t i = 0; i < s.influencer_ids.size(); ++i)
    out << text::csv_field(s.influencer_ids[i]) << ",influencer," << text::fmt_double(s.influencer_scores[i]) << ','
        << text::fmt_double(s.influencer_raw[i]) << '\n';
}

inline void write_scores_csv(const std::string& path, const IdeologyScores& s) {
  auto out = text::open_output(path);
  write_scores_csv(out, s);
}

// Solver metadata is not part of the CSV and is left at defaults.
inline IdeologyScores read_scores_csv(const std::string& path) {
  auto in = text::open_input(path);
  IdeologyScores s;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    auto f = text::split_csv(line);
    if (lineno == 1 && !f.empty() && f[0] == "id") continue;
    if (f.size() != 4) throw Error(path + ":" + std::to_string(lineno) + ": expected id,kind,score,raw_score");
    auto score = text::parse_double(f[2]);
    auto raw = text::parse_double(f[3]);
    if (!score || !raw) throw Error(path + ":" + std::to_string(lineno) + ": invalid score");
    if (f[1] == "user") {
      s.user_ids.push_back(f[0]);
      s.user_scores.push_back(*score);
      s.user_raw.push_back(*raw);
    } else if (f[1] == "influencer") {
      s.influencer_ids.push_back(f[0]);
      s.influencer_scores.push_back(*score);
      s.influencer_raw.push_back(*raw);
    } else {
      throw Error(path + ":" + std::to_string(lineno) + ": unknown kind " + f[1]);
    }
  }
  return s;
}

} // namespace lurk
