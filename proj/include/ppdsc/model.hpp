#pragma once

#include "ppdsc/core.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace ppdsc::model {

namespace detail {

/// Spectral norm of a small symmetric matrix via a full eigensolve.
inline double spectral_norm_sym(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

}  // namespace detail

/// Node-to-community map. Labels are 0-based in memory; file formats expose
/// 1-based communities (see io.hpp).
class CommunityAssignment {
 public:
  CommunityAssignment(std::vector<int> labels, int k) : labels_(std::move(labels)), k_(k) {
    if (k_ < 1) throw dimension_error("community count must be >= 1");
    if (static_cast<int>(labels_.size()) < k_)
      throw dimension_error("need at least K nodes for K communities");
    for (int g : labels_)
      if (g < 0 || g >= k_) throw dimension_error("community label out of range");
  }

  int n() const { return static_cast<int>(labels_.size()); }
  int k() const { return k_; }
  const std::vector<int>& labels() const { return labels_; }

  std::vector<int> community_sizes() const {
    std::vector<int> sizes(k_, 0);
    for (int g : labels_) ++sizes[g];
    return sizes;
  }

 private:
  std::vector<int> labels_;
  int k_;
};

/// Balanced contiguous assignment: the first (n mod K) communities get
/// ceil(n/K) nodes, the rest floor(n/K).
inline CommunityAssignment balanced_assignment(int n, int k) {
  if (k < 1 || n < k) throw dimension_error("balanced_assignment: need n >= K >= 1");
  std::vector<int> labels(static_cast<std::size_t>(n));
  int node = 0;
  for (int c = 0; c < k; ++c) {
    const int size = n / k + (c < n % k ? 1 : 0);
    for (int j = 0; j < size; ++j) labels[node++] = c;
  }
  return CommunityAssignment(std::move(labels), k);
}

/// K×K symmetric link-probability matrix, entries in [0,1].
class LinkMatrix {
 public:
  explicit LinkMatrix(Matrix entries) : m_(std::move(entries)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1)
      throw dimension_error("link matrix must be square and nonempty");
    if (((m_ - m_.transpose()).cwiseAbs().maxCoeff()) > 1e-12)
      throw dimension_error("link matrix must be symmetric");
    if (m_.minCoeff() < 0.0 || m_.maxCoeff() > 1.0)
      throw dimension_error("link probabilities must lie in [0,1]");
    m_ = ((m_ + m_.transpose()) / 2.0).eval();  // make symmetry exact
  }

  const Matrix& matrix() const { return m_; }
  int k() const { return static_cast<int>(m_.rows()); }

 private:
  Matrix m_;
};

/// Symmetric binary matrix with a zero diagonal: one observed network layer.
/// Deliberately a strong type — functions that must not see raw networks
/// (the coordinator side) cannot accept it by accident.
class Adjacency {
 public:
  explicit Adjacency(Matrix entries) : m_(std::move(entries)) {
    if (m_.rows() != m_.cols()) throw dimension_error("adjacency must be square");
    const auto n = m_.rows();
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double v = m_(i, j);
        if (v != 0.0 && v != 1.0) throw dimension_error("adjacency entries must be 0 or 1");
      }
      if (m_(j, j) != 0.0) throw dimension_error("adjacency diagonal must be zero");
    }
    if (m_ != m_.transpose()) throw dimension_error("adjacency must be symmetric");
  }

  const Matrix& matrix() const { return m_; }
  Eigen::Index n() const { return m_.rows(); }

  std::uint64_t edge_count() const {
    return static_cast<std::uint64_t>(m_.sum() / 2.0 + 0.5);
  }

 private:
  Matrix m_;
};

/// Membership matrix: row i carries a single 1 in the column of node i's
/// community.
inline Matrix membership_matrix(const CommunityAssignment& g) {
  Matrix theta = Matrix::Zero(g.n(), g.k());
  for (int i = 0; i < g.n(); ++i) theta(i, g.labels()[i]) = 1.0;
  return theta;
}

/// Population link-probability matrix P = Theta B Theta^T, i.e.
/// P_ij = B(g_i, g_j). The diagonal is kept; sampling ignores it.
inline Matrix link_probability(const CommunityAssignment& g, const LinkMatrix& b) {
  if (b.k() != g.k()) throw dimension_error("link matrix order does not match K");
  Matrix p(g.n(), g.n());
  for (int j = 0; j < g.n(); ++j)
    for (int i = 0; i < g.n(); ++i) p(i, j) = b.matrix()(g.labels()[i], g.labels()[j]);
  return p;
}

/// Sample one layer: independent Bernoulli(P_ij) for i<j under the seeded
/// stream, one draw per upper-triangle entry in row-major order, mirrored
/// to the lower triangle. Deterministic given the seed.
inline Adjacency sample_adjacency(const Matrix& p, std::uint64_t seed) {
  if (p.rows() != p.cols()) throw dimension_error("probability matrix must be square");
  if (p.minCoeff() < 0.0 || p.maxCoeff() > 1.0)
    throw dimension_error("probabilities must lie in [0,1]");
  const auto n = p.rows();
  rng::engine g(seed);
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = rng::bernoulli(g, p(i, j)) ? 1.0 : 0.0;
      a(i, j) = v;
      a(j, i) = v;
    }
  }
  return Adjacency(std::move(a));
}

/// Ground-truth generative model: one shared assignment, L link matrices.
struct MultiLayerSBM {
  CommunityAssignment assignment;
  std::vector<LinkMatrix> layers;

  MultiLayerSBM(CommunityAssignment g, std::vector<LinkMatrix> bs)
      : assignment(std::move(g)), layers(std::move(bs)) {
    if (layers.empty()) throw dimension_error("need at least one layer");
    for (const auto& b : layers)
      if (b.k() != assignment.k()) throw dimension_error("layer order does not match K");
  }

  int n() const { return assignment.n(); }
  int k() const { return assignment.k(); }
  int l() const { return static_cast<int>(layers.size()); }

  Matrix link_probability_of(int layer) const {
    return model::link_probability(assignment, layers.at(static_cast<std::size_t>(layer)));
  }

  /// Sample all layers; layer l draws from the substream derive(master, l).
  std::vector<Adjacency> sample(std::uint64_t master_seed) const {
    std::vector<Adjacency> out;
    out.reserve(layers.size());
    for (int l = 0; l < this->l(); ++l)
      out.push_back(sample_adjacency(link_probability_of(l),
                                     rng::derive(master_seed, static_cast<std::uint64_t>(l))));
    return out;
  }
};

/// Population target Q = (1/L) sum_l P_l^2 / n. Symmetric PSD.
inline Matrix population_target(const std::vector<Matrix>& p_list) {
  if (p_list.empty()) throw dimension_error("population_target: empty layer list");
  const auto n = p_list.front().rows();
  Matrix q = Matrix::Zero(n, n);
  for (const Matrix& p : p_list) {
    if (p.rows() != n || p.cols() != n)
      throw dimension_error("population_target: layer shapes differ");
    q += p * p;
  }
  q /= static_cast<double>(p_list.size()) * static_cast<double>(n);
  return ((q + q.transpose()) / 2.0).eval();
}

/// Heterogeneity of the link matrices: the largest spectral-norm deviation of
/// B_l D^2 B_l from its layer average, with D = diag(sqrt(n_k)).
inline double heterogeneity_measure(const std::vector<LinkMatrix>& b_list,
                                    const std::vector<int>& community_sizes) {
  if (b_list.empty()) throw dimension_error("heterogeneity_measure: empty layer list");
  const int k = b_list.front().k();
  if (static_cast<int>(community_sizes.size()) != k)
    throw dimension_error("heterogeneity_measure: community size count differs from K");
  Vector d2(k);
  for (int c = 0; c < k; ++c) {
    if (community_sizes[c] <= 0)
      throw dimension_error("heterogeneity_measure: empty community");
    d2(c) = static_cast<double>(community_sizes[c]);
  }
  std::vector<Matrix> terms;
  terms.reserve(b_list.size());
  Matrix mean = Matrix::Zero(k, k);
  for (const auto& b : b_list) {
    if (b.k() != k) throw dimension_error("heterogeneity_measure: layer orders differ");
    terms.push_back(b.matrix() * d2.asDiagonal() * b.matrix());
    mean += terms.back();
  }
  mean /= static_cast<double>(terms.size());
  double h = 0.0;
  for (const Matrix& t : terms) h = std::max(h, detail::spectral_norm_sym(t - mean));
  return h;
}

/// K-th largest eigenvalue of Q — the smallest eigenvalue of the signal
/// block when Q has rank K.
inline double eigengap(const Matrix& q, int k) {
  if (q.rows() != q.cols()) throw dimension_error("eigengap: matrix must be square");
  if (k < 1 || k > q.rows()) throw dimension_error("eigengap: K out of range");
  Eigen::SelfAdjointEigenSolver<Matrix> es(q, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(q.rows() - k);  // ascending order
}

/// Population quantities of a model in one record.
struct PopulationSummary {
  Matrix q;
  double eigengap = 0.0;
  double heterogeneity = 0.0;
  Vector delta;  // diag entries sqrt(n_1), ..., sqrt(n_K)
};

inline PopulationSummary population_summary(const MultiLayerSBM& sbm) {
  std::vector<Matrix> ps;
  ps.reserve(static_cast<std::size_t>(sbm.l()));
  for (int l = 0; l < sbm.l(); ++l) ps.push_back(sbm.link_probability_of(l));
  PopulationSummary out;
  out.q = population_target(ps);
  out.eigengap = eigengap(out.q, sbm.k());
  const auto sizes = sbm.assignment.community_sizes();
  out.heterogeneity = heterogeneity_measure(sbm.layers, sizes);
  out.delta = Vector(sbm.k());
  for (int c = 0; c < sbm.k(); ++c) out.delta(c) = std::sqrt(static_cast<double>(sizes[c]));
  return out;
}

}  // namespace ppdsc::model
