#pragma once

#include "ppdsc/core.hpp"
#include "ppdsc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ppdsc::privacy {

/// Randomized-response retention probabilities: a 1-edge stays 1 with
/// probability q, a 0-edge stays 0 with probability qprime. Both must lie in
/// (0,1]; debiasing additionally needs q + qprime > 1.
struct PrivacyParams {
  double q;
  double qprime;

  PrivacyParams(double q_, double qprime_) : q(q_), qprime(qprime_) {
    if (!(q > 0.0 && q <= 1.0 && qprime > 0.0 && qprime <= 1.0))
      throw degenerate_parameters("retention probabilities must lie in (0,1]");
  }

  bool debiasable() const { return q + qprime > 1.0; }
};

/// Edge-DP budget; +infinity is the legitimate "no privacy" sentinel for
/// q = 1 or qprime = 1.
struct PrivacyBudget {
  double epsilon;

  static PrivacyBudget unlimited() {
    return {std::numeric_limits<double>::infinity()};
  }
};

/// Perturb one layer with randomized response: for i<j, a 1 stays 1 with
/// probability q and a 0 flips to 1 with probability 1-qprime; the result is
/// mirrored to the lower triangle. One Bernoulli draw per upper-triangle
/// entry in row-major order, so the consumed stream is independent of the
/// input's edge pattern.
inline model::Adjacency rr_perturb(const model::Adjacency& a, const PrivacyParams& params,
                                   std::uint64_t seed) {
  const auto n = a.n();
  rng::engine g(seed);
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double keep_one = a.matrix()(i, j) == 1.0 ? params.q : 1.0 - params.qprime;
      const double v = rng::bernoulli(g, keep_one) ? 1.0 : 0.0;
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return model::Adjacency(std::move(out));
}

/// Smallest budget the mechanism satisfies:
/// eps = log max{ q'/(1-q), (1-q)/q', (1-q')/q, q/(1-q') },
/// +infinity when q = 1 or q' = 1.
inline PrivacyBudget min_budget(const PrivacyParams& params) {
  const double q = params.q, qp = params.qprime;
  if (q == 1.0 || qp == 1.0) return PrivacyBudget::unlimited();
  const double ratio = std::max({qp / (1.0 - q), (1.0 - q) / qp,
                                 (1.0 - qp) / q, q / (1.0 - qp)});
  return {std::log(ratio)};
}

/// Symmetric parameters meeting a budget exactly: q = q' = e^eps/(1+e^eps).
/// Round-trips with min_budget.
inline PrivacyParams params_from_budget(double epsilon) {
  if (!(epsilon > 0.0)) throw degenerate_parameters("privacy budget must be positive");
  const double q = 1.0 / (1.0 + std::exp(-epsilon));
  return {q, q};
}

}  // namespace ppdsc::privacy
