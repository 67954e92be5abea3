#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "sslab/error.hpp"
#include "sslab/math.hpp"
#include "sslab/model.hpp"
#include "sslab/rng.hpp"

namespace sslab {

struct FisherPair {
  SymMat i_xy;
  SymMat i_x;
};

// Marginal-feature information of the mixture model:
//   I_X(t) = 2 (log((1+v)/(1-v)) - 2v) / v^3,  v = 2t - 1,
// with the series 4/3 + (4/5)v^2 + (4/7)v^4 + ... near v = 0 where the closed
// form cancels catastrophically.
inline double mixture_marginal_fisher(double t) {
  const double v = 2.0 * t - 1.0;
  if (std::abs(v) < 0.25) {
    double acc = 0.0;
    double pow_v = 1.0;
    const double v2 = v * v;
    for (int k = 0; k <= 12; ++k) {
      acc += 4.0 * pow_v / (2.0 * k + 3.0);
      pow_v *= v2;
    }
    return acc;
  }
  return 2.0 * (std::log1p(v) - std::log1p(-v) - 2.0 * v) / (v * v * v);
}

inline FisherPair fisher_analytic(const MixtureModel& model,
                                  MixtureModel::Param p) {
  (void)model;
  FisherPair pair{SymMat(1), SymMat(1)};
  pair.i_xy(0, 0) = 1.0 / (p.t * (1.0 - p.t));
  pair.i_x(0, 0) = mixture_marginal_fisher(p.t);
  return pair;
}

// Closed forms in the (mu, sigma) parameterization, validated against the
// Monte Carlo estimator below before being frozen here:
//   I_XY = diag(1, 2/sigma^2)
//   I_X  = diag(1/(sigma^2+1), 2 sigma^2/(sigma^2+1)^2)
inline FisherPair fisher_analytic(const GaussianModel& model,
                                  GaussianModel::Param p) {
  (void)model;
  const double s2 = p.sigma * p.sigma;
  const double v = s2 + 1.0;
  FisherPair pair{SymMat(2), SymMat(2)};
  pair.i_xy(0, 0) = 1.0;
  pair.i_xy(1, 1) = 2.0 / s2;
  pair.i_x(0, 0) = 1.0 / v;
  pair.i_x(1, 1) = 2.0 * s2 / (v * v);
  return pair;
}

// Reference variant of the Gaussian pair under which the rate constants take
// the closed forms k2 = 1 and k3 = sigma^2 + 1/sigma^2 exactly. It differs
// from fisher_analytic in the (2,2) entry of i_x and is kept only to
// cross-check the constant formulas end to end; use fisher_analytic for
// everything else.
inline FisherPair gaussian_fisher_reference(double sigma) {
  const double s2 = sigma * sigma;
  FisherPair pair{SymMat(2), SymMat(2)};
  pair.i_xy(0, 0) = 1.0;
  pair.i_xy(1, 1) = 2.0 / s2;
  pair.i_x(0, 0) = 1.0 / (s2 + 1.0);
  pair.i_x(1, 1) = 2.0 / (s2 + 1.0);
  return pair;
}

struct FisherMcResult {
  FisherPair value;
  FisherPair std_error;
  std::size_t samples = 0;
};

namespace detail {

template <int D>
struct OuterAccumulator {
  std::array<double, 3> sum{0.0, 0.0, 0.0};
  std::array<double, 3> sumsq{0.0, 0.0, 0.0};

  void add(const std::array<double, 2>& s) {
    const std::array<double, 3> prod =
        D == 1 ? std::array<double, 3>{s[0] * s[0], 0.0, 0.0}
               : std::array<double, 3>{s[0] * s[0], s[0] * s[1], s[1] * s[1]};
    for (int k = 0; k < 3; ++k) {
      sum[k] += prod[k];
      sumsq[k] += prod[k] * prod[k];
    }
  }

  void finish(std::size_t n, SymMat& mean, SymMat& se) const {
    const std::array<std::pair<int, int>, 3> idx{{{0, 0}, {0, 1}, {1, 1}}};
    for (int k = 0; k < (D == 1 ? 1 : 3); ++k) {
      const double m = sum[k] / n;
      const double var = std::max(0.0, sumsq[k] / n - m * m);
      mean(idx[k].first, idx[k].second) = m;
      se(idx[k].first, idx[k].second) = std::sqrt(var / n);
    }
  }
};

}  // namespace detail

// Empirical mean of score outer products over exact samples from p_theta.
// Symmetry is structural: only unique entries are estimated.
template <class M>
FisherMcResult fisher_mc(const M& model, typename M::Param theta,
                         std::size_t samples, std::uint64_t seed) {
  if (samples < 1000) throw ConfigError("fisher_mc requires at least 1000 samples");
  constexpr int d = M::kDim;
  detail::OuterAccumulator<d> joint_acc, marginal_acc;

  Rng joint_rng(stream_key(seed, 0, purpose_tag("fisher-joint")));
  for (std::size_t i = 0; i < samples; ++i) {
    const auto z = model.sample_pair(theta, joint_rng);
    if constexpr (d == 1)
      joint_acc.add({model.score_joint(theta, z), 0.0});
    else
      joint_acc.add(model.score_joint(theta, z));
  }

  Rng marginal_rng(stream_key(seed, 0, purpose_tag("fisher-marginal")));
  for (std::size_t i = 0; i < samples; ++i) {
    const double x = model.sample_x(theta, marginal_rng);
    if constexpr (d == 1)
      marginal_acc.add({model.score_marginal(theta, x), 0.0});
    else
      marginal_acc.add(model.score_marginal(theta, x));
  }

  FisherMcResult r{{SymMat(d), SymMat(d)}, {SymMat(d), SymMat(d)}, samples};
  joint_acc.finish(samples, r.value.i_xy, r.std_error.i_xy);
  marginal_acc.finish(samples, r.value.i_x, r.std_error.i_x);
  return r;
}

struct Condition1Report {
  bool i_xy_pd = false;
  bool i_x_pd = false;
  bool strict_order = false;  // I_XY - I_X positive definite
  double min_eig_xy = 0.0;
  double min_eig_x = 0.0;
  double min_eig_diff = 0.0;
};

inline Condition1Report check_condition1(const FisherPair& pair,
                                         double tol = 1e-8) {
  Condition1Report rep;
  rep.min_eig_xy = pair.i_xy.min_eigenvalue();
  rep.min_eig_x = pair.i_x.min_eigenvalue();
  rep.min_eig_diff = (pair.i_xy - pair.i_x).min_eigenvalue();
  rep.i_xy_pd = rep.min_eig_xy > tol;
  rep.i_x_pd = rep.min_eig_x > tol;
  rep.strict_order = rep.min_eig_diff > tol;
  return rep;
}

}  // namespace sslab
