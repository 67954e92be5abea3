#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sslab/error.hpp"
#include "sslab/fisher.hpp"
#include "sslab/loss.hpp"
#include "sslab/math.hpp"
#include "sslab/model.hpp"
#include "sslab/posterior.hpp"
#include "sslab/rates.hpp"
#include "sslab/risk.hpp"
#include "sslab/rng.hpp"

namespace sslab {

// Closed-form second-order value of the dataset-level KL divergence between
// p(.|theta0) and the prior-mixture evidence. All values in nats.
struct LaplaceValue {
  double value = 0.0;
  int n = 0;
  int m = 0;
  double q_at_theta0 = 0.0;
};

struct McValue {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t replications = 0;
};

namespace detail {

inline McValue mc_summary(const std::vector<double>& values) {
  McValue v;
  v.replications = values.size();
  v.mean = pairwise_sum(values) / values.size();
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double d = values[i] - v.mean;
      sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / (values.size() - 1);
    v.std_error = std::sqrt(var / values.size());
  }
  return v;
}

}  // namespace detail

// (d/2) log(1/(2 pi e)) + log(1/q(theta0)) + (1/2) log|n I_XY + m I_X|.
// At m = 0 the combination matrix degenerates to n I_XY, so one formula
// covers both displays.
inline LaplaceValue laplace_kl(const FisherPair& pair, int n, int m, int d,
                               double q_at_theta0) {
  if (d != pair.i_xy.dim())
    throw ConfigError("dimension does not match the information pair");
  if (n < 0 || m < 0) throw ConfigError("laplace_kl requires n, m >= 0");
  if (!(q_at_theta0 > 0.0))
    throw DomainError("prior density at theta0 must be positive");
  const SymMat combo =
      static_cast<double>(n) * pair.i_xy + static_cast<double>(m) * pair.i_x;
  if (!(combo.min_eigenvalue() > 0.0))
    throw NumericError("information combination is not positive definite");
  LaplaceValue out;
  out.n = n;
  out.m = m;
  out.q_at_theta0 = q_at_theta0;
  out.value = -0.5 * d * kLogTwoPiE - std::log(q_at_theta0) +
              0.5 * std::log(combo.det());
  return out;
}

// Direct Monte Carlo value of the same KL: mean over replicated datasets of
// log p(dataset | theta0) - log evidence(dataset).
template <class M>
McValue mc_kl(const M& model, typename M::Param theta0, int n, int m,
              const Prior& prior, std::size_t reps, std::uint64_t seed,
              const RunSettings& settings = {}) {
  if (reps < 2) throw ConfigError("mc_kl requires reps >= 2");
  if (n < 0 || m < 0) throw ConfigError("mc_kl requires n, m >= 0");
  const Grid base = detail::base_grid(model, settings.grid);

  std::vector<double> values(reps);
  detail::parallel_blocks(reps, settings.threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      const Dataset<M> ds = sample_dataset(model, theta0, n, m, seed,
                                           static_cast<std::uint64_t>(r));
      Posterior<M> post = posterior(model, base, prior, ds);
      if (n + m > settings.grid.refine_threshold && settings.grid.refine_passes > 0)
        post = refine(model, post, ds, settings.grid.refine_passes);
      values[r] = log_likelihood(model, theta0, ds) - post.log_evidence;
    }
  });
  return detail::mc_summary(values);
}

// Leading-order gap of conditional mutual informations for one test label.
// Equal to beta * leading_risk by construction: the beta factors cancel.
inline double mi_gap_leading(const RegimeSpec& regime, int n,
                             const FisherPair& pair, int d) {
  if (d != pair.i_xy.dim())
    throw ConfigError("dimension does not match the information pair");
  return leading_risk(regime, n, rate_constants(pair, regime.alpha, 1.0));
}

// One-sided risk/information comparison for an exp-concave loss:
// excess risk <= (mutual information estimate) / beta, judged at 3 combined
// standard errors. The two sides use decoupled seed streams so the
// comparison is a genuine statistical check.
struct BoundReport {
  RiskEstimate risk;
  McValue mi;
  double beta = 1.0;
  double slack = 0.0;        // mi/beta - risk mean
  double combined_se = 0.0;  // se of the slack
  bool bound_holds = false;
  bool equality_within_se = false;  // meaningful for self-information only
};

template <class M>
BoundReport verify_lemma1(const M& model, typename M::Param theta0,
                          const RegimeSpec& regime, int n,
                          const LossSpec& loss_spec, const Prior& prior,
                          std::size_t reps, std::uint64_t seed,
                          const RunSettings& settings = {}) {
  if (loss_spec.kind == LossKind::ZeroOne)
    throw ConfigError("the information bound needs a known exp-concavity constant");
  const std::uint64_t risk_seed = mix64(seed ^ purpose_tag("risk"));
  const std::uint64_t mi_seed = mix64(seed ^ purpose_tag("mi"));

  BoundReport rep;
  rep.beta = loss_spec.beta();
  rep.risk = excess_risk(model, theta0, regime, n, loss_spec, prior, reps,
                         risk_seed, settings);
  const RiskEstimate mi = excess_risk_kl_form(model, theta0, regime, n, prior,
                                              reps, mi_seed, settings);
  rep.mi = {mi.mean, mi.std_error, mi.replications};
  rep.combined_se = std::hypot(rep.risk.std_error, mi.std_error / rep.beta);
  rep.slack = mi.mean / rep.beta - rep.risk.mean;
  rep.bound_holds = rep.slack >= -3.0 * rep.combined_se;
  rep.equality_within_se = std::abs(rep.slack) <= 3.0 * rep.combined_se;
  return rep;
}

// Mutual-information objective with the parameter itself drawn from the
// prior: E over (theta ~ q, dataset ~ p_theta, X' ~ p_theta) of
// KL(p_theta(.|X') || Q_q(.|data, X')). Parameters are drawn at grid nodes
// with probability proportional to prior density times quadrature weight.
template <class M>
McValue redundancy_objective(const M& model, const Prior& prior, int n,
                             std::size_t reps, std::uint64_t seed,
                             const RunSettings& settings = {}) {
  static_assert(M::kFiniteLabels,
                "the redundancy objective needs a finite label alphabet");
  if (reps < 2) throw ConfigError("redundancy_objective requires reps >= 2");
  if (n < 0) throw ConfigError("redundancy_objective requires n >= 0");
  const Grid base = detail::base_grid(model, settings.grid);
  if (prior.kind == Prior::Kind::Tabulated &&
      prior.log_density.size() != base.size())
    throw ConfigError("tabulated prior does not match the sampling grid");

  std::vector<double> cumulative(base.size());
  double total = 0.0;
  for (std::size_t g = 0; g < base.size(); ++g) {
    total += std::exp(prior_log_density(prior, model.domain(), g) +
                      base.log_weight(g));
    cumulative[g] = total;
  }
  if (!(total > 0.0)) throw NumericError("prior has no mass on the grid");
  for (double& c : cumulative) c /= total;

  std::vector<double> values(reps);
  detail::parallel_blocks(reps, settings.threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      Rng tr(stream_key(seed, static_cast<std::uint64_t>(r),
                        purpose_tag("redundancy-theta")));
      const double u = tr.uniform();
      const std::size_t g =
          std::lower_bound(cumulative.begin(), cumulative.end(), u) -
          cumulative.begin();
      const auto node = base.node(std::min(g, base.size() - 1));
      const typename M::Param theta =
          model.make_param(std::span<const double>(node.data(), M::kDim));

      const Dataset<M> ds = sample_dataset(model, theta, n, 0, seed,
                                           static_cast<std::uint64_t>(r));
      Rng xr(stream_key(seed, static_cast<std::uint64_t>(r),
                        purpose_tag("xprime")));
      const double xprime = model.sample_x(theta, xr);
      Posterior<M> post = posterior(model, base, prior, ds);
      if (n > settings.grid.refine_threshold && settings.grid.refine_passes > 0)
        post = refine(model, post, ds, settings.grid.refine_passes);
      values[r] = detail::replication_values(model, theta, post, xprime,
                                             LossSpec::self_information())
                      .kl;
    }
  });
  return detail::mc_summary(values);
}

}  // namespace sslab
