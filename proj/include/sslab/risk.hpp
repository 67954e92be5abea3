#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <thread>
#include <vector>

#include "sslab/error.hpp"
#include "sslab/grid.hpp"
#include "sslab/loss.hpp"
#include "sslab/math.hpp"
#include "sslab/model.hpp"
#include "sslab/posterior.hpp"
#include "sslab/rates.hpp"
#include "sslab/rng.hpp"

namespace sslab {

// Quadrature controls for the per-replication posterior build.
struct GridSettings {
  std::vector<int> resolution;  // empty -> the model's default
  QuadRule rule = QuadRule::Trapezoid;
  int refine_passes = 1;
  int refine_threshold = 50;  // refine only once n + m exceeds this
};

struct RunSettings {
  int threads = 1;
  GridSettings grid;
};

struct RiskEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t replications = 0;
  std::size_t infinite_loss_events = 0;
  std::uint64_t seed = 0;
  RegimeSpec regime;
  int n = 0;
  int m = 0;
};

namespace detail {

template <class M>
Grid base_grid(const M& model, const GridSettings& gs) {
  std::vector<int> res = gs.resolution;
  if (res.empty())
    res.assign(M::kDefaultResolution.begin(), M::kDefaultResolution.end());
  return build_grid(model.domain(), res, gs.rule);
}

// Reference Gauss-Legendre rule used for the label quadrature of the
// continuous model; computed once per resolution.
inline const std::pair<std::vector<double>, std::vector<double>>& label_rule() {
  static const auto rule = [] {
    std::pair<std::vector<double>, std::vector<double>> r;
    gauss_legendre_reference(256, r.first, r.second);
    return r;
  }();
  return rule;
}

struct RepValues {
  double excess = 0.0;
  double kl = 0.0;
};

// Contiguous-block fan-out over replications. Workers only write disjoint
// replication-indexed slots, so results cannot depend on the worker count.
template <class F>
void parallel_blocks(std::size_t reps, int threads, F&& block) {
  const std::size_t workers =
      std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(reps, 1));
  if (workers <= 1) {
    block(std::size_t{0}, reps);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (reps + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(reps, lo + chunk);
    pool.emplace_back([&errors, &block, w, lo, hi] {
      try {
        block(lo, hi);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// Exact inner expectation over the finite label alphabet.
inline RepValues replication_values(const MixtureModel& model,
                                    MixtureModel::Param theta0,
                                    const Posterior<MixtureModel>& post,
                                    double xprime, const LossSpec& loss_spec) {
  const FinitePredictive q = predictive(model, post, xprime);
  const auto cond = model.cond_y_given_x(theta0, xprime);
  const FiniteDist truth{{1.0, 2.0}, {cond[0], cond[1]}};
  const FiniteDist pred{{1.0, 2.0}, {q.p[0], q.p[1]}};

  RepValues v;
  for (int i = 0; i < 2; ++i) {
    if (cond[i] == 0.0) continue;
    if (q.p[i] <= 0.0) {
      v.kl = std::numeric_limits<double>::infinity();
      break;
    }
    v.kl += cond[i] * std::log(cond[i] / q.p[i]);
  }
  v.kl = std::max(0.0, v.kl);

  const Decision w_hat = bayes_decision(loss_spec, pred);
  const Decision w_star = bayes_decision(loss_spec, truth);
  v.excess = expected_loss(loss_spec, w_hat, truth) -
             expected_loss(loss_spec, w_star, truth);
  return v;
}

// Inner expectation for the continuous model: Gauss-Legendre quadrature over
// the true conditional law, spanning +-8 conditional standard deviations.
inline RepValues replication_values(const GaussianModel& model,
                                    GaussianModel::Param theta0,
                                    const Posterior<GaussianModel>& post,
                                    double xprime, const LossSpec& loss_spec) {
  const GaussianPredictive q = predictive(model, post, xprime);
  const auto law = model.cond_y_given_x(theta0, xprime);
  const double sd = std::sqrt(law.var);
  const double log_norm = -0.5 * (kLogTwoPi + std::log(law.var));

  const auto& [ref_nodes, ref_weights] = label_rule();
  double kl = 0.0;
  for (std::size_t i = 0; i < ref_nodes.size(); ++i) {
    const double y = law.mean + 8.0 * sd * ref_nodes[i];
    const double z = (y - law.mean) / sd;
    const double log_p = log_norm - 0.5 * z * z;
    kl += 8.0 * sd * ref_weights[i] * std::exp(log_p) * (log_p - q.log_pdf(y));
  }

  RepValues v;
  v.kl = std::max(0.0, kl);
  switch (loss_spec.kind) {
    case LossKind::SelfInformation:
      // Self-information excess of a predictive density is exactly this KL.
      v.excess = v.kl;
      break;
    case LossKind::Square: {
      // E[(a - Y)^2] - E[(mean - Y)^2] = (a - mean)^2.
      const double d = q.mixture_mean - law.mean;
      v.excess = d * d;
      break;
    }
    case LossKind::ZeroOne:
      throw ConfigError("zero-one loss needs a finite label alphabet");
  }
  return v;
}

inline RiskEstimate summarize(const std::vector<double>& values,
                              std::uint64_t seed, const RegimeSpec& regime,
                              int n, int m) {
  std::vector<double> valid;
  valid.reserve(values.size());
  for (double v : values)
    if (std::isfinite(v)) valid.push_back(v);
  if (valid.empty())
    throw NumericError("every replication produced an infinite loss");

  RiskEstimate est;
  est.replications = values.size();
  est.infinite_loss_events = values.size() - valid.size();
  est.seed = seed;
  est.regime = regime;
  est.n = n;
  est.m = m;
  est.mean = pairwise_sum(valid) / valid.size();
  if (valid.size() > 1) {
    std::vector<double> sq(valid.size());
    for (std::size_t i = 0; i < valid.size(); ++i) {
      const double d = valid[i] - est.mean;
      sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / (valid.size() - 1);
    est.std_error = std::sqrt(var / valid.size());
  }
  return est;
}

// Runs `reps` independent replications, writing per-replication excess and
// kl values into slot arrays indexed by replication, so the aggregate is
// independent of the worker count.
template <class M>
void run_replications(const M& model, typename M::Param theta0,
                      const RegimeSpec& regime, int n, const LossSpec& loss_spec,
                      const Prior& prior, std::size_t reps, std::uint64_t seed,
                      const RunSettings& settings, std::vector<double>& excess,
                      std::vector<double>& kl) {
  if (reps < 100) throw ConfigError("risk estimation requires reps >= 100");
  if (n < 0) throw ConfigError("risk estimation requires n >= 0");
  if constexpr (!M::kFiniteLabels) {
    if (loss_spec.kind == LossKind::ZeroOne)
      throw ConfigError("zero-one loss needs a finite label alphabet");
  }
  const int m = regime.m_for(n);
  const Grid base = base_grid(model, settings.grid);

  excess.assign(reps, 0.0);
  kl.assign(reps, 0.0);

  const auto block = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      const Dataset<M> ds = sample_dataset(model, theta0, n, m, seed,
                                           static_cast<std::uint64_t>(r));
      Rng xr(stream_key(seed, static_cast<std::uint64_t>(r),
                        purpose_tag("xprime")));
      const double xprime = model.sample_x(theta0, xr);
      Posterior<M> post = posterior(model, base, prior, ds);
      if (n + m > settings.grid.refine_threshold && settings.grid.refine_passes > 0)
        post = refine(model, post, ds, settings.grid.refine_passes);
      const RepValues v = replication_values(model, theta0, post, xprime, loss_spec);
      excess[r] = v.excess;
      kl[r] = v.kl;
    }
  };

  parallel_blocks(reps, settings.threads, block);
}

}  // namespace detail

// Excess-risk and kl-form estimates from one shared set of replications.
template <class M>
struct RiskPair {
  RiskEstimate risk;
  RiskEstimate kl;
};

template <class M>
RiskPair<M> excess_risk_pair(const M& model, typename M::Param theta0,
                             const RegimeSpec& regime, int n,
                             const LossSpec& loss_spec, const Prior& prior,
                             std::size_t reps, std::uint64_t seed,
                             const RunSettings& settings = {}) {
  std::vector<double> excess, kl;
  detail::run_replications(model, theta0, regime, n, loss_spec, prior, reps,
                           seed, settings, excess, kl);
  const int m = regime.m_for(n);
  return {detail::summarize(excess, seed, regime, n, m),
          detail::summarize(kl, seed, regime, n, m)};
}

// Monte Carlo mean of the exact inner-expectation excess loss of the
// posterior-predictive decision against the oracle decision.
template <class M>
RiskEstimate excess_risk(const M& model, typename M::Param theta0,
                         const RegimeSpec& regime, int n,
                         const LossSpec& loss_spec, const Prior& prior,
                         std::size_t reps, std::uint64_t seed,
                         const RunSettings& settings = {}) {
  return excess_risk_pair(model, theta0, regime, n, loss_spec, prior, reps,
                          seed, settings)
      .risk;
}

// Per-replication KL(p_theta0(.|X') || Q(.|data, X')): the low-variance,
// pointwise-nonnegative estimator that equals the self-information excess.
template <class M>
RiskEstimate excess_risk_kl_form(const M& model, typename M::Param theta0,
                                 const RegimeSpec& regime, int n,
                                 const Prior& prior, std::size_t reps,
                                 std::uint64_t seed,
                                 const RunSettings& settings = {}) {
  return excess_risk_pair(model, theta0, regime, n, LossSpec::self_information(),
                          prior, reps, seed, settings)
      .kl;
}

// Diagnostic floor of the predictive probability assigned to the oracle
// zero-one label; labeled data only.
struct FloorPoint {
  int n = 0;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  double floor = 0.0;
  double mean = 0.0;
};

template <class M>
FloorPoint map_posterior_floor(const M& model, typename M::Param theta0, int n,
                               std::size_t reps, std::uint64_t seed,
                               const RunSettings& settings = {}) {
  static_assert(M::kFiniteLabels,
                "the posterior floor diagnostic needs a finite label alphabet");
  if (reps < 1) throw ConfigError("map_posterior_floor requires reps >= 1");
  if (n < 0) throw ConfigError("map_posterior_floor requires n >= 0");
  const Grid base = detail::base_grid(model, settings.grid);

  FloorPoint out{n, reps, seed, std::numeric_limits<double>::infinity(), 0.0};
  std::vector<double> probs(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const Dataset<M> ds = sample_dataset(model, theta0, n, 0, seed,
                                         static_cast<std::uint64_t>(r));
    Rng xr(stream_key(seed, static_cast<std::uint64_t>(r), purpose_tag("xprime")));
    const double xprime = model.sample_x(theta0, xr);
    Posterior<M> post = posterior(model, base, Prior::uniform(), ds);
    if (n > settings.grid.refine_threshold && settings.grid.refine_passes > 0)
      post = refine(model, post, ds, settings.grid.refine_passes);
    const FinitePredictive q = predictive(model, post, xprime);
    const auto cond = model.cond_y_given_x(theta0, xprime);
    const std::size_t oracle = cond[0] >= cond[1] ? 0 : 1;
    probs[r] = q.p[oracle];
    out.floor = std::min(out.floor, probs[r]);
  }
  out.mean = pairwise_sum(probs) / reps;
  return out;
}

}  // namespace sslab
