#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sslab/error.hpp"
#include "sslab/grid.hpp"
#include "sslab/math.hpp"
#include "sslab/model.hpp"

namespace sslab {

// Prior over the parameter set. Uniform needs no storage; Tabulated carries
// one log-density per node of the grid it was built for.
struct Prior {
  enum class Kind { Uniform, Tabulated };
  Kind kind = Kind::Uniform;
  std::vector<double> log_density;

  static Prior uniform() { return {}; }
};

// Normalizes the tabulated values so the grid integrates the prior to 1.
inline Prior tabulated_prior(const Grid& grid, std::vector<double> log_density) {
  if (log_density.size() != grid.size())
    throw ConfigError("tabulated prior must provide one value per grid node");
  std::vector<double> terms(log_density.size());
  for (std::size_t g = 0; g < log_density.size(); ++g)
    terms[g] = log_density[g] + grid.log_weight(g);
  const double log_z = log_sum_exp(terms);
  if (!std::isfinite(log_z)) throw NumericError("prior has no mass on the grid");
  for (auto& v : log_density)
    if (v != neg_inf()) v -= log_z;
  Prior p;
  p.kind = Prior::Kind::Tabulated;
  p.log_density = std::move(log_density);
  return p;
}

inline Prior gaussian_bump_prior(const Grid& grid, std::span<const double> center,
                                 double width) {
  if (static_cast<int>(center.size()) != grid.dim())
    throw ConfigError("bump center must match the grid dimension");
  if (!(width > 0.0)) throw ConfigError("bump width must be positive");
  std::vector<double> ld(grid.size());
  for (std::size_t g = 0; g < ld.size(); ++g) {
    const auto node = grid.node(g);
    double acc = 0.0;
    for (int k = 0; k < grid.dim(); ++k) {
      const double d = (node[k] - center[k]) / width;
      acc -= 0.5 * d * d;
    }
    ld[g] = acc;
  }
  return tabulated_prior(grid, std::move(ld));
}

// All mass on a single node; with density 1/weight the grid integrates it to
// exactly 1.
inline Prior point_mass_prior(const Grid& grid, std::size_t node_index) {
  if (node_index >= grid.size()) throw ConfigError("point mass node out of range");
  std::vector<double> ld(grid.size(), neg_inf());
  ld[node_index] = -grid.log_weight(node_index);
  Prior p;
  p.kind = Prior::Kind::Tabulated;
  p.log_density = std::move(ld);
  return p;
}

// Log prior density at a grid node. Uniform densities refer to the model's
// full parameter domain even when the grid covers a refinement window.
inline double prior_log_density(const Prior& prior, const ParamDomain& full_domain,
                                std::size_t node_index) {
  if (prior.kind == Prior::Kind::Uniform) return -std::log(full_domain.volume());
  return prior.log_density[node_index];
}

template <class M>
struct Posterior {
  Grid grid;
  Prior prior;
  std::vector<double> log_weight;  // normalized: log-sum-exp equals 0
  double log_evidence = 0.0;
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 2> sd{0.0, 0.0};
};

// Node weight = prior density * quadrature weight * likelihood, normalized in
// log space; the unnormalized log-sum-exp is the log-evidence of the dataset.
template <class M>
Posterior<M> posterior(const M& model, const Grid& grid, const Prior& prior,
                       const Dataset<M>& ds) {
  if (prior.kind == Prior::Kind::Tabulated &&
      prior.log_density.size() != grid.size())
    throw ConfigError("tabulated prior does not match the grid");

  const auto stats = model.lik_stats(ds.labeled, ds.unlabeled);
  const std::size_t count = grid.size();
  Posterior<M> post{grid, prior, std::vector<double>(count), 0.0, {}, {}};
  for (std::size_t g = 0; g < count; ++g) {
    const auto coords = grid.node(g);
    const auto param =
        model.make_param(std::span<const double>(coords.data(), grid.dim()));
    post.log_weight[g] = prior_log_density(prior, model.domain(), g) +
                         grid.log_weight(g) + model.log_likelihood(param, stats);
  }
  post.log_evidence = log_sum_exp(post.log_weight);
  if (!std::isfinite(post.log_evidence))
    throw NumericError("degenerate posterior: no likelihood mass on the grid");
  for (auto& lw : post.log_weight) lw -= post.log_evidence;

  for (int k = 0; k < grid.dim(); ++k) {
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t g = 0; g < count; ++g) {
      const double p = std::exp(post.log_weight[g]);
      const double c = grid.node(g)[k];
      m1 += p * c;
      m2 += p * c * c;
    }
    post.mean[k] = m1;
    post.sd[k] = std::sqrt(std::max(0.0, m2 - m1 * m1));
  }
  return post;
}

// Re-grids each pass onto [mean - 10 sd, mean + 10 sd] per dimension clamped
// to the full domain, at the original resolution and rule. The original prior
// density is evaluated on the window, never renormalized to it, so the
// refined evidence remains an estimate of the integral over the full domain
// (the mass outside a 10-sd window is negligible once the posterior has
// concentrated). Tabulated priors are defined only at their construction
// nodes, so refinement returns the posterior unchanged for them.
template <class M>
Posterior<M> refine(const M& model, const Posterior<M>& post, const Dataset<M>& ds,
                    int passes) {
  if (passes < 1) throw ConfigError("refine requires passes >= 1");
  if (post.prior.kind == Prior::Kind::Tabulated) return post;

  Posterior<M> cur = post;
  const auto resolutions = post.grid.resolutions();
  for (int pass = 0; pass < passes; ++pass) {
    std::vector<Interval> window;
    for (int k = 0; k < cur.grid.dim(); ++k) {
      const Interval full = model.domain().bound(k);
      const Interval reg = cur.grid.region().bound(k);
      const double cell = (reg.hi - reg.lo) / (resolutions[k] - 1);
      const double half = std::max(10.0 * cur.sd[k], 2.0 * cell);
      double lo = std::max(full.lo, cur.mean[k] - half);
      double hi = std::min(full.hi, cur.mean[k] + half);
      if (!(lo < hi)) {
        lo = full.lo;
        hi = full.hi;
      }
      window.push_back({lo, hi});
    }
    cur = posterior(model, Grid(ParamDomain(window), resolutions, post.grid.rule()),
                    post.prior, ds);
  }
  return cur;
}

// Label distribution of the Bayes mixture at a test feature. Conditioning on
// X' = x' reweights every node by its marginal feature density p_theta(x');
// the predictive is NOT the posterior-weighted average of conditionals alone.
struct FinitePredictive {
  std::array<double, 2> p;  // aligned with MixtureModel::kAlphabet
};

inline FinitePredictive predictive(const MixtureModel& model,
                                   const Posterior<MixtureModel>& post,
                                   double x_prime) {
  const std::size_t count = post.grid.size();
  std::vector<double> reweighted(count), num1(count), num2(count);
  for (std::size_t g = 0; g < count; ++g) {
    const auto coords = post.grid.node(g);
    const auto param = model.make_param(std::span<const double>(coords.data(), 1));
    const double lm = model.log_marginal_x(param, x_prime);
    const auto cond = model.cond_y_given_x(param, x_prime);
    reweighted[g] = post.log_weight[g] + lm;
    num1[g] = reweighted[g] + std::log(cond[0]);
    num2[g] = reweighted[g] + std::log(cond[1]);
  }
  const double denom = log_sum_exp(reweighted);
  if (!std::isfinite(denom))
    throw NumericError("predictive conditioning on zero-density feature");
  return {{std::exp(log_sum_exp(num1) - denom),
           std::exp(log_sum_exp(num2) - denom)}};
}

// Posterior-predictive label density for the continuous model: a Gaussian
// mixture over retained grid nodes. Nodes whose reweighted posterior mass
// falls below 1e-12 of the peak are dropped and the rest renormalized; the
// truncation is a deterministic function of the weights.
struct GaussianPredictive {
  std::vector<double> log_w;  // normalized over retained components
  std::vector<double> mean;
  std::vector<double> log_norm;      // -(1/2) log(2 pi var_g)
  std::vector<double> half_inv_var;  // 1 / (2 var_g)
  double mixture_mean = 0.0;

  double log_pdf(double y) const {
    RunningLse acc;
    for (std::size_t g = 0; g < log_w.size(); ++g) {
      const double d = y - mean[g];
      acc.add(log_w[g] + log_norm[g] - d * d * half_inv_var[g]);
    }
    return acc.value();
  }
};

inline GaussianPredictive predictive(const GaussianModel& model,
                                     const Posterior<GaussianModel>& post,
                                     double x_prime) {
  const std::size_t count = post.grid.size();
  std::vector<double> reweighted(count);
  double peak = neg_inf();
  for (std::size_t g = 0; g < count; ++g) {
    const auto coords = post.grid.node(g);
    const auto param = model.make_param(std::span<const double>(coords.data(), 2));
    reweighted[g] = post.log_weight[g] + model.log_marginal_x(param, x_prime);
    peak = std::max(peak, reweighted[g]);
  }
  if (!std::isfinite(peak))
    throw NumericError("predictive conditioning on zero-density feature");

  const double cutoff = peak + std::log(1e-12);
  GaussianPredictive pred;
  for (std::size_t g = 0; g < count; ++g) {
    if (reweighted[g] < cutoff) continue;
    const auto coords = post.grid.node(g);
    const auto param = model.make_param(std::span<const double>(coords.data(), 2));
    const auto law = model.cond_y_given_x(param, x_prime);
    pred.log_w.push_back(reweighted[g]);
    pred.mean.push_back(law.mean);
    pred.log_norm.push_back(-0.5 * (kLogTwoPi + std::log(law.var)));
    pred.half_inv_var.push_back(0.5 / law.var);
  }
  const double norm = log_sum_exp(pred.log_w);
  double mixture_mean = 0.0;
  for (std::size_t g = 0; g < pred.log_w.size(); ++g) {
    pred.log_w[g] -= norm;
    mixture_mean += std::exp(pred.log_w[g]) * pred.mean[g];
  }
  pred.mixture_mean = mixture_mean;
  return pred;
}

}  // namespace sslab
