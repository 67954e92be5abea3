#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sslab/error.hpp"
#include "sslab/math.hpp"
#include "sslab/rng.hpp"

namespace sslab {

struct Interval {
  double lo;
  double hi;
};

// Axis-aligned box housing the parameter set.
class ParamDomain {
 public:
  explicit ParamDomain(std::vector<Interval> bounds) : bounds_(std::move(bounds)) {
    if (bounds_.empty() || bounds_.size() > 2)
      throw DomainError("parameter domain must have dimension 1 or 2");
    for (const auto& b : bounds_)
      if (!(b.lo < b.hi)) throw DomainError("domain interval requires lo < hi");
  }

  int dim() const { return static_cast<int>(bounds_.size()); }
  const Interval& bound(int k) const { return bounds_.at(k); }

  bool contains_strict(std::span<const double> v) const {
    if (v.size() != bounds_.size()) return false;
    for (std::size_t k = 0; k < bounds_.size(); ++k)
      if (!(v[k] > bounds_[k].lo && v[k] < bounds_[k].hi)) return false;
    return true;
  }

  double volume() const {
    double vol = 1.0;
    for (const auto& b : bounds_) vol *= b.hi - b.lo;
    return vol;
  }

 private:
  std::vector<Interval> bounds_;
};

using Theta = std::vector<double>;

enum class ScoreKind { Joint, MarginalX };

// Two-label mixture on [0,1]:
//   p(x, y | t) = (t * 2x)^{1[y=1]} * ((1-t) * 2(1-x))^{1[y=2]},  t in (0,1).
// The marginal is p(x | t) = 1 + (2x-1)(2t-1), strictly positive for interior t.
class MixtureModel {
 public:
  struct Param {
    double t;
  };
  struct Point {
    double x;
    int y;
  };
  using Label = int;

  static constexpr int kDim = 1;
  static constexpr bool kFiniteLabels = true;
  static constexpr std::array<int, 2> kAlphabet{1, 2};
  static constexpr std::array<int, 1> kDefaultResolution{512};

  MixtureModel() : domain_({{0.02, 0.98}}) {}

  explicit MixtureModel(Interval lambda) : domain_({lambda}) {
    if (!(lambda.lo > 0.0 && lambda.hi < 1.0))
      throw DomainError("mixture parameter set must lie strictly inside (0,1)");
  }

  const ParamDomain& domain() const { return domain_; }

  Param make_param(std::span<const double> v) const {
    if (v.size() != 1) throw DomainError("mixture parameter has dimension 1");
    if (!domain_.contains_strict(v))
      throw DomainError("mixture parameter outside its domain");
    return {v[0]};
  }

  double log_joint(Param p, Point z) const {
    check_point(z);
    if (z.y == 1) return std::log(p.t) + std::log(2.0 * z.x);
    return std::log1p(-p.t) + std::log(2.0 * (1.0 - z.x));
  }

  double log_marginal_x(Param p, double x) const {
    check_x(x);
    return std::log1p((2.0 * x - 1.0) * (2.0 * p.t - 1.0));
  }

  std::array<double, 2> cond_y_given_x(Param p, double x) const {
    check_x(x);
    const double a = p.t * 2.0 * x;
    const double b = (1.0 - p.t) * 2.0 * (1.0 - x);
    const double s = a + b;
    if (!(s > 0.0)) throw NumericError("conditioning on zero-density feature");
    return {a / s, b / s};
  }

  Point sample_pair(Param p, Rng& g) const {
    const bool first = g.bernoulli(p.t);
    const double u = g.uniform();
    // Inverse CDF: density 2x has CDF x^2; density 2(1-x) mirrors it.
    const double x = first ? std::sqrt(u) : 1.0 - std::sqrt(u);
    return {x, first ? 1 : 2};
  }

  double sample_x(Param p, Rng& g) const { return sample_pair(p, g).x; }

  double score_joint(Param p, Point z) const {
    check_point(z);
    return z.y == 1 ? 1.0 / p.t : -1.0 / (1.0 - p.t);
  }

  double score_marginal(Param p, double x) const {
    check_x(x);
    const double u = 2.0 * x - 1.0;
    return 2.0 * u / (1.0 + u * (2.0 * p.t - 1.0));
  }

  // Collapsed representation of a dataset's log-likelihood:
  //   ll(t) = n1 log t + n2 log(1-t) + log_base + sum_j log(1 + u_j (2t-1)).
  struct LikStats {
    double n1 = 0.0;
    double n2 = 0.0;
    double log_base = 0.0;        // theta-independent labeled contribution
    std::vector<double> u;        // 2x-1 per unlabeled feature
  };

  LikStats lik_stats(std::span<const Point> labeled,
                     std::span<const double> unlabeled) const {
    LikStats s;
    for (const Point& z : labeled) {
      check_point(z);
      if (z.y == 1) {
        s.n1 += 1.0;
        s.log_base += std::log(2.0 * z.x);
      } else {
        s.n2 += 1.0;
        s.log_base += std::log(2.0 * (1.0 - z.x));
      }
    }
    s.u.reserve(unlabeled.size());
    for (double x : unlabeled) {
      check_x(x);
      s.u.push_back(2.0 * x - 1.0);
    }
    return s;
  }

  double log_likelihood(Param p, const LikStats& s) const {
    double acc = s.log_base;
    if (s.n1 > 0.0) acc += s.n1 * std::log(p.t);
    if (s.n2 > 0.0) acc += s.n2 * std::log1p(-p.t);
    // Product chain over the unlabeled factors with periodic exponent
    // harvesting; factors lie in (0,2), so 16 of them cannot underflow.
    const double v = 2.0 * p.t - 1.0;
    double prod = 1.0;
    long ex = 0;
    int tmp = 0;
    const std::size_t m = s.u.size();
    for (std::size_t j = 0; j < m; ++j) {
      prod *= std::fma(s.u[j], v, 1.0);
      if ((j & 15u) == 15u) {
        prod = std::frexp(prod, &tmp);
        ex += tmp;
      }
    }
    if (!(prod > 0.0)) return neg_inf();
    return acc + std::log(prod) + static_cast<double>(ex) * kLn2;
  }

 private:
  void check_x(double x) const {
    if (!(x >= 0.0 && x <= 1.0))
      throw DomainError("mixture feature outside [0,1]");
  }
  void check_point(Point z) const {
    check_x(z.x);
    if (z.y != 1 && z.y != 2) throw DomainError("mixture label must be 1 or 2");
  }

  ParamDomain domain_;
};

// Additive-noise model: Y ~ N(0, s^2), X = Y + Z', Z' ~ N(mu, 1);
// theta = (mu, s). Marginally X ~ N(mu, s^2 + 1).
class GaussianModel {
 public:
  struct Param {
    double mu;
    double sigma;
  };
  struct Point {
    double x;
    double y;
  };
  using Label = double;

  static constexpr int kDim = 2;
  static constexpr bool kFiniteLabels = false;
  static constexpr std::array<int, 2> kDefaultResolution{128, 128};

  GaussianModel() : domain_({{-5.0, 5.0}, {0.2, 5.0}}) {}

  GaussianModel(Interval mu_bound, Interval sigma_bound)
      : domain_({mu_bound, sigma_bound}) {
    if (!(sigma_bound.lo > 0.0))
      throw DomainError("sigma must be bounded away from 0");
  }

  const ParamDomain& domain() const { return domain_; }

  Param make_param(std::span<const double> v) const {
    if (v.size() != 2) throw DomainError("gaussian parameter has dimension 2");
    if (!domain_.contains_strict(v))
      throw DomainError("gaussian parameter outside its domain");
    return {v[0], v[1]};
  }

  double log_joint(Param p, Point z) const {
    check_point(z);
    const double ry = z.y / p.sigma;
    const double rx = z.x - z.y - p.mu;
    return -kLogTwoPi - std::log(p.sigma) - 0.5 * (ry * ry + rx * rx);
  }

  double log_marginal_x(Param p, double x) const {
    check_feature(x);
    const double v = p.sigma * p.sigma + 1.0;
    const double d = x - p.mu;
    return -0.5 * (kLogTwoPi + std::log(v) + d * d / v);
  }

  struct CondLaw {
    double mean;
    double var;
  };

  CondLaw cond_y_given_x(Param p, double x) const {
    check_feature(x);
    const double s2 = p.sigma * p.sigma;
    return {s2 * (x - p.mu) / (s2 + 1.0), s2 / (s2 + 1.0)};
  }

  Point sample_pair(Param p, Rng& g) const {
    const double y = p.sigma * g.normal();
    const double x = y + p.mu + g.normal();
    return {x, y};
  }

  double sample_x(Param p, Rng& g) const {
    return p.mu + std::sqrt(p.sigma * p.sigma + 1.0) * g.normal();
  }

  std::array<double, 2> score_joint(Param p, Point z) const {
    check_point(z);
    const double s = p.sigma;
    return {z.x - z.y - p.mu, -1.0 / s + z.y * z.y / (s * s * s)};
  }

  std::array<double, 2> score_marginal(Param p, double x) const {
    check_feature(x);
    const double v = p.sigma * p.sigma + 1.0;
    const double d = x - p.mu;
    return {d / v, p.sigma * (-1.0 / v + d * d / (v * v))};
  }

  // Moment collapse: the log-likelihood is a function of
  // (n, sum y^2, sum (x-y), sum (x-y)^2) and (m, sum x, sum x^2) only.
  struct LikStats {
    double n = 0.0, syy = 0.0, sd = 0.0, sdd = 0.0;
    double m = 0.0, sx = 0.0, sxx = 0.0;
  };

  LikStats lik_stats(std::span<const Point> labeled,
                     std::span<const double> unlabeled) const {
    LikStats s;
    for (const Point& z : labeled) {
      check_point(z);
      const double d = z.x - z.y;
      s.n += 1.0;
      s.syy += z.y * z.y;
      s.sd += d;
      s.sdd += d * d;
    }
    for (double x : unlabeled) {
      check_feature(x);
      s.m += 1.0;
      s.sx += x;
      s.sxx += x * x;
    }
    return s;
  }

  double log_likelihood(Param p, const LikStats& s) const {
    const double s2 = p.sigma * p.sigma;
    const double v = s2 + 1.0;
    double acc = 0.0;
    if (s.n > 0.0) {
      acc += -s.n * (kLogTwoPi + std::log(p.sigma)) - 0.5 * s.syy / s2 -
             0.5 * (s.sdd - 2.0 * p.mu * s.sd + s.n * p.mu * p.mu);
    }
    if (s.m > 0.0) {
      acc += -0.5 * s.m * (kLogTwoPi + std::log(v)) -
             0.5 * (s.sxx - 2.0 * p.mu * s.sx + s.m * p.mu * p.mu) / v;
    }
    return acc;
  }

 private:
  void check_feature(double x) const {
    if (!std::isfinite(x)) throw DomainError("gaussian feature must be finite");
  }
  void check_point(Point z) const {
    check_feature(z.x);
    if (!std::isfinite(z.y)) throw DomainError("gaussian label must be finite");
  }

  ParamDomain domain_;
};

template <class M>
struct Dataset {
  std::vector<typename M::Point> labeled;
  std::vector<double> unlabeled;

  int n() const { return static_cast<int>(labeled.size()); }
  int m() const { return static_cast<int>(unlabeled.size()); }
};

// Draws (n labeled, m unlabeled) points from p_theta using streams addressed
// by (seed, replication, purpose); any replication is reproducible in isolation.
template <class M>
Dataset<M> sample_dataset(const M& model, typename M::Param theta, int n, int m,
                          std::uint64_t seed, std::uint64_t replication) {
  Dataset<M> ds;
  ds.labeled.reserve(n);
  ds.unlabeled.reserve(m);
  Rng labeled_rng(stream_key(seed, replication, purpose_tag("labeled")));
  for (int i = 0; i < n; ++i) ds.labeled.push_back(model.sample_pair(theta, labeled_rng));
  Rng unlabeled_rng(stream_key(seed, replication, purpose_tag("unlabeled")));
  for (int j = 0; j < m; ++j) ds.unlabeled.push_back(model.sample_x(theta, unlabeled_rng));
  return ds;
}

template <class M>
double log_likelihood(const M& model, typename M::Param theta, const Dataset<M>& ds) {
  return model.log_likelihood(theta, model.lik_stats(ds.labeled, ds.unlabeled));
}

namespace detail {

template <class M, class Eval>
std::vector<double> central_difference(const M& model, std::span<const double> theta,
                                       double h, Eval&& eval) {
  std::vector<double> grad(theta.size());
  std::vector<double> bumped(theta.begin(), theta.end());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    bumped[k] = theta[k] + h;
    const double hi = eval(model.make_param(bumped));
    bumped[k] = theta[k] - h;
    const double lo = eval(model.make_param(bumped));
    bumped[k] = theta[k];
    grad[k] = (hi - lo) / (2.0 * h);
  }
  return grad;
}

}  // namespace detail

// Finite-difference check of the analytic score; h must keep theta +- h
// strictly inside the domain.
template <class M>
std::vector<double> score_fd(const M& model, std::span<const double> theta,
                             typename M::Point z, double h = 1e-5) {
  return detail::central_difference(
      model, theta, h,
      [&](typename M::Param p) { return model.log_joint(p, z); });
}

template <class M>
std::vector<double> score_fd_marginal(const M& model, std::span<const double> theta,
                                      double x, double h = 1e-5) {
  return detail::central_difference(
      model, theta, h,
      [&](typename M::Param p) { return model.log_marginal_x(p, x); });
}

}  // namespace sslab
