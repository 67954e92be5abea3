#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sslab/error.hpp"
#include "sslab/math.hpp"
#include "sslab/model.hpp"

namespace sslab {

enum class QuadRule { Trapezoid, GaussLegendre };

inline std::string quad_rule_name(QuadRule r) {
  return r == QuadRule::Trapezoid ? "trapezoid" : "gauss-legendre";
}

inline QuadRule parse_quad_rule(std::string_view s) {
  if (s == "trapezoid") return QuadRule::Trapezoid;
  if (s == "gauss-legendre") return QuadRule::GaussLegendre;
  throw ConfigError("unknown quadrature rule: " + std::string(s));
}

namespace detail {

inline void legendre_eval(int n, double x, double& p, double& dp) {
  double prev = 1.0;
  double cur = x;
  for (int k = 2; k <= n; ++k) {
    const double next = ((2.0 * k - 1.0) * x * cur - (k - 1.0) * prev) / k;
    prev = cur;
    cur = next;
  }
  p = cur;
  dp = n * (x * cur - prev) / (x * x - 1.0);
}

// Gauss-Legendre nodes and weights on [-1,1] by Newton iteration.
inline void gauss_legendre_reference(int n, std::vector<double>& nodes,
                                     std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(3.141592653589793 * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre_eval(n, x, p, dp);
      const double step = p / dp;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    legendre_eval(n, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = x;
    weights[i] = w;
    nodes[n - 1 - i] = -x;
    weights[n - 1 - i] = w;
  }
  // ascending order: roots from the cosine seeds come out descending
  for (int i = 0; i < n / 2; ++i) {
    std::swap(nodes[i], nodes[n - 1 - i]);
    std::swap(weights[i], weights[n - 1 - i]);
  }
  if (n % 2 == 1) nodes[n / 2] = 0.0;
}

}  // namespace detail

struct Axis {
  std::vector<double> node;
  std::vector<double> weight;
  std::vector<double> log_weight;
};

inline Axis build_axis(Interval iv, int resolution, QuadRule rule) {
  if (resolution < 3) throw ConfigError("grid resolution must be at least 3");
  if (!(iv.lo < iv.hi)) throw DomainError("grid interval requires lo < hi");
  Axis ax;
  ax.node.resize(resolution);
  ax.weight.resize(resolution);
  const double len = iv.hi - iv.lo;
  if (rule == QuadRule::Trapezoid) {
    const double h = len / (resolution - 1);
    for (int i = 0; i < resolution; ++i) {
      ax.node[i] = iv.lo + h * i;
      ax.weight[i] = (i == 0 || i == resolution - 1) ? 0.5 * h : h;
    }
    // Endpoints are nudged strictly inside so densities that vanish only on
    // the closure of the domain stay finite at every node.
    const double eps = 1e-9 * len;
    ax.node.front() = iv.lo + eps;
    ax.node.back() = iv.hi - eps;
  } else {
    std::vector<double> ref_nodes, ref_weights;
    detail::gauss_legendre_reference(resolution, ref_nodes, ref_weights);
    for (int i = 0; i < resolution; ++i) {
      ax.node[i] = iv.lo + 0.5 * (ref_nodes[i] + 1.0) * len;
      ax.weight[i] = 0.5 * len * ref_weights[i];
    }
  }
  ax.log_weight.resize(resolution);
  for (int i = 0; i < resolution; ++i) ax.log_weight[i] = std::log(ax.weight[i]);
  return ax;
}

// Tensor quadrature grid over a box region (dimension 1 or 2). The region may
// be a refinement window strictly inside a model's full parameter domain.
class Grid {
 public:
  Grid(ParamDomain region, std::span<const int> resolution, QuadRule rule)
      : region_(std::move(region)), rule_(rule) {
    if (static_cast<int>(resolution.size()) != region_.dim())
      throw ConfigError("grid resolution list must match the domain dimension");
    axes_.reserve(region_.dim());
    for (int k = 0; k < region_.dim(); ++k)
      axes_.push_back(build_axis(region_.bound(k), resolution[k], rule));
  }

  const ParamDomain& region() const { return region_; }
  QuadRule rule() const { return rule_; }
  int dim() const { return static_cast<int>(axes_.size()); }
  const Axis& axis(int k) const { return axes_.at(k); }

  std::size_t size() const {
    std::size_t s = 1;
    for (const auto& ax : axes_) s *= ax.node.size();
    return s;
  }

  std::array<double, 2> node(std::size_t i) const {
    if (axes_.size() == 1) return {axes_[0].node[i], 0.0};
    const std::size_t r0 = axes_[0].node.size();
    return {axes_[0].node[i % r0], axes_[1].node[i / r0]};
  }

  double log_weight(std::size_t i) const {
    if (axes_.size() == 1) return axes_[0].log_weight[i];
    const std::size_t r0 = axes_[0].node.size();
    return axes_[0].log_weight[i % r0] + axes_[1].log_weight[i / r0];
  }

  double weight(std::size_t i) const {
    if (axes_.size() == 1) return axes_[0].weight[i];
    const std::size_t r0 = axes_[0].node.size();
    return axes_[0].weight[i % r0] * axes_[1].weight[i / r0];
  }

  std::vector<int> resolutions() const {
    std::vector<int> r;
    for (const auto& ax : axes_) r.push_back(static_cast<int>(ax.node.size()));
    return r;
  }

 private:
  ParamDomain region_;
  QuadRule rule_;
  std::vector<Axis> axes_;
};

inline Grid build_grid(const ParamDomain& domain, std::span<const int> resolution,
                       QuadRule rule) {
  return Grid(domain, resolution, rule);
}

}  // namespace sslab
