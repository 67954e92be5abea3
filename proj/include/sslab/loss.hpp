#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "sslab/error.hpp"
#include "sslab/math.hpp"

namespace sslab {

enum class LossKind { SelfInformation, ZeroOne, Square };

// Loss selection with its exp-concavity parameter: self-information has
// beta = 1, square loss on [-a, a] has beta = 1/(8 a^2), and no usable beta
// is known for 0-1 loss, so beta-dependent operations reject it.
struct LossSpec {
  LossKind kind = LossKind::SelfInformation;
  double range_bound = 1.0;

  static LossSpec self_information() { return {LossKind::SelfInformation, 1.0}; }
  static LossSpec zero_one() { return {LossKind::ZeroOne, 1.0}; }
  static LossSpec square(double a) {
    if (!(a > 0.0)) throw ConfigError("square loss requires range_bound > 0");
    return {LossKind::Square, a};
  }

  bool beta_known() const { return kind != LossKind::ZeroOne; }

  double beta() const {
    switch (kind) {
      case LossKind::SelfInformation:
        return 1.0;
      case LossKind::Square:
        return 1.0 / (8.0 * range_bound * range_bound);
      case LossKind::ZeroOne:
        throw ConfigError("zero-one loss has no known exp-concavity constant");
    }
    throw ConfigError("invalid loss kind");
  }

  static LossSpec from_config(std::string_view kind, double range_bound) {
    if (kind == "log") return self_information();
    if (kind == "zero_one") return zero_one();
    if (kind == "square") return square(range_bound);
    throw ConfigError("unknown loss kind: " + std::string(kind));
  }

  std::string config_key() const {
    switch (kind) {
      case LossKind::SelfInformation:
        return "log";
      case LossKind::ZeroOne:
        return "zero_one";
      case LossKind::Square:
        return "square";
    }
    throw ConfigError("invalid loss kind");
  }
};

// Distribution over finitely many label values.
struct FiniteDist {
  std::vector<double> y;  // label values
  std::vector<double> p;  // probabilities, same length

  void validate() const {
    if (y.size() != p.size() || y.empty())
      throw DomainError("finite distribution needs matching nonempty lists");
    double total = 0.0;
    for (double q : p) {
      if (!(q >= 0.0)) throw DomainError("negative probability");
      total += q;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw DomainError("finite distribution must sum to 1");
  }
};

// Decision for a finite-label loss. Self-information predicts a distribution
// over `support`; zero-one picks a label; square predicts a real value.
struct Decision {
  LossKind kind = LossKind::SelfInformation;
  std::vector<double> support;  // label values the probabilities refer to
  std::vector<double> probs;
  double scalar = 0.0;
};

// Loss of a decision against a realized label value. A zero predicted
// probability yields +infinity; aggregation layers count such events.
inline double loss(const LossSpec& spec, const Decision& w, double y) {
  if (w.kind != spec.kind) throw DomainError("decision does not match the loss");
  switch (spec.kind) {
    case LossKind::SelfInformation: {
      for (std::size_t i = 0; i < w.support.size(); ++i)
        if (w.support[i] == y) {
          if (w.probs[i] > 0.0) return -std::log(w.probs[i]);
          return std::numeric_limits<double>::infinity();
        }
      throw DomainError("label outside the decision's support");
    }
    case LossKind::ZeroOne:
      return w.scalar == y ? 0.0 : 1.0;
    case LossKind::Square: {
      const double d = w.scalar - y;
      return d * d;
    }
  }
  throw ConfigError("invalid loss kind");
}

// Minimizer of predictive expected loss: the distribution itself for
// self-information, the highest-probability label for zero-one (ties to the
// smallest label), the mean for square loss.
inline Decision bayes_decision(const LossSpec& spec, const FiniteDist& dist) {
  dist.validate();
  Decision w;
  w.kind = spec.kind;
  switch (spec.kind) {
    case LossKind::SelfInformation:
      w.support = dist.y;
      w.probs = dist.p;
      return w;
    case LossKind::ZeroOne: {
      std::size_t best = 0;
      for (std::size_t i = 1; i < dist.p.size(); ++i) {
        const bool better = dist.p[i] > dist.p[best];
        const bool tie_smaller = dist.p[i] == dist.p[best] && dist.y[i] < dist.y[best];
        if (better || tie_smaller) best = i;
      }
      w.scalar = dist.y[best];
      return w;
    }
    case LossKind::Square: {
      double mean = 0.0;
      for (std::size_t i = 0; i < dist.y.size(); ++i) mean += dist.p[i] * dist.y[i];
      w.scalar = mean;
      return w;
    }
  }
  throw ConfigError("invalid loss kind");
}

inline double expected_loss(const LossSpec& spec, const Decision& w,
                            const FiniteDist& dist) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.y.size(); ++i)
    if (dist.p[i] > 0.0) acc += dist.p[i] * loss(spec, w, dist.y[i]);
  return acc;
}

// E_q[ exp(-beta l(w', y)) / exp(-beta l(w*, y)) ] where w* is the Bayes
// decision for q. The optimality property asserts this never exceeds 1.
inline double expconcave_ratio(const LossSpec& spec, const FiniteDist& q,
                               const Decision& w_star, const Decision& w_prime) {
  if (!spec.beta_known())
    throw ConfigError("exp-concavity ratio undefined for zero-one loss");
  q.validate();
  const double beta = spec.beta();
  double acc = 0.0;
  for (std::size_t i = 0; i < q.y.size(); ++i) {
    if (q.p[i] == 0.0) continue;
    const double diff = loss(spec, w_prime, q.y[i]) - loss(spec, w_star, q.y[i]);
    acc += q.p[i] * std::exp(-beta * diff);
  }
  return acc;
}

}  // namespace sslab
