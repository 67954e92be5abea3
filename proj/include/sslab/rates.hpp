#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>

#include "sslab/error.hpp"
#include "sslab/fisher.hpp"
#include "sslab/math.hpp"

namespace sslab {

// Relation between unlabeled and labeled sample counts:
// none, m = alpha * n, or m = n^(1+gamma).
struct RegimeSpec {
  enum class Kind { SL, SslLinear, SslSuper };
  Kind kind = Kind::SL;
  double alpha = 0.0;
  double gamma = 0.0;

  static RegimeSpec sl() { return {}; }

  static RegimeSpec ssl_linear(double alpha) {
    if (!(alpha > 0.0)) throw ConfigError("ssl-linear requires alpha > 0");
    return {Kind::SslLinear, alpha, 0.0};
  }

  static RegimeSpec ssl_super(double gamma) {
    if (!(gamma > 0.0)) throw ConfigError("ssl-super requires gamma > 0");
    return {Kind::SslSuper, 0.0, gamma};
  }

  // Unlabeled count for a labeled count, rounded half up.
  int m_for(int n) const {
    switch (kind) {
      case Kind::SL:
        return 0;
      case Kind::SslLinear:
        return static_cast<int>(std::floor(alpha * n + 0.5));
      case Kind::SslSuper:
        return static_cast<int>(std::floor(std::pow(n, 1.0 + gamma) + 0.5));
    }
    throw ConfigError("invalid regime");
  }

  // Exponent of the leading risk decay in n.
  double rate_exponent() const {
    return kind == Kind::SslSuper ? 1.0 + gamma : 1.0;
  }

  std::string id() const {
    char buf[48];
    switch (kind) {
      case Kind::SL:
        return "sl";
      case Kind::SslLinear:
        std::snprintf(buf, sizeof buf, "ssl-linear:%.17g", alpha);
        return buf;
      case Kind::SslSuper:
        std::snprintf(buf, sizeof buf, "ssl-super:%.17g", gamma);
        return buf;
    }
    throw ConfigError("invalid regime");
  }

  static RegimeSpec parse(std::string_view s) {
    if (s == "sl") return sl();
    const auto parse_param = [&](std::string_view prefix) {
      const std::string text(s.substr(prefix.size()));
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(text, &used);
      } catch (const std::exception&) {
        throw ConfigError("bad regime parameter in: " + std::string(s));
      }
      if (used != text.size())
        throw ConfigError("bad regime parameter in: " + std::string(s));
      return value;
    };
    if (s.rfind("ssl-linear:", 0) == 0)
      return ssl_linear(parse_param("ssl-linear:"));
    if (s.rfind("ssl-super:", 0) == 0)
      return ssl_super(parse_param("ssl-super:"));
    throw ConfigError("unknown regime id: " + std::string(s));
  }
};

// Leading constant of the excess-risk bound when m = alpha n. The 1/beta
// factor scales the whole bracket; this is forced by the alpha -> 0 limit,
// which must collapse to k2.
inline double k1(const FisherPair& pair, double alpha, double beta) {
  if (!(alpha >= 0.0)) throw ConfigError("k1 requires alpha >= 0");
  if (!(beta > 0.0)) throw ConfigError("rate constants require beta > 0");
  const SymMat combined = pair.i_xy + alpha * pair.i_x;
  const SymMat inv = combined.inverse();
  return (trace_product(inv, pair.i_xy) - trace_product(inv, pair.i_x)) / beta;
}

inline double k2(const FisherPair& pair, double beta) {
  if (!(beta > 0.0)) throw ConfigError("rate constants require beta > 0");
  const double d = pair.i_xy.dim();
  return (d - trace_product(pair.i_xy.inverse(), pair.i_x)) / beta;
}

inline double k3(const FisherPair& pair, double beta) {
  if (!(beta > 0.0)) throw ConfigError("rate constants require beta > 0");
  const double d = pair.i_xy.dim();
  return (trace_product(pair.i_x.inverse(), pair.i_xy) - d) / beta;
}

struct RateConstants {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double beta = 1.0;
};

inline RateConstants rate_constants(const FisherPair& pair, double alpha,
                                    double beta) {
  return {k1(pair, alpha, beta), k2(pair, beta), k3(pair, beta), beta};
}

// Leading-order risk term per regime: k2/(2n), k1/(2n), or k3/(2 n^(1+gamma)).
inline double leading_risk(const RegimeSpec& regime, int n,
                           const RateConstants& constants) {
  if (n < 1) throw ConfigError("leading_risk requires n >= 1");
  switch (regime.kind) {
    case RegimeSpec::Kind::SL:
      return constants.k2 / (2.0 * n);
    case RegimeSpec::Kind::SslLinear:
      return constants.k1 / (2.0 * n);
    case RegimeSpec::Kind::SslSuper:
      return constants.k3 / (2.0 * std::pow(n, 1.0 + regime.gamma));
  }
  throw ConfigError("invalid regime");
}

}  // namespace sslab
