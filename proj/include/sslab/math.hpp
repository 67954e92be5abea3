#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

#include "sslab/error.hpp"

namespace sslab {

inline constexpr double kLogTwoPi = 1.8378770664093453;
inline constexpr double kLogTwoPiE = 2.8378770664093453;
inline constexpr double kLn2 = 0.6931471805599453;

inline constexpr double neg_inf() {
  return -std::numeric_limits<double>::infinity();
}

// Cascade summation. The split points depend only on the length, so the
// result is a pure function of the value sequence, independent of how the
// values were produced or which thread aggregates them.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 32) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

// log(sum_i exp(v_i)) with max shift; -inf entries carry zero mass.
// Returns -inf when every entry is -inf (or the span is empty).
inline double log_sum_exp(std::span<const double> v) {
  double m = neg_inf();
  for (double x : v) m = std::max(m, x);
  if (!(m > neg_inf())) return neg_inf();
  std::vector<double> terms(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    terms[i] = (v[i] == neg_inf()) ? 0.0 : std::exp(v[i] - m);
  return m + std::log(pairwise_sum(terms));
}

// Streaming log-sum-exp for hot loops that cannot afford a scratch buffer.
// Sequential by construction; callers must feed entries in a fixed order.
class RunningLse {
 public:
  void add(double x) {
    if (x == neg_inf()) return;
    if (x <= max_) {
      sum_ += std::exp(x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }
  double value() const {
    if (!(sum_ > 0.0)) return neg_inf();
    return max_ + std::log(sum_);
  }

 private:
  double max_ = neg_inf();
  double sum_ = 0.0;
};

// Symmetric matrix of dimension 1 or 2 with closed-form spectral ops.
// Symmetry is structural: only the upper triangle is stored.
class SymMat {
 public:
  explicit SymMat(int dim) : d_(dim) {
    if (dim < 1 || dim > 2) throw DomainError("SymMat supports dim 1 or 2");
  }

  static SymMat diag(std::initializer_list<double> entries) {
    SymMat m(static_cast<int>(entries.size()));
    int i = 0;
    for (double v : entries) m(i, i) = v, ++i;
    return m;
  }

  int dim() const { return d_; }

  double& operator()(int i, int j) { return e_[index(i, j)]; }
  double operator()(int i, int j) const { return e_[index(i, j)]; }

  double trace() const { return d_ == 1 ? e_[0] : e_[0] + e_[2]; }

  double det() const { return d_ == 1 ? e_[0] : e_[0] * e_[2] - e_[1] * e_[1]; }

  SymMat inverse() const {
    const double dt = det();
    if (std::abs(dt) < 1e-12) throw NumericError("singular matrix in inverse");
    SymMat r(d_);
    if (d_ == 1) {
      r.e_[0] = 1.0 / dt;
    } else {
      r.e_[0] = e_[2] / dt;
      r.e_[1] = -e_[1] / dt;
      r.e_[2] = e_[0] / dt;
    }
    return r;
  }

  // Ascending; for dim 1 both entries hold the single eigenvalue.
  std::array<double, 2> eigenvalues() const {
    if (d_ == 1) return {e_[0], e_[0]};
    const double mid = 0.5 * (e_[0] + e_[2]);
    const double rad = std::hypot(0.5 * (e_[0] - e_[2]), e_[1]);
    return {mid - rad, mid + rad};
  }

  double min_eigenvalue() const { return eigenvalues()[0]; }

  friend SymMat operator+(const SymMat& a, const SymMat& b) {
    require_same_dim(a, b);
    SymMat r(a.d_);
    for (int k = 0; k < 3; ++k) r.e_[k] = a.e_[k] + b.e_[k];
    return r;
  }

  friend SymMat operator-(const SymMat& a, const SymMat& b) {
    require_same_dim(a, b);
    SymMat r(a.d_);
    for (int k = 0; k < 3; ++k) r.e_[k] = a.e_[k] - b.e_[k];
    return r;
  }

  friend SymMat operator*(double c, const SymMat& a) {
    SymMat r(a.d_);
    for (int k = 0; k < 3; ++k) r.e_[k] = c * a.e_[k];
    return r;
  }

  // Tr(A B) for symmetric A, B of equal dimension.
  friend double trace_product(const SymMat& a, const SymMat& b) {
    require_same_dim(a, b);
    if (a.d_ == 1) return a.e_[0] * b.e_[0];
    return a.e_[0] * b.e_[0] + 2.0 * a.e_[1] * b.e_[1] + a.e_[2] * b.e_[2];
  }

 private:
  static void require_same_dim(const SymMat& a, const SymMat& b) {
    if (a.d_ != b.d_) throw DomainError("SymMat dimension mismatch");
  }

  int index(int i, int j) const {
    if (i < 0 || j < 0 || i >= d_ || j >= d_)
      throw DomainError("SymMat index out of range");
    if (i > j) std::swap(i, j);
    return i + j;  // (0,0)->0, (0,1)->1, (1,1)->2
  }

  int d_;
  std::array<double, 3> e_{0.0, 0.0, 0.0};
};

}  // namespace sslab
