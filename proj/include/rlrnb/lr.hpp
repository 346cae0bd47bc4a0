#pragma once

// Likelihood-ratio estimators for discrete events.
//
// With one indicator basis function per value type, the least-squares
// density-ratio fit has the closed form evaluated by lr_regularized, so no
// coefficient vector is materialized. lr_corrected applies the (f+1)/(n+2)
// frequency correction to both samples, which keeps every estimate finite and
// strictly positive.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "rlrnb/error.hpp"

namespace rlrnb {

/// Observed frequencies of one event in the denominator and numerator samples.
struct FreqPair {
  std::uint64_t f_de = 0;
  std::uint64_t n_de = 0;
  std::uint64_t f_nu = 0;
  std::uint64_t n_nu = 0;

  void validate() const {
    if (f_de > n_de) throw Error("f_de exceeds n_de");
    if (f_nu > n_nu) throw Error("f_nu exceeds n_nu");
  }
};

/// Non-negative regularization parameter.
class Lambda {
 public:
  constexpr Lambda() = default;
  explicit Lambda(double value) : value_(value) {
    if (!(value >= 0.0) || !std::isfinite(value))
      throw Error("lambda must be finite and non-negative, got " + std::to_string(value));
  }
  constexpr double value() const noexcept { return value_; }

 private:
  double value_ = 0.0;
};

/// (f + 1) / (n + 2)
inline double corrected_probability(std::uint64_t f, std::uint64_t n) noexcept {
  return (static_cast<double>(f) + 1.0) / (static_cast<double>(n) + 2.0);
}

/// q_nu / (q_de + λ). Shared by lr_corrected and the classifiers so both paths
/// produce bit-identical values.
inline double regularized_quotient(double q_de, double q_nu, double lambda) noexcept {
  return q_nu / (q_de + lambda);
}

/// (f_nu/n_nu) / (f_de/n_de); +inf when only f_de is zero, 0 when both are.
inline double lr_mle(const FreqPair& p) {
  p.validate();
  if (p.n_de == 0 || p.n_nu == 0) throw Error("lr_mle requires n_de > 0 and n_nu > 0");
  if (p.f_nu == 0) return 0.0;
  if (p.f_de == 0) return std::numeric_limits<double>::infinity();
  // Cross-multiplied so integral ratios come out exact.
  return (static_cast<double>(p.f_nu) * static_cast<double>(p.n_de)) /
         (static_cast<double>(p.f_de) * static_cast<double>(p.n_nu));
}

/// (f_de/n_de + λ)⁻¹ · f_nu/n_nu
inline double lr_regularized(const FreqPair& p, Lambda lambda) {
  p.validate();
  if (p.n_de == 0 || p.n_nu == 0) throw Error("lr_regularized requires n_de > 0 and n_nu > 0");
  if (lambda.value() == 0.0 && p.f_de == 0)
    throw Error("lr_regularized with lambda = 0 and f_de = 0 is unbounded; use lr_corrected");
  const double p_de = static_cast<double>(p.f_de) / static_cast<double>(p.n_de);
  const double p_nu = static_cast<double>(p.f_nu) / static_cast<double>(p.n_nu);
  return regularized_quotient(p_de, p_nu, lambda.value());
}

/// ((f_de+1)/(n_de+2) + λ)⁻¹ · (f_nu+1)/(n_nu+2). Defined for all counts.
inline double lr_corrected(const FreqPair& p, Lambda lambda) {
  p.validate();
  return regularized_quotient(corrected_probability(p.f_de, p.n_de),
                              corrected_probability(p.f_nu, p.n_nu), lambda.value());
}

}  // namespace rlrnb
