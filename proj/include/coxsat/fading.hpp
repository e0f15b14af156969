#pragma once

// Small-scale power fading models. Every SNR expression consumes a model only
// through its CCDF, P(H >= x), so swapping channels is a one-line change.

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>

namespace coxsat {

class FadingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SeriesConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gamma-distributed power with shape m and scale m / omega, i.e. density
/// x^{m-1} e^{-x omega / m} / (Gamma(m) (m/omega)^m). The mean power is m^2 / omega,
/// which differs from the textbook Nakagami parameterization (mean omega); use
/// FadingModel::nakagami_mean_power for the latter.
struct NakagamiPower {
  double m = 1.0;
  double omega = 1.0;
};

/// Shadowed Rician power: multipath of average power 2b plus a line-of-sight
/// component of average power omega_tilde whose amplitude is Nakagami-m_tilde.
struct ShadowedRice {
  double b = 0.5;
  double m_tilde = 1.0;
  double omega_tilde = 0.0;
};

struct NoFading {};

inline constexpr double shadowed_rice_series_tol = 1e-12;
inline constexpr int shadowed_rice_max_terms = 10000;

/// CDF of the shadowed Rician power,
/// K sum_n (m)_n delta^n (2b)^{1+n} / (n!)^2 gamma(1+n, x/(2b)).
///
/// Terms are accumulated as K (2b) [(m)_n / n!] (2b delta)^n P(1+n, x/2b), with P
/// the regularized lower incomplete gamma; truncation happens once the remaining
/// tail, bounded geometrically, drops below 1e-12 of the running sum.
inline double shadowed_rice_cdf(double b, double m_tilde, double omega_tilde, double x) {
  if (!(b > 0.0) || !(m_tilde > 0.0) || !(omega_tilde >= 0.0)) {
    throw FadingError("shadowed Rician parameters must satisfy b > 0, m > 0, omega >= 0");
  }
  if (!(x > 0.0)) return 0.0;
  const double two_b = 2.0 * b;
  const double denom = two_b * m_tilde + omega_tilde;
  const double k = std::pow(two_b * m_tilde / denom, m_tilde) / two_b;
  const double ratio = omega_tilde / denom;  // (2b) * delta, always < 1
  const double y = x / two_b;

  // P(1+n, y) by downward recursion P(n+1, y) = P(n, y) - y^n e^{-y} / n!.
  double p = -std::expm1(-y);       // P(1, y)
  double poisson = std::exp(-y);    // y^n e^{-y} / n!, n = 0
  double coeff = 1.0;               // (m)_n / n! * ratio^n
  double sum = 0.0;
  for (int n = 0; n < shadowed_rice_max_terms; ++n) {
    sum += coeff * std::max(p, 0.0);
    const double growth = (m_tilde + n) / (n + 1.0) * ratio;
    coeff *= growth;
    poisson *= y / (n + 1.0);
    p -= poisson;
    // Remaining terms are bounded by coeff * P(n+2, y) / (1 - growth') once the
    // coefficient ratio has dropped below one.
    const double next_growth = (m_tilde + n + 1.0) / (n + 2.0) * ratio;
    if (next_growth < 1.0) {
      const double p_bound = std::min(1.0, std::max(p, 0.0) + 4.0 * std::numeric_limits<double>::epsilon());
      const double tail = coeff * p_bound / (1.0 - next_growth);
      if (tail <= shadowed_rice_series_tol * sum || coeff == 0.0) {
        return std::min(1.0, k * two_b * sum);
      }
    }
  }
  std::ostringstream os;
  os << "shadowed Rician CDF series did not converge in " << shadowed_rice_max_terms << " terms";
  throw SeriesConvergenceError(os.str());
}

class FadingModel {
 public:
  using Variant = std::variant<NakagamiPower, ShadowedRice, NoFading>;

  FadingModel() : model_(NoFading{}) {}

  static FadingModel nakagami(double m, double omega) {
    if (!(m > 0.0) || !(omega > 0.0) || !std::isfinite(m) || !std::isfinite(omega)) {
      throw FadingError("Nakagami parameters must satisfy m > 0, omega > 0");
    }
    return FadingModel(NakagamiPower{m, omega});
  }

  /// Conventional parameterization: gamma power with shape m and mean `mean_power`.
  static FadingModel nakagami_mean_power(double m, double mean_power) {
    if (!(mean_power > 0.0)) throw FadingError("mean power must be positive");
    return nakagami(m, m * m / mean_power);
  }

  static FadingModel shadowed_rice(double b, double m_tilde, double omega_tilde) {
    if (!(b > 0.0) || !(m_tilde > 0.0) || !(omega_tilde >= 0.0) || !std::isfinite(omega_tilde)) {
      throw FadingError("shadowed Rician parameters must satisfy b > 0, m > 0, omega >= 0");
    }
    return FadingModel(ShadowedRice{b, m_tilde, omega_tilde});
  }

  static FadingModel none() { return FadingModel(NoFading{}); }

  [[nodiscard]] const Variant& variant() const { return model_; }

  /// P(H >= x).
  [[nodiscard]] double ccdf(double x) const {
    if (!(x >= 0.0)) throw FadingError("fading CCDF argument must be nonnegative");
    return std::visit(
        [x](const auto& m) -> double {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, NakagamiPower>) {
            if (x == 0.0) return 1.0;
            return boost::math::gamma_q(m.m, m.omega * x / m.m);
          } else if constexpr (std::is_same_v<T, ShadowedRice>) {
            return 1.0 - shadowed_rice_cdf(m.b, m.m_tilde, m.omega_tilde, x);
          } else {
            return x <= 1.0 ? 1.0 : 0.0;
          }
        },
        model_);
  }

  [[nodiscard]] double cdf(double x) const {
    if (!(x >= 0.0)) throw FadingError("fading CDF argument must be nonnegative");
    return std::visit(
        [x](const auto& m) -> double {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, NakagamiPower>) {
            if (x == 0.0) return 0.0;
            return boost::math::gamma_p(m.m, m.omega * x / m.m);
          } else if constexpr (std::is_same_v<T, ShadowedRice>) {
            return shadowed_rice_cdf(m.b, m.m_tilde, m.omega_tilde, x);
          } else {
            return x <= 1.0 ? 0.0 : 1.0;
          }
        },
        model_);
  }

  template <class Rng>
  double sample(Rng& rng) const {
    return std::visit(
        [&rng](const auto& m) -> double {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, NakagamiPower>) {
            std::gamma_distribution<double> power(m.m, m.m / m.omega);
            return power(rng);
          } else if constexpr (std::is_same_v<T, ShadowedRice>) {
            std::normal_distribution<double> gauss(0.0, std::sqrt(m.b));
            std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
            double los_amp = 0.0;
            if (m.omega_tilde > 0.0) {
              std::gamma_distribution<double> los_power(m.m_tilde, m.omega_tilde / m.m_tilde);
              los_amp = std::sqrt(los_power(rng));
            }
            const double psi = phase(rng);
            const double re = gauss(rng) + los_amp * std::cos(psi);
            const double im = gauss(rng) + los_amp * std::sin(psi);
            return re * re + im * im;
          } else {
            return 1.0;
          }
        },
        model_);
  }

  [[nodiscard]] std::string describe() const {
    std::ostringstream os;
    std::visit(
        [&os](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, NakagamiPower>) {
            os << "nakagami(m=" << m.m << ", omega=" << m.omega << ")";
          } else if constexpr (std::is_same_v<T, ShadowedRice>) {
            os << "shadowed_rice(b=" << m.b << ", m=" << m.m_tilde << ", omega=" << m.omega_tilde << ")";
          } else {
            os << "none";
          }
        },
        model_);
    return os.str();
  }

 private:
  explicit FadingModel(Variant v) : model_(std::move(v)) {}

  Variant model_;
};

}  // namespace coxsat
