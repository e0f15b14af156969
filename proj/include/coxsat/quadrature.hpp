#pragma once

// One-dimensional numerical integration used by every analytical metric.
//
// Two engines are provided: a globally adaptive 21-point Gauss-Kronrod rule for
// smooth integrands, and a tanh-sinh (double exponential) rule for integrands
// with integrable endpoint singularities such as 1/sqrt(b - x).
//
// An integrand is either `double(double x)` or
// `double(double x, EndpointDistance d)`. The second form receives x - a and
// b - x computed without cancellation, which is what lets the double
// exponential rule resolve singularities down to distances near 1e-300.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace coxsat::quadrature {

enum class EndpointScheme { none, double_exponential };

struct Settings {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  int max_subdivisions = 2000;
  EndpointScheme singular_endpoint_scheme = EndpointScheme::none;

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
      throw std::invalid_argument("quadrature tolerances must be positive");
    }
    if (max_subdivisions < 1) {
      throw std::invalid_argument("max_subdivisions must be at least 1");
    }
  }

  [[nodiscard]] Settings with_scheme(EndpointScheme scheme) const {
    Settings s = *this;
    s.singular_endpoint_scheme = scheme;
    return s;
  }
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

struct EndpointDistance {
  double from_lower = 0.0;  // x - a
  double to_upper = 0.0;    // b - x
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <class F>
concept DistanceAware = std::invocable<F&, double, EndpointDistance>;

template <class F>
double call(F& f, double x, double from_lower, double to_upper) {
  double y;
  if constexpr (DistanceAware<F>) {
    y = static_cast<double>(f(x, EndpointDistance{from_lower, to_upper}));
  } else {
    y = static_cast<double>(f(x));
  }
  if (!std::isfinite(y)) {
    std::ostringstream os;
    os.precision(17);
    os << "non-finite integrand value " << y << " at x = " << x;
    throw QuadratureError(os.str());
  }
  return y;
}

inline double tolerance(const Settings& s, double value) {
  return std::max(s.rel_tol * std::abs(value), s.abs_tol);
}

// Kronrod abscissae; odd indices are the embedded 10-point Gauss nodes.
inline constexpr std::array<double, 11> gk21_x = {
    0.00000000000000000e+00, 1.48874338981631211e-01, 2.94392862701460198e-01,
    4.33395394129247191e-01, 5.62757134668604683e-01, 6.79409568299024406e-01,
    7.80817726586416897e-01, 8.65063366688984511e-01, 9.30157491355708226e-01,
    9.73906528517171720e-01, 9.95657163025808081e-01};
inline constexpr std::array<double, 11> gk21_wk = {
    1.49445554002916906e-01, 1.47739104901338491e-01, 1.42775938577060081e-01,
    1.34709217311473326e-01, 1.23491976262065851e-01, 1.09387158802297642e-01,
    9.31254545836976055e-02, 7.50396748109199528e-02, 5.47558965743519960e-02,
    3.25581623079647275e-02, 1.16946388673718743e-02};
inline constexpr std::array<double, 5> g10_w = {
    2.95524224714752870e-01, 2.69266719309996355e-01, 2.19086362515982044e-01,
    1.49451349150580593e-01, 6.66713443086881376e-02};

struct Segment {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;
  friend bool operator<(const Segment& l, const Segment& r) {
    return l.error < r.error;
  }
};

template <class F>
Segment gauss_kronrod_21(F& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double center = 0.5 * (a + b);
  double kronrod = gk21_wk[0] * call(f, center, half, half);
  double gauss = 0.0;
  for (std::size_t i = 1; i < gk21_x.size(); ++i) {
    const double dx = half * gk21_x[i];
    const double near = half - dx;  // distance of the outer node to its endpoint
    const double far = half + dx;
    const double pair = call(f, center - dx, near, far) + call(f, center + dx, far, near);
    kronrod += gk21_wk[i] * pair;
    if (i % 2 == 1) gauss += g10_w[i / 2] * pair;
  }
  kronrod *= half;
  gauss *= half;
  return Segment{a, b, kronrod, std::abs(kronrod - gauss)};
}

template <class F>
Result adaptive_gauss_kronrod(F& f, double a, double b, const Settings& s) {
  std::priority_queue<Segment> heap;
  Segment first = gauss_kronrod_21(f, a, b);
  double total = first.value;
  double error = first.error;
  std::size_t evaluations = 21;
  heap.push(first);
  int subdivisions = 0;
  while (error > tolerance(s, total)) {
    if (subdivisions >= s.max_subdivisions) {
      std::ostringstream os;
      os << "adaptive quadrature on [" << a << ", " << b << "] did not converge after "
         << subdivisions << " subdivisions (estimate " << total << ", error " << error << ")";
      throw QuadratureError(os.str());
    }
    Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw QuadratureError("adaptive quadrature reached the floating-point resolution limit");
    }
    heap.pop();
    Segment left = gauss_kronrod_21(f, worst.a, mid);
    Segment right = gauss_kronrod_21(f, mid, worst.b);
    evaluations += 42;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
  }
  // Re-sum to shed the drift of the running updates.
  total = 0.0;
  error = 0.0;
  std::vector<Segment> segments;
  segments.reserve(heap.size());
  while (!heap.empty()) {
    segments.push_back(heap.top());
    heap.pop();
  }
  std::sort(segments.begin(), segments.end(),
            [](const Segment& l, const Segment& r) { return l.a < r.a; });
  for (const auto& seg : segments) {
    total += seg.value;
    error += seg.error;
  }
  return Result{total, error, evaluations};
}

// Tanh-sinh node tables on [-1, 1], stored per refinement level. `gap` is the
// distance from the node to the nearer endpoint, 1 - |x|, evaluated directly.
struct TanhSinhNode {
  double gap;
  double weight;
};

inline constexpr int tanh_sinh_max_level = 12;
inline constexpr double tanh_sinh_t_max = 6.0;

inline const std::vector<std::vector<TanhSinhNode>>& tanh_sinh_table() {
  static const std::vector<std::vector<TanhSinhNode>> table = [] {
    std::vector<std::vector<TanhSinhNode>> levels(tanh_sinh_max_level + 1);
    const double half_pi = std::numbers::pi / 2.0;
    for (int level = 0; level <= tanh_sinh_max_level; ++level) {
      const double step = std::ldexp(1.0, -level);
      // Level 0 holds t = 1, 2, ...; deeper levels hold only the new odd multiples.
      const int stride = level == 0 ? 1 : 2;
      for (int k = 1;; k += stride) {
        const double t = k * step;
        if (t > tanh_sinh_t_max) break;
        const double u = half_pi * std::sinh(t);
        const double gap = 2.0 / (1.0 + std::exp(2.0 * u));
        const double c = std::cosh(u);
        const double weight = half_pi * std::cosh(t) / (c * c);
        levels[level].push_back({gap, weight});
      }
    }
    return levels;
  }();
  return table;
}

template <class F>
Result tanh_sinh(F& f, double a, double b, const Settings& s) {
  const auto& table = tanh_sinh_table();
  const double half = 0.5 * (b - a);
  const double center = 0.5 * (a + b);
  std::size_t evaluations = 1;
  double sum = std::numbers::pi / 2.0 * call(f, center, half, half);

  auto accumulate_level = [&](int level) {
    double level_sum = 0.0;
    for (const auto& node : table[level]) {
      const double distance = half * node.gap;
      if (distance == 0.0) continue;
      const double x_left = a + distance;
      const double x_right = b - distance;
      double pair = 0.0;
      if constexpr (DistanceAware<F>) {
        pair = call(f, x_left, distance, 2.0 * half - distance) +
               call(f, x_right, 2.0 * half - distance, distance);
      } else {
        // Nodes that round onto an endpoint carry no usable information.
        if (x_left > a) pair += call(f, x_left, distance, 2.0 * half - distance);
        if (x_right < b) pair += call(f, x_right, 2.0 * half - distance, distance);
      }
      evaluations += 2;
      level_sum += node.weight * pair;
    }
    return level_sum;
  };

  sum += accumulate_level(0);
  double previous = half * sum;
  double estimate = previous;
  double error = std::numeric_limits<double>::infinity();
  for (int level = 1; level <= tanh_sinh_max_level; ++level) {
    sum += accumulate_level(level);
    estimate = half * sum * std::ldexp(1.0, -level);
    error = std::abs(estimate - previous);
    previous = estimate;
    if (level >= 3 && error <= tolerance(s, estimate)) {
      return Result{estimate, error, evaluations};
    }
  }
  std::ostringstream os;
  os << "tanh-sinh quadrature on [" << a << ", " << b << "] did not converge (estimate "
     << estimate << ", error " << error << ")";
  throw QuadratureError(os.str());
}

}  // namespace detail

/// Integrates f over [a, b]. The returned error estimate satisfies
/// error <= max(rel_tol * |value|, abs_tol); otherwise QuadratureError is thrown.
template <class F>
Result integrate(F&& f, double a, double b, const Settings& settings = {}) {
  settings.validate();
  if (!(a <= b)) {
    throw std::invalid_argument("integrate requires a <= b");
  }
  if (a == b) return Result{};
  if (settings.singular_endpoint_scheme == EndpointScheme::double_exponential) {
    return detail::tanh_sinh(f, a, b, settings);
  }
  return detail::adaptive_gauss_kronrod(f, a, b, settings);
}

/// Integrates a nonnegative integrand with a nonincreasing tail over [0, inf).
///
/// The half line is mapped onto [0, 1) by u = s / (1 - s). The upper end of the
/// mapped interval is placed where f first drops below abs_tol while doubling u,
/// so the neglected tail is of order abs_tol for tails decaying at least like
/// e^{-u}.
template <class F>
Result integrate_semi_infinite(F&& f, const Settings& settings = {}) {
  settings.validate();
  double cutoff = 1.0;
  std::size_t probes = 1;
  double tail = f(cutoff);
  while (tail > settings.abs_tol) {
    cutoff *= 2.0;
    ++probes;
    if (cutoff > 1e18) {
      throw QuadratureError("semi-infinite integrand does not decay");
    }
    tail = f(cutoff);
  }
  const double upper = cutoff / (1.0 + cutoff);
  auto mapped = [&f](double s) {
    const double one_minus_s = 1.0 - s;
    return static_cast<double>(f(s / one_minus_s)) / (one_minus_s * one_minus_s);
  };
  Result r = integrate(mapped, 0.0, upper, settings);
  r.error += std::max(tail, 0.0);
  r.evaluations += probes;
  return r;
}

}  // namespace coxsat::quadrature
