#include "tdbem/specfun.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace tdbem {

namespace {

constexpr int kMaxAgmSteps = 64;

void check_parameter(double m, bool allow_one) {
  if (!std::isfinite(m) || m < 0.0 || m > 1.0 || (!allow_one && m == 1.0)) {
    throw DomainError("elliptic parameter outside [0,1): " + std::to_string(m));
  }
}

}  // namespace

double elliptic_k(double m) {
  check_parameter(m, false);
  double a = 1.0;
  double b = std::sqrt(1.0 - m);
  for (int it = 0; it < kMaxAgmSteps && std::abs(a - b) > 1e-16 * a; ++it) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return std::numbers::pi / (a + b);
}

JacobiTriple<double> jacobi_real(double u, double m) {
  check_parameter(m, true);
  if (!std::isfinite(u)) throw DomainError("non-finite argument to jacobi_real");
  if (m == 0.0) return {std::sin(u), std::cos(u), 1.0};
  if (m == 1.0) {
    const double sech = 1.0 / std::cosh(u);
    return {std::tanh(u), sech, sech};
  }
  // descending AGM (Landen) sequence, then back-substitution for the amplitude
  std::array<double, kMaxAgmSteps + 1> a{};
  std::array<double, kMaxAgmSteps + 1> c{};
  a[0] = 1.0;
  double b = std::sqrt(1.0 - m);
  c[0] = std::sqrt(m);
  int n = 0;
  while (std::abs(c[n]) > 1e-16 && n < kMaxAgmSteps) {
    a[n + 1] = 0.5 * (a[n] + b);
    c[n + 1] = 0.5 * (a[n] - b);
    b = std::sqrt(a[n] * b);
    ++n;
  }
  double phi = std::ldexp(a[n] * u, n);
  for (int j = n; j > 0; --j) {
    phi = 0.5 * (phi + std::asin(c[j] * std::sin(phi) / a[j]));
  }
  const double sn = std::sin(phi);
  const double cn = std::cos(phi);
  return {sn, cn, std::sqrt(1.0 - m * sn * sn)};
}

JacobiTriple<Complex> jacobi_complex(Complex z, double m) {
  check_parameter(m, false);
  const double u = z.real();
  const double v = z.imag();
  if (m == 0.0) {
    return {std::sin(z), std::cos(z), Complex(1.0, 0.0)};
  }
  const double kp = elliptic_k(1.0 - m);
  if (std::abs(v) >= kp) {
    throw DomainError("imaginary part outside the strip |Im z| < K'(m)");
  }
  const auto [s, c, d] = jacobi_real(u, m);
  const auto [s1, c1, d1] = jacobi_real(v, 1.0 - m);
  const double den = c1 * c1 + m * s * s * s1 * s1;
  return {Complex(s * d1, c * d * s1 * c1) / den,
          Complex(c * c1, -s * d * s1 * d1) / den,
          Complex(d * c1 * d1, -m * s * c * s1) / den};
}

}  // namespace tdbem
