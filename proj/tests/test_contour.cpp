#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tdbem/contour.hpp"
#include "tdbem/history.hpp"

using namespace tdbem;

TEST_CASE("Radau IIA tableau invariants") {
  const auto tab = radau_iia_2();
  tab.validate();
  const Eigen::RowVectorXd w = tab.bt_ainv();
  CHECK(std::abs(w(0)) < 1e-14);
  CHECK(std::abs(w(1) - 1.0) < 1e-14);
  Eigen::VectorXcd ev = tab.spectrum();
  if (ev(0).imag() < 0) std::swap(ev(0), ev(1));
  CHECK(std::abs(ev(0) - Complex(1.0 / 3.0, std::sqrt(2.0) / 6.0)) < 1e-14);
  CHECK(std::abs(ev(1) - Complex(1.0 / 3.0, -std::sqrt(2.0) / 6.0)) < 1e-14);
  implicit_euler().validate();
}

TEST_CASE("Radau IIA stability function is the (1,2) Pade approximant") {
  const auto tab = radau_iia_2();
  for (Complex z : {Complex(-1.0, 0.0), Complex(-0.5, 2.0), Complex(0.3, -0.7), Complex(-10.0, 5.0)}) {
    const Complex pade = (1.0 + z / 3.0) / (1.0 - 2.0 * z / 3.0 + z * z / 6.0);
    CHECK(std::abs(tab.stability_function(z) - pade) < 1e-13);
  }
}

TEST_CASE("non stiffly accurate tableau is rejected") {
  ButcherTableau t = implicit_euler();
  t.A(0, 0) = 0.5;
  t.c(0) = 0.5;
  CHECK_THROWS_AS(t.validate(), DomainError);
}

TEST_CASE("stage spectrum diagonalizes (dt A)^{-1}") {
  const auto tab = radau_iia_2();
  const double dt = 0.15;
  const auto sp = stage_spectrum(tab, dt);
  const Eigen::MatrixXcd B = (dt * tab.A).inverse().cast<Complex>();
  const Eigen::MatrixXcd R = sp.T * sp.mu.asDiagonal() * sp.T_inv;
  CHECK((R - B).norm() < 1e-12 * B.norm());
  for (Index k = 0; k < 2; ++k) {
    CHECK(std::abs(std::abs(sp.mu(k).real()) - 2.0 / dt) < 1e-11);
    CHECK(std::abs(std::abs(sp.mu(k).imag()) - std::sqrt(2.0) / dt) < 1e-11);
    CHECK(sp.partner[static_cast<size_t>(k)] == 1 - k);
  }
  CHECK_THROWS_AS(stage_spectrum(tab, 0.0), DomainError);
  SpectrumCache cache(tab);
  const StageSpectrum* a = &cache.get(0.1);
  CHECK(a == &cache.get(0.1 + 1e-15));
}

TEST_CASE("quadrature node counts") {
  CHECK(quadrature_count(10, 2) == 54);
  CHECK(quadrature_count(20, 2) == 180);
  CHECK(quadrature_count(40, 2) == 546);
  CHECK(quadrature_count(20, 1) == 60);
  CHECK(quadrature_count(1, 2) == 4);
  CHECK(quadrature_count(2, 2) == 4);
  CHECK_THROWS_AS(quadrature_count(0, 2), DomainError);
}

TEST_CASE("contour parameters") {
  CHECK(step_ratio_q(0.1, 0.1, radau_iia_2()) == doctest::Approx(5.0));
  CHECK(step_ratio_q(0.1, 0.1, implicit_euler()) == doctest::Approx(1.05));
  CHECK(step_ratio_q(0.1, 0.2, implicit_euler()) == doctest::Approx(2.0));
  CHECK(contour_modulus(5.0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(contour_modulus(1.0), DomainError);
  CHECK_THROWS_AS(build_contour(0.1, 0.1, radau_iia_2(), 7), DomainError);
}

TEST_CASE("contour nodes come in conjugate pairs ordered from the origin outwards") {
  const auto c = build_contour(0.1, 0.1, radau_iia_2(), 54);
  CHECK(c.representatives() == 27);
  const auto all = c.all_nodes();
  for (Index l = 0; l < 54; ++l) {
    CHECK(std::abs(all[static_cast<size_t>(l)] - std::conj(all[static_cast<size_t>(53 - l)])) <
          1e-10 * std::abs(all[static_cast<size_t>(l)]));
  }
  for (size_t l = 0; l < c.nodes.size(); ++l) {
    CHECK(c.nodes[l].imag() > 0.0);
    if (l > 0) CHECK(c.nodes[l].real() > c.nodes[l - 1].real());
  }
}

// the weights carry the orientation of the resolvent (I - dt s A)^{-1}
TEST_CASE("contour encloses the stage spectra of all step sizes and excludes the left half-plane") {
  const auto tab = radau_iia_2();
  const double dt_min = 0.05;
  const double dt_max = 0.2;
  const auto c = build_contour(dt_min, dt_max, tab, 400);
  const auto s = c.all_nodes();
  const auto w = c.all_weights();
  auto winding = [&](Complex z) {
    Complex acc = 0.0;
    for (size_t l = 0; l < s.size(); ++l) acc += w[l] / (z - s[l]);
    return acc;
  };
  for (double dt : {dt_min, 0.1, dt_max}) {
    const auto sp = stage_spectrum(tab, dt);
    for (Index k = 0; k < 2; ++k) CHECK(std::abs(winding(sp.mu(k)) - 1.0) < 1e-6);
  }
  CHECK(std::abs(winding({-1.0, 0.0})) < 1e-6);
  CHECK(std::abs(winding({-5.0, 30.0})) < 1e-6);
}

namespace {

double gcq_error(const std::function<Complex(Complex)>& kernel, const std::function<double(double)>& exact,
                 const std::vector<double>& steps, const ButcherTableau& tab) {
  const auto f = scalar_gcq(kernel, steps, tab, [](double t) { return t * t; });
  const double end = step_times(steps).back();
  return std::abs(f(f.rows() - 1, f.cols() - 1) - exact(end));
}

}  // namespace

TEST_CASE("scalar gCQ converges for an analytic transfer function") {
  // exact convolution of e^{-t} with t^2
  auto exact = [](double t) { return t * t - 2 * t + 2 - 2 * std::exp(-t); };
  auto kernel = [](Complex s) { return 1.0 / (s + 1.0); };
  const auto tab = radau_iia_2();
  const double e16 = gcq_error(kernel, exact, uniform_steps(1.0, 16), tab);
  const double e32 = gcq_error(kernel, exact, uniform_steps(1.0, 32), tab);
  const double e64 = gcq_error(kernel, exact, uniform_steps(1.0, 64), tab);
  CHECK(e32 < 1e-5);
  CHECK(e64 < e32);
  CHECK(std::log2(e16 / e64) / 2.0 > 2.7);
}

TEST_CASE("scalar gCQ reproduces a pure delay") {
  auto exact = [](double t) { return t > 0.3 ? (t - 0.3) * (t - 0.3) : 0.0; };
  auto kernel = [](Complex s) { return std::exp(-0.3 * s); };
  CHECK(gcq_error(kernel, exact, uniform_steps(1.0, 32), radau_iia_2()) < 1e-8);
  CHECK(gcq_error(kernel, exact, uniform_steps(1.0, 64), implicit_euler()) < 1e-1);
}

TEST_CASE("scalar gCQ on a variable step schedule") {
  auto exact = [](double t) { return t * t - 2 * t + 2 - 2 * std::exp(-t); };
  auto kernel = [](Complex s) { return 1.0 / (s + 1.0); };
  auto graded = [](Index n) {
    std::vector<double> h(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i) {
      const double a = static_cast<double>(i) / static_cast<double>(n);
      const double b = static_cast<double>(i + 1) / static_cast<double>(n);
      h[static_cast<size_t>(i)] = b * b - a * a;
    }
    return h;
  };
  const auto tab = radau_iia_2();
  const double e1 = gcq_error(kernel, exact, graded(16), tab);
  const double e2 = gcq_error(kernel, exact, graded(32), tab);
  CHECK(e2 < 1e-4);
  CHECK(e2 < e1);
}

TEST_CASE("first step uses only the matrix-argument term") {
  // K(dt A)^{-1} applied to a constant equals the RK solution of y' = -y + 1
  const auto tab = radau_iia_2();
  const auto f = scalar_gcq([](Complex s) { return 1.0 / (s + 1.0); }, uniform_steps(0.1, 1), tab,
                            [](double) { return 1.0; });
  const double exact_rk = 1.0 - tab.stability_function(-0.1).real();
  CHECK(std::abs(f(0, 1) - exact_rk) < 1e-14);
}

TEST_CASE("node recursion stays bounded for long schedules") {
  auto exact = [](double t) { return t > 0.3 ? (t - 0.3) * (t - 0.3) : 0.0; };
  auto kernel = [](Complex s) { return std::exp(-0.3 * s); };
  CHECK(gcq_error(kernel, exact, uniform_steps(1.0, 80), radau_iia_2()) < 1e-10);
}
