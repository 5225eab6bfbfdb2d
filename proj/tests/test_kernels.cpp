#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>

#include "tailcq/kernels.hpp"

using namespace tailcq;

namespace {

// exp(z) K0(z) = int_0^inf exp(-z (cosh t - 1)) dt, Re z > 0, by panel Gauss-Legendre.
cplx integral_oracle(cplx z) {
  using G = boost::math::quadrature::gauss<double, 30>;
  const double tmax = std::acosh(1.0 + 40.0 / z.real());
  const int panels = std::min(200000, 20 + static_cast<int>(std::abs(z) * std::sinh(tmax) * tmax / 3.0));
  cplx acc(0.0, 0.0);
  for (int p = 0; p < panels; ++p) {
    const double a = tmax * p / panels, b = tmax * (p + 1) / panels;
    acc += G::integrate([&](double t) { return std::exp(-z * (std::cosh(t) - 1.0)); }, a, b);
  }
  return acc;
}

// Power series in extended precision; valid in the whole cut plane.
std::complex<long double> series_ld(std::complex<long double> z) {
  using C = std::complex<long double>;
  const long double eg = 0.577215664901532860606512090082402431L;
  const C q = 0.25L * z * z;
  C term = 1.0L, i0 = 1.0L, tail = 0.0L;
  long double harm = 0.0L;
  for (int k = 1; k < 400; ++k) {
    term *= q / (static_cast<long double>(k) * k);
    harm += 1.0L / k;
    i0 += term;
    tail += term * harm;
  }
  return -(std::log(0.5L * z) + eg) * i0 + tail;
}

}  // namespace

TEST_CASE("K0 reference values") {
  CHECK(std::abs(bessel_k0(1.0) - 0.42102443824070834) <= 1e-15);
  CHECK(bessel_k0(1e-3).real() == doctest::Approx(7.0237).epsilon(1e-4));
  for (double x : {1e-3, 0.1, 1.0, 1.9, 2.1, 5.0, 17.0, 19.0, 50.0, 300.0, 700.0}) {
    const double ref = boost::math::cyl_bessel_k(0, x);
    CHECK(std::abs(bessel_k0(x).real() - ref) <= 1e-14 * ref);
    CHECK(bessel_k0(x).imag() == 0.0);
  }
  CHECK(std::abs(bessel_k0(cplx(2, 3)) - std::conj(bessel_k0(cplx(2, -3)))) <= 1e-13);
  CHECK_THROWS_AS(bessel_k0(0.0), DomainError);
  CHECK_THROWS_AS(bessel_k0(-1.0), DomainError);
}

TEST_CASE("K0 against the integral representation") {
  double worst = 0.0;
  for (int i = 0; i < 40; ++i) {
    const double rad = std::pow(10.0, -3.0 + 6.0 * i / 39);
    for (double a : {0.0, kPi / 4, -kPi / 4, 0.49 * kPi, -0.49 * kPi}) {
      const cplx z = std::polar(rad, a);
      const cplx o = integral_oracle(z);
      worst = std::max(worst, std::abs(bessel_k0_scaled(z) - o) / std::abs(o));
    }
  }
  CHECK(worst <= 1e-10);
  MESSAGE("worst relative deviation: " << worst);
  // the scaled form stays finite where K0 underflows
  CHECK(std::isfinite(std::abs(bessel_k0_scaled(cplx(1e4, 10.0)))));
  CHECK_THROWS_AS(bessel_k0_scaled(cplx(-1.0, 1.0)), DomainError);
}

TEST_CASE("K0 continuation into the left half plane") {
  for (double r : {0.5, 1.5, 2.5, 4.0, 6.0})
    for (double a : {0.55 * kPi, 0.75 * kPi, 0.95 * kPi, -0.6 * kPi, -0.9 * kPi}) {
      const cplx z = std::polar(r, a);
      const std::complex<long double> ref = series_ld({(long double)z.real(), (long double)z.imag()});
      const cplx refd(static_cast<double>(ref.real()), static_cast<double>(ref.imag()));
      CHECK(std::abs(bessel_k0(z) - refd) <= 1e-13 * std::max(1.0, std::abs(refd)));
    }
}

TEST_CASE("I0") {
  for (double x : {0.0, 0.5, 3.0, 20.0}) {
    const double ref = boost::math::cyl_bessel_i(0, x);
    CHECK(std::abs(bessel_i0(x).real() - ref) <= 1e-14 * ref);
  }
  // I0(i y) = J0(y)
  CHECK(std::abs(bessel_i0(cplx(0.0, 7.0)) - boost::math::cyl_bessel_j(0, 7.0)) <= 1e-14);
}

TEST_CASE("damped square root") {
  CHECK(damped_sqrt(cplx(3, 4), 0.0) == cplx(3, 4));
  CHECK(std::abs(damped_sqrt(1.0, 1.0) - std::sqrt(2.0)) <= 1e-15);
  const cplx s = damped_sqrt(cplx(0, 1), 1.0);
  CHECK(std::abs(s - std::conj(damped_sqrt(cplx(0, -1), 1.0))) <= 1e-15);
  CHECK(s.real() >= 0.0);
  for (cplx l : {cplx(2, 1), cplx(-3, 0.5), cplx(-5, 0.0), cplx(0.1, -4)}) {
    const cplx v = damped_sqrt(l, 2.0);
    CHECK(std::abs(v * v - (l * l + 2.0 * l)) <= 1e-13 * std::abs(l * l));
  }
  CHECK(std::abs(damped_sqrt(1e8, 2.0) - (1e8 + 1.0)) <= 1e-7);
  CHECK_THROWS_AS(damped_sqrt(-0.5, 1.0), DomainError);
  CHECK_THROWS_AS(damped_sqrt(0.0, 1.0), DomainError);
}

TEST_CASE("transfer functions") {
  // K0(1)/(2 pi) = 0.0670081...
  CHECK(std::abs(transfer_2d(1.0, 1.0, 0.0).real() - boost::math::cyl_bessel_k(0, 1.0) / (2.0 * kPi)) <= 1e-16);
  CHECK(transfer_3d(1.0, 1.0, 0.0).real() == doctest::Approx(0.029276).epsilon(1e-5));
  for (cplx l : {cplx(1, 0), cplx(2, 7), cplx(-3, 40)}) {
    const cplx v = std::exp(l * 0.3) * transfer_3d(l, 0.3, 0.0);
    CHECK(std::abs(v - 1.0 / (4.0 * kPi * 0.3)) <= 1e-13);
    CHECK(std::abs(transfer_2d(std::conj(l), 0.4, 0.5) - std::conj(transfer_2d(l, 0.4, 0.5))) <= 1e-14);
  }
  const long double ref = std::exp(-std::sqrt(3.0L) * 0.5L) / (4.0L * 3.141592653589793238462643383279L * 0.5L);
  CHECK(std::abs(transfer_3d(1.0, 0.5, 2.0).real() - static_cast<double>(ref)) <= 1e-12 * static_cast<double>(ref));
}

TEST_CASE("kernel descriptors and the sectorial check") {
  auto k = scalar_k0_kernel(0.1);
  CHECK(k.mu == -0.5);
  CHECK(std::abs(k.eval(10.0, 0.1) - 0.42102443824070834) <= 1e-13);
  for (double d : {0.1, 0.01}) {
    SectorCheck sc = check_sectorial(k, d);
    CHECK(sc.ok);
    CHECK(sc.c_hat > 0.0);
  }
  // shifted ratio on the steep ray within a factor 3 of its value at lambda = 1
  const double d = 0.1, ang = 0.95 * kPi - k.delta_sector;
  auto ratio = [&](cplx l) { return std::abs(std::exp(l * d) * k.eval(l, d)) * std::sqrt(std::abs(l)); };
  const double r1 = ratio(1.0);
  for (int i = 0; i <= 60; ++i) {
    const double rad = std::pow(10.0, -2.0 + 5.0 * i / 60);
    CHECK(ratio(std::polar(rad, ang)) <= 3.0 * r1);
  }
  auto w3 = wave3d_kernel(0.0);
  CHECK(w3.mu == 0.0);
  CHECK(check_sectorial(w3, 0.5).ok);
  CHECK(check_sectorial(wave2d_kernel(0.0), 0.3).ok);
}
