#include "tailcq/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace tailcq {

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

// |z| <= 2: K0 = -(log(z/2) + gamma) I0 + sum (z^2/4)^k / (k!)^2 H_k
cplx k0_series(cplx z) {
  const cplx q = 0.25 * z * z;
  cplx term(1.0, 0.0), i0(1.0, 0.0), tail(0.0, 0.0);
  double harm = 0.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (double(k) * double(k));
    harm += 1.0 / k;
    i0 += term;
    tail += term * harm;
    if (std::abs(term) * (harm + 1.0) < 1e-18 * std::abs(i0)) break;
  }
  return -(std::log(0.5 * z) + kEulerGamma) * i0 + tail;
}

// Temme's second continued fraction with Steed's evaluation, nu = 0.
// Returns exp(z) K0(z); converges for Re z > 0 and is used for |z| > 2.
cplx k0_cf2_scaled(cplx z) {
  const double a1 = 0.25;
  cplx b = 2.0 * (1.0 + z);
  cplx d = 1.0 / b;
  cplx h = d, delh = d;
  cplx q1 = 0.0, q2 = 1.0;
  cplx q = a1, c = a1;
  cplx a = -a1;
  cplx s = 1.0 + q * delh;
  for (int i = 1; i < 100000; ++i) {
    a -= 2.0 * i;
    c = -a * c / (i + 1.0);
    cplx qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    cplx dels = q * delh;
    s += dels;
    if (std::abs(dels) < 1e-17 * std::abs(s)) break;
  }
  return std::sqrt(kPi / (2.0 * z)) / s;
}

// Hankel expansion of exp(z) K0(z); the smallest term is about exp(-2|z|), so it is only used
// for |z| >= 18 where it is below double round-off.
cplx k0_asym_scaled(cplx z) {
  const cplx iz = 1.0 / z;
  cplx term(1.0, 0.0), sum(1.0, 0.0);
  double prev = 1.0;
  for (int k = 1; k < 60; ++k) {
    term *= -double((2 * k - 1) * (2 * k - 1)) / (8.0 * k) * iz;
    const double at = std::abs(term);
    if (at > prev) break;
    sum += term;
    prev = at;
    if (at < 1e-17 * std::abs(sum)) break;
  }
  return std::sqrt(kPi / (2.0 * z)) * sum;
}

cplx k0_scaled_right(cplx z) { return std::abs(z) >= 18.0 ? k0_asym_scaled(z) : k0_cf2_scaled(z); }

}  // namespace

cplx bessel_i0(cplx z) {
  // periodic trapezoid rule for (1/2pi) int_0^{2pi} exp(z cos t) dt, geometrically convergent
  const int m = 2 * static_cast<int>(std::abs(z)) + 40;
  cplx acc(0.0, 0.0);
  for (int k = 0; k < m; ++k) acc += std::exp(z * std::cos(2.0 * kPi * k / m));
  return acc / double(m);
}

cplx bessel_k0(cplx z) {
  if (z == cplx(0.0, 0.0)) throw DomainError("bessel_k0: singular at z = 0");
  if (z.imag() == 0.0 && z.real() < 0.0)
    throw DomainError("bessel_k0: z on the branch cut (negative real axis)");
  const double az = std::abs(z);
  if (az <= 2.0) return k0_series(z);
  if (z.real() >= 0.0) return std::exp(-z) * k0_scaled_right(z);
  // continuation across the imaginary axis: K0(w) = K0(-w) -+ i pi I0(w)
  cplx base = std::exp(z) * k0_scaled_right(-z);
  cplx corr = kI * kPi * bessel_i0(z);
  return z.imag() > 0.0 ? base - corr : base + corr;
}

cplx bessel_k0_scaled(cplx z) {
  if (z.real() < 0.0) throw DomainError("bessel_k0_scaled: requires Re z >= 0");
  if (std::abs(z) <= 2.0) return std::exp(z) * bessel_k0(z);
  return k0_scaled_right(z);
}

cplx damped_sqrt(cplx lambda, double alpha_damp) {
  if (alpha_damp == 0.0) return lambda;
  if (lambda.imag() == 0.0 && lambda.real() <= 0.0 && lambda.real() >= -alpha_damp)
    throw DomainError("damped_sqrt: lambda on the branch segment [-alpha, 0]");
  return lambda * std::sqrt(1.0 + alpha_damp / lambda);
}

cplx transfer_2d(cplx lambda, double d, double alpha_damp) {
  return bessel_k0(damped_sqrt(lambda, alpha_damp) * d) / (2.0 * kPi);
}

cplx transfer_3d(cplx lambda, double d, double alpha_damp) {
  return std::exp(-damped_sqrt(lambda, alpha_damp) * d) / (4.0 * kPi * d);
}

KernelDescriptor scalar_k0_kernel(double d) {
  KernelDescriptor k;
  k.eval = [](cplx lambda, double dd) { return bessel_k0(lambda * dd); };
  k.mu = -0.5;
  k.delta_sector = 0.05;
  k.shift_sectorial = true;
  k.d = d;
  k.name = "k0";
  return k;
}

KernelDescriptor wave2d_kernel(double alpha_damp) {
  KernelDescriptor k;
  k.eval = [alpha_damp](cplx lambda, double d) { return transfer_2d(lambda, d, alpha_damp); };
  k.mu = -0.5;
  k.delta_sector = 0.05;
  k.name = "wave2d";
  return k;
}

KernelDescriptor wave3d_kernel(double alpha_damp) {
  KernelDescriptor k;
  k.eval = [alpha_damp](cplx lambda, double d) { return transfer_3d(lambda, d, alpha_damp); };
  k.mu = 0.0;
  k.delta_sector = 0.05;
  k.name = "wave3d";
  return k;
}

namespace {

double shifted_ratio(const KernelDescriptor& k, cplx lambda, double d) {
  return std::abs(std::exp(lambda * d) * k.eval(lambda, d)) * std::pow(std::abs(lambda), -k.mu);
}

}  // namespace

double calibrate_c_hat(const KernelDescriptor& k, double d, double safety) {
  const double ang = kPi - k.delta_sector - 0.05;
  double c = 0.0;
  for (double a : {0.0, ang, -ang}) c = std::max(c, shifted_ratio(k, std::polar(1.0, a), d));
  return safety * c;
}

SectorCheck check_sectorial(const KernelDescriptor& k, double d, double safety) {
  SectorCheck out;
  out.c_hat = calibrate_c_hat(k, d, safety);
  const double ang = kPi - k.delta_sector - 0.05;
  for (int i = 0; i <= 120; ++i) {
    double rad = std::pow(10.0, -2.0 + 6.0 * i / 120.0);
    for (double a : {0.0, ang, -ang})
      out.worst = std::max(out.worst, shifted_ratio(k, std::polar(rad, a), d) / out.c_hat);
    for (double a : {0.0, kPi / 4, -kPi / 4, 0.45 * kPi, -0.45 * kPi}) {
      cplx lam = std::polar(rad, a);
      double v = std::abs(k.eval(lam, d)) * std::pow(rad, -k.mu);
      out.worst_right = std::max(out.worst_right, v / out.c_hat);
    }
  }
  out.ok = out.worst <= 1.0 && out.worst_right <= 1.0;
  return out;
}

}  // namespace tailcq
