#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "tailcq/cqdirect.hpp"

using namespace tailcq;

namespace {

KernelDescriptor from_fn(std::function<cplx(cplx)> f) {
  KernelDescriptor k;
  k.eval = [f](cplx l, double) { return f(l); };
  return k;
}

double max_abs(const CMat& m) { return m.cwiseAbs().maxCoeff(); }

// Round-off in the weights grows like R^{-N} = eps^{-1/oversample}; 8 keeps it near machine level.
const FftOptions kFine{0.0, 8, 1e-14};

}  // namespace

TEST_CASE("constant kernel gives identity weight") {
  auto tab = make_tableau("radau_iia_3");
  WeightTable w = weights_fft(from_fn([](cplx) { return cplx(1.0, 0.0); }), tab, 0.1, 20, 0.0, kFine);
  CHECK(max_abs(w.W[0] - CMat::Identity(3, 3)) <= 1e-12);
  for (int n = 1; n <= 20; ++n) CHECK(max_abs(w.W[n]) <= 1e-12);
}

TEST_CASE("resolvent kernel weights are h E_n") {
  // K(lambda) = 1/(lambda - lambda0): K(Delta(zeta)/h) = h (Delta(zeta) - h lambda0)^{-1}
  auto tab = make_tableau("radau_iia_3");
  const double h = 0.1;
  const cplx l0(-2.0, 1.0);
  WeightTable w = weights_fft(from_fn([l0](cplx l) { return 1.0 / (l - l0); }), tab, h, 64, 0.0, kFine);
  const cplx z = h * l0;
  CMat A = tab.A.cast<cplx>();
  CMat W0 = h * A * (CMat::Identity(3, 3) - z * A).inverse();
  CHECK(max_abs(w.W[0] - W0) <= 1e-12);
  for (int n = 1; n <= 64; ++n) CHECK(max_abs(w.W[n] - h * E_n(tab, z, n)) <= 1e-13);
  // default oversampling: same weights at the round-off level of eps^{-1/2}
  WeightTable wd = weights_fft(from_fn([l0](cplx l) { return 1.0 / (l - l0); }), tab, h, 64, 0.0);
  for (int n = 1; n <= 64; ++n) CHECK(max_abs(wd.W[n] - h * E_n(tab, z, n)) <= 1e-9);
}

TEST_CASE("integrator kernel") {
  auto be = make_tableau("backward_euler");
  const double h = 0.05;
  WeightTable w = weights_fft(from_fn([](cplx l) { return 1.0 / l; }), be, h, 30, 0.0, kFine);
  cplx acc(0.0, 0.0);
  for (int n = 0; n <= 30; ++n) {
    acc += w.omega(n)(0);
    CHECK(std::abs(acc - h * (n + 1)) <= 1e-12);
  }
  // g(t) = t integrated exactly by a stage order 2 method
  auto r2 = make_tableau("radau_iia_2");
  WeightTable w2 = weights_fft(from_fn([](cplx l) { return 1.0 / l; }), r2, h, 40, 0.0, kFine);
  auto u = conv_direct(w2, stage_samples(r2, h, 40, [](double t) { return t; }));
  for (int n = 0; n < 40; ++n) CHECK(std::abs(u[n] - 0.5 * std::pow(h * (n + 1), 2)) <= 1e-13);
}

TEST_CASE("K0 weights: radius robustness and reality") {
  auto tab = make_tableau("radau_iia_3");
  auto k = scalar_k0_kernel(0.1);
  const int N = 64;
  WeightTable a = weights_fft(k, tab, 0.1, N, 0.1);
  FftOptions o;
  o.radius = 0.5 * (1.0 + std::pow(o.eps_target, 1.0 / (2.0 * N)));
  WeightTable b = weights_fft(k, tab, 0.1, N, 0.1, o);
  double scale = 0.0, diff = 0.0, im = 0.0;
  for (int n = 0; n <= N; ++n) {
    scale = std::max(scale, max_abs(a.W[n]));
    diff = std::max(diff, max_abs(a.W[n] - b.W[n]));
    im = std::max(im, a.W[n].imag().cwiseAbs().maxCoeff());
  }
  CHECK(diff <= 1e-9 * scale);
  CHECK(im <= 1e-8 * scale);
  CHECK_THROWS_AS(weights_fft(k, tab, 0.1, 8, 0.1, FftOptions{1.5, 2, 1e-14}), ConfigError);
  CHECK_THROWS_AS(weights_fft(k, tab, 0.1, 8, 0.1, FftOptions{0.0, 1, 1e-14}), ConfigError);
}

TEST_CASE("family of kernels matches separate runs") {
  auto tab = make_tableau("radau_iia_2");
  auto fam = [](cplx l, cplx* out) {
    out[0] = bessel_k0(0.2 * l);
    out[1] = std::exp(-0.5 * l);
  };
  WeightFamily f = weights_fft_family(fam, 2, tab, 0.1, 32);
  WeightTable a = weights_fft(scalar_k0_kernel(0.2), tab, 0.1, 32, 0.2);
  WeightTable b = weights_fft(from_fn([](cplx l) { return std::exp(-0.5 * l); }), tab, 0.1, 32, 0.0);
  for (int n = 0; n <= 32; ++n) {
    CHECK(max_abs(f.matrix(n, 0) - a.W[n]) <= 1e-15);
    CHECK(max_abs(f.matrix(n, 1) - b.W[n]) <= 1e-15);
  }
}

TEST_CASE("direct convolution") {
  auto tab = make_tableau("radau_iia_3");
  WeightTable w = weights_fft(scalar_k0_kernel(0.1), tab, 0.1, 50, 0.1);
  auto zero = conv_direct(w, stage_samples(tab, 0.1, 50, [](double) { return 0.0; }));
  CHECK(*std::max_element(zero.begin(), zero.end()) == 0.0);
  auto g1 = [](double t) { return std::sin(t); };
  auto g2 = [](double t) { return t * t; };
  auto u1 = conv_direct(w, stage_samples(tab, 0.1, 50, g1));
  auto u2 = conv_direct(w, stage_samples(tab, 0.1, 50, g2));
  auto u12 = conv_direct(w, stage_samples(tab, 0.1, 50, [&](double t) { return 3.0 * g1(t) + g2(t); }));
  for (int n = 0; n < 50; ++n) CHECK(std::abs(u12[n] - (3.0 * u1[n] + u2[n])) <= 1e-12 * (1.0 + std::abs(u12[n])));
  CHECK_THROWS_AS(conv_direct(w, CMat::Zero(3, 60)), ConfigError);
}

TEST_CASE("operator convolution") {
  auto tab = make_tableau("radau_iia_2");
  // M = 1 reduces to the scalar convolution
  WeightTable w = weights_fft(scalar_k0_kernel(0.3), tab, 0.1, 20, 0.3);
  CMat G = stage_samples(tab, 0.1, 21, [](double t) { return t * std::exp(-t); });
  std::vector<CVec> phi;
  for (int j = 0; j < 21; ++j) phi.push_back(G.col(j));
  auto out = conv_direct_operator(w.W, phi);
  auto ref = conv_direct(w, G);
  for (int n = 0; n < 21; ++n) CHECK(std::abs(out[n](1).real() - ref[n]) <= 1e-15);

  // naive entrywise loop and permutation equivariance, s M = 16
  std::mt19937 rng(3);
  std::normal_distribution<double> Nd;
  const int dim = 16, N = 16;
  std::vector<CMat> W(N + 1, CMat(dim, dim));
  std::vector<CVec> x(N + 1, CVec(dim));
  for (auto& m : W)
    for (int i = 0; i < dim * dim; ++i) m.data()[i] = cplx(Nd(rng), Nd(rng));
  for (auto& v : x)
    for (int i = 0; i < dim; ++i) v(i) = cplx(Nd(rng), 0.0);
  auto y = conv_direct_operator(W, x);
  for (int n = 0; n <= N; ++n)
    for (int r = 0; r < dim; ++r) {
      cplx acc(0.0, 0.0);
      for (int j = 0; j <= n; ++j)
        for (int c = 0; c < dim; ++c) acc += W[n - j](r, c) * x[j](c);
      CHECK(std::abs(acc - y[n](r)) <= 1e-13 * (1.0 + std::abs(acc)));
    }
  Eigen::PermutationMatrix<Eigen::Dynamic> P(dim);
  P.setIdentity();
  std::shuffle(P.indices().data(), P.indices().data() + dim, rng);
  std::vector<CMat> Wp;
  std::vector<CVec> xp;
  for (auto& m : W) Wp.push_back(P * m * P.transpose());
  for (auto& v : x) xp.push_back(P * v);
  auto yp = conv_direct_operator(Wp, xp);
  for (int n = 0; n <= N; ++n) CHECK((yp[n] - P * y[n]).cwiseAbs().maxCoeff() <= 1e-12);
  std::vector<CVec> bad(1, CVec::Zero(3));
  CHECK_THROWS_AS(conv_direct_operator(W, bad), ConfigError);
}
