#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "tailcq/bem.hpp"
#include "tailcq/contour.hpp"
#include "tailcq/kernels.hpp"

using namespace tailcq;

namespace {

// Double integral of G over patch l (x) and patch k (y) by nested tanh-sinh, splitting the inner
// interval at the diagonal. Real and imaginary parts separately.
cplx entry_oracle(const DiskMesh& mesh, int l, int k, cplx s) {
  boost::math::quadrature::tanh_sinh<double> outer_q, inner_q;
  const double D = mesh.arc;
  auto part = [&](bool imag) {
    auto outer = [&](double t1) {
      auto inner = [&](double t2) {
        const double r = 2.0 * std::abs(std::sin(0.5 * (t1 - t2)));
        if (r == 0.0) return 0.0;
        const cplx v = bessel_k0(s * r) / (2.0 * kPi);
        return imag ? v.imag() : v.real();
      };
      std::vector<double> pts{k * D};
      for (double c : {t1, t1 - 2 * kPi, t1 + 2 * kPi})
        if (c > k * D + 1e-13 && c < (k + 1) * D - 1e-13) pts.push_back(c);
      pts.push_back((k + 1) * D);
      double acc = 0.0;
      for (std::size_t i = 0; i + 1 < pts.size(); ++i) acc += inner_q.integrate(inner, pts[i], pts[i + 1]);
      return acc;
    };
    return outer_q.integrate(outer, l * D, (l + 1) * D);
  };
  return {part(false), part(true)};
}

double g_data(double t, double, double) { return t * t * t * t * std::exp(-2.0 * t); }

}  // namespace

TEST_CASE("mesh and distance classes") {
  DiskMesh m4 = disk_mesh(4);
  CHECK(m4.dist(0, 2) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(m4.arc == 2.0 * kPi / 4);
  CHECK(m4.dist(1, 1) == 0.0);
  CHECK(m4.dist(0, 3) == doctest::Approx(m4.dist(3, 0)).epsilon(1e-15));
  CHECK_THROWS_AS(disk_mesh(1), ConfigError);

  DiskMesh m = disk_mesh(100);
  DistanceClasses c = distance_classes(m, std::sqrt(2.0));
  long long n1 = 0, n2 = 0;
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j) {
      const bool a = c.mask1(i, j, 100), b = !a;
      CHECK(a != b);
      (a ? n1 : n2)++;
      CHECK(a == (m.dist(i, j) <= std::sqrt(2.0) * (1 + 1e-12)));
    }
  MESSAGE("class sizes " << n1 << " / " << n2);
  // pairs at exactly d1 fall into class 1, which tips the balance by one shift on each side
  CHECK(std::llabs(n1 - n2) <= 2 * 100);
  CHECK(c.d_near > std::sqrt(2.0));
  CHECK(c.d_far == 2.0);
}

TEST_CASE("Galerkin matrix entries") {
  DiskMesh m = disk_mesh(16);
  CMat V = assemble_frequency(m, 1.0, 0.0);
  CHECK((V - V.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (int l = 0; l < 16; ++l)
    for (int k = 0; k < 16; ++k) CHECK(std::abs(V(l, k) - V((l + 1) % 16, (k + 1) % 16)) <= 1e-12 * std::abs(V(l, k)));
  for (int k : {0, 1, 2, 5, 8, 15}) {
    const cplx ref = entry_oracle(m, k, 0, 1.0);
    CHECK(std::abs(V(k, 0) - ref) <= 1e-8 * std::abs(ref));
  }
  // complex frequency with damping
  const cplx lam(2.0, 3.0);
  CMat Vc = assemble_frequency(m, lam, 0.5);
  for (int k : {0, 1, 4}) {
    const cplx ref = entry_oracle(m, k, 0, damped_sqrt(lam, 0.5));
    CHECK(std::abs(Vc(k, 0) - ref) <= 1e-8 * std::abs(ref));
  }
  // left half plane (contour nodes)
  const cplx lw(-3.0, 8.0);
  CMat Vl = assemble_frequency(m, lw, 0.0);
  for (int k : {0, 3}) {
    const cplx ref = entry_oracle(m, k, 0, lw);
    CHECK(std::abs(Vl(k, 0) - ref) <= 1e-8 * std::abs(ref));
  }
  // circulant eigenvalues diagonalise the matrix on Fourier vectors
  CVec mu = circulant_eigs(V.col(0));
  for (int p : {0, 3, 8}) {
    CVec f(16);
    for (int l = 0; l < 16; ++l) f(l) = std::polar(1.0, 2.0 * kPi * p * l / 16);
    CHECK((V * f - mu(p) * f).cwiseAbs().maxCoeff() <= 1e-13);
  }
  // masks select complementary entries
  DistanceClasses c = distance_classes(m, std::sqrt(2.0));
  CMat V1 = assemble_frequency(m, 1.0, 0.0, &c, MaskSel::near), V2 = assemble_frequency(m, 1.0, 0.0, &c, MaskSel::far);
  CHECK((V1 + V2 - V).cwiseAbs().maxCoeff() == 0.0);
  CHECK((V1.cwiseProduct(V2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("operator weights") {
  DiskMesh m = disk_mesh(8);
  auto tab = make_tableau("radau_iia_2");
  const double h = 0.5;
  const int N = 16;
  DistanceClasses c = distance_classes(m, std::sqrt(2.0));
  FftOptions fo{0.0, 8, 1e-14};
  WeightFamily all = weight_operator_table(m, tab, h, N, 0.0, nullptr, MaskSel::all, fo);
  WeightFamily w1 = weight_operator_table(m, tab, h, N, 0.0, &c, MaskSel::near, fo);
  WeightFamily w2 = weight_operator_table(m, tab, h, N, 0.0, &c, MaskSel::far, fo);
  for (int n = 0; n <= N; ++n) {
    CMat W = physical_weight(all, n), W1 = physical_weight(w1, n), W2 = physical_weight(w2, n);
    const double sc = W.cwiseAbs().maxCoeff();
    CHECK((W1 + W2 - W).cwiseAbs().maxCoeff() <= 1e-13 * sc);
    CHECK(W.imag().cwiseAbs().maxCoeff() <= 1e-8 * sc);
    // circulant within every stage block
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int l = 0; l < 8; ++l)
          CHECK(std::abs(W(i * 8 + l, j * 8) - W(i * 8 + (l + 1) % 8, j * 8 + 1)) <= 1e-10 * sc);
  }
  // contour quadrature of the entry kernel; h small enough that the nodes stay where |r| behaves
  const double hc = 0.0625;
  const int Nc = 128;
  WeightFamily fine = weight_operator_table(m, tab, hc, Nc, 0.0, nullptr, MaskSel::all, fo);
  const double gamma = 0.8;
  for (int mshift : {0, 2, 4}) {
    KernelDescriptor k;
    k.eval = [&m, mshift](cplx l, double) { return circulant_row(m, l, 0.0)(mshift); };
    const double d = std::min(2.0, m.dist_shift(mshift) + m.arc);
    ContourParams p = select_parameters(ThetaMode::sharp, gamma, 0.9, 0.6, 25, 4.0, 2.0, d / (gamma * 4.0), 1e-15);
    REQUIRE(xi_of(p, hc, p.nu) <= rho_of(tab));
    for (int n = 64; n <= Nc; n += 8) {
      CMat Wc = weight_matrix_via_contour(k, tab, p, d, hc, n);
      CMat W = physical_weight(fine, n);
      const double sc = W.cwiseAbs().maxCoeff();
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(std::abs(W(i * 8 + mshift, j * 8) - Wc(i, j)) <= 1e-10 * sc);
    }
  }
}

TEST_CASE("potential row and load") {
  DiskMesh m = disk_mesh(16);
  CVec p = potential_row(m, 1.0, 0.0, 0.0, 1.0);
  boost::math::quadrature::tanh_sinh<double> q;
  for (int k : {3, 4, 10}) {
    auto f = [](double th) {
      const double r = std::hypot(std::cos(th), 1.0 - std::sin(th));
      return r == 0.0 ? 0.0 : bessel_k0(r).real() / (2.0 * kPi);
    };
    const double ref = q.integrate(f, k * m.arc, (k + 1) * m.arc);
    CHECK(std::abs(p(k) - ref) <= 1e-10 * std::abs(ref));
  }
  auto tab = make_tableau("radau_iia_3");
  CMat G = galerkin_load(m, tab, 0.1, 3, [](double, double, double) { return 2.0; });
  CHECK((G.array() - 2.0 * m.arc).abs().maxCoeff() <= 1e-14);
}

TEST_CASE("time march") {
  DiskMesh m = disk_mesh(16);
  auto tab = make_tableau("radau_iia_3");
  BemConfig cfg;
  cfg.M = 16;
  cfg.N = 40;
  cfg.T = 8.0;
  cfg.obl = bem_default_oblivious();
  cfg.obl.L = 20;

  BemResult zero = march(m, tab, [](double, double, double) { return 0.0; }, cfg, MarchMode::direct);
  for (int n = 0; n < cfg.N; ++n) {
    CHECK(zero.u[n] == 0.0);
    CHECK(zero.phi[n].cwiseAbs().maxCoeff() == 0.0);
  }

  const WeightFamily pot = potential_weights(m, tab, cfg.T / cfg.N, cfg.N - 1, 0.0, 0.0, 1.0, cfg.fft);
  BemResult ref = march(m, tab, g_data, cfg, MarchMode::direct, &pot);
  CHECK(ref.max_spread <= 1e-8);
  // the single layer potential reproduces the Dirichlet data on the boundary
  double dev = 0.0;
  for (int n = 0; n < cfg.N; ++n) dev = std::max(dev, std::abs(ref.u[n] - g_data(ref.t[n], 0, 1)));
  MESSAGE("sup |u - g| on the boundary " << dev);
  CHECK(dev <= 1e-10);

  BemResult fast = march(m, tab, g_data, cfg, MarchMode::oblivious, &pot);
  double err = 0.0;
  for (int n = 0; n < cfg.N; ++n) err = std::max(err, std::abs(fast.u[n] - ref.u[n]));
  MESSAGE("oblivious vs direct " << err);
  CHECK(err <= 1e-8);
  CHECK(fast.max_spread <= 1e-8);
  REQUIRE(fast.counters.size() == 2u);

  // mesh refinement at fixed N: the observable stays put
  DiskMesh m8 = disk_mesh(8);
  BemConfig c8 = cfg;
  c8.M = 8;
  BemResult r8 = march(m8, tab, g_data, c8, MarchMode::direct);
  double change = 0.0;
  for (int n = 0; n < cfg.N; ++n) change = std::max(change, std::abs(r8.u[n] - ref.u[n]));
  CHECK(change <= 1e-10);

  CHECK_THROWS_AS(march(m, tab, g_data, BemConfig{16, 0}, MarchMode::direct), ConfigError);
}
