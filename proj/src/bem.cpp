#include "tailcq/bem.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <boost/math/quadrature/gauss.hpp>

#include "tailcq/kernels.hpp"

namespace tailcq {

namespace {

using GL = boost::math::quadrature::gauss<double, 20>;

template <class F>
cplx gl_panel(const F& f, double a, double b) {
  const auto& xs = GL::abscissa();
  const auto& ws = GL::weights();
  const double m = 0.5 * (a + b), r = 0.5 * (b - a);
  cplx acc(0.0, 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] == 0.0)
      acc += ws[i] * f(m);
    else
      acc += ws[i] * (f(m - r * xs[i]) + f(m + r * xs[i]));
  }
  return r * acc;
}

template <class F>
cplx gl_uniform(const F& f, double a, double b, int panels) {
  cplx acc(0.0, 0.0);
  for (int p = 0; p < panels; ++p) acc += gl_panel(f, a + (b - a) * p / panels, a + (b - a) * (p + 1) / panels);
  return acc;
}

constexpr double kGrade = 0.2;
constexpr int kGradeLevels = 18;

// Geometric refinement toward a log-type singularity at a (toward_a) or b; the outer panel
// is split further when the integrand oscillates.
template <class F>
cplx gl_graded(const F& f, double a, double b, bool toward_a, int outer_panels) {
  const double len = b - a;
  cplx acc(0.0, 0.0);
  double frac = 1.0;
  for (int k = 0; k < kGradeLevels; ++k) {
    const double lo = frac * kGrade, hi = frac;
    const int np = (k == 0) ? outer_panels : 1;
    if (toward_a)
      acc += gl_uniform(f, a + len * lo, a + len * hi, np);
    else
      acc += gl_uniform(f, b - len * hi, b - len * lo, np);
    frac *= kGrade;
  }
  if (toward_a)
    acc += gl_panel(f, a, a + len * frac);
  else
    acc += gl_panel(f, b - len * frac, b);
  return acc;
}

template <class F>
cplx integrate_interval(const F& f, double a, double b, bool sing_a, bool sing_b, int panels) {
  if (sing_a && sing_b) {
    const double m = 0.5 * (a + b);
    return gl_graded(f, a, m, true, panels) + gl_graded(f, m, b, false, panels);
  }
  if (sing_a) return gl_graded(f, a, b, true, panels);
  if (sing_b) return gl_graded(f, a, b, false, panels);
  return gl_uniform(f, a, b, panels);
}

int oscillation_panels(cplx s, double len) { return 1 + static_cast<int>(std::ceil(std::abs(s) * len / 8.0)); }

// int_{-D}^{D} (D - |u|) G(2|sin((m D + u)/2)|) du for the uniform circle mesh.
cplx row_entry(int m, int M, double D, cplx s) {
  auto f = [&](double u) {
    const double r = 2.0 * std::abs(std::sin(0.5 * (m * D + u)));
    return (D - std::abs(u)) * bessel_k0(s * r) / (2.0 * kPi);
  };
  const int np = oscillation_panels(s, D);
  const bool left_a = (m == 1);
  const bool right_b = (m == M - 1);
  return integrate_interval(f, -D, 0.0, left_a, m == 0, np) + integrate_interval(f, 0.0, D, m == 0, right_b, np);
}

bool selected(const DistanceClasses* cls, MaskSel sel, int m) {
  if (sel == MaskSel::all || cls == nullptr) return true;
  const bool near = cls->near[m] != 0;
  return sel == MaskSel::near ? near : !near;
}

std::vector<double> cos_table(int M) {
  std::vector<double> c(M);
  for (int k = 0; k < M; ++k) c[k] = std::cos(2.0 * kPi * k / M);
  return c;
}

}  // namespace

double DiskMesh::dist_shift(int m) const {
  m = ((m % M) + M) % M;
  return 2.0 * std::abs(std::sin(kPi * m / M));
}

double DiskMesh::dist(int i, int j) const { return dist_shift(i - j); }

DiskMesh disk_mesh(int M) {
  if (M < 2) throw ConfigError("disk_mesh: need at least two patches");
  DiskMesh mesh;
  mesh.M = M;
  mesh.arc = 2.0 * kPi / M;
  return mesh;
}

DistanceClasses distance_classes(const DiskMesh& mesh, double d1) {
  if (!(d1 > 0.0)) throw ConfigError("distance_classes: d1 must be positive");
  DistanceClasses c;
  c.d1 = d1;
  c.near.resize(mesh.M);
  // Tolerance so that pairs sitting exactly on the split radius are assigned deterministically.
  for (int m = 0; m < mesh.M; ++m) c.near[m] = mesh.dist_shift(m) <= d1 * (1.0 + 1e-12) ? 1 : 0;
  c.d_near = std::min(2.0, d1 + 2.0 * std::sin(0.5 * mesh.arc));
  c.d_far = 2.0;
  return c;
}

CVec circulant_row(const DiskMesh& mesh, cplx lambda, double alpha_damp) {
  const int M = mesh.M;
  const cplx s = damped_sqrt(lambda, alpha_damp);
  CVec v(M);
  for (int m = 0; m <= M / 2; ++m) {
    v(m) = row_entry(m, M, mesh.arc, s);
    if (m > 0) v(M - m) = v(m);
  }
  return v;
}

CMat assemble_frequency(const DiskMesh& mesh, cplx lambda, double alpha_damp, const DistanceClasses* cls,
                        MaskSel sel) {
  const int M = mesh.M;
  CVec v = circulant_row(mesh, lambda, alpha_damp);
  CMat V(M, M);
  for (int l = 0; l < M; ++l)
    for (int k = 0; k < M; ++k) {
      const int m = ((l - k) % M + M) % M;
      V(l, k) = selected(cls, sel, m) ? v(m) : cplx(0.0, 0.0);
    }
  return V;
}

CVec circulant_eigs(const CVec& v) {
  const int M = static_cast<int>(v.size());
  CVec mu(M);
  for (int p = 0; p < M; ++p) {
    cplx acc(0.0, 0.0);
    for (int m = 0; m < M; ++m) acc += v(m) * std::polar(1.0, -2.0 * kPi * double((long long)p * m % M) / M);
    mu(p) = acc;
  }
  return mu;
}

SymbolFamily bem_symbol_family(const DiskMesh& mesh, double alpha_damp, const DistanceClasses* cls, MaskSel sel) {
  auto ct = std::make_shared<std::vector<double>>(cos_table(mesh.M));
  std::vector<char> keep(mesh.M);
  for (int m = 0; m < mesh.M; ++m) keep[m] = selected(cls, sel, m) ? 1 : 0;
  return [mesh, alpha_damp, ct, keep](cplx lambda, cplx* out) {
    const int M = mesh.M;
    CVec v = circulant_row(mesh, lambda, alpha_damp);
    // v is even in m, so the eigenvalues are cosine sums.
    for (int p = 0; p < M; ++p) {
      cplx acc(0.0, 0.0);
      for (int m = 0; m < M; ++m)
        if (keep[m]) acc += v(m) * (*ct)[(static_cast<long long>(p) * m) % M];
      out[p] = acc;
    }
  };
}

WeightFamily weight_operator_table(const DiskMesh& mesh, const ButcherTableau& tab, double h, int N_local,
                                   double alpha_damp, const DistanceClasses* cls, MaskSel sel,
                                   const FftOptions& opt) {
  return weights_fft_family(bem_symbol_family(mesh, alpha_damp, cls, sel), mesh.M, tab, h, N_local, opt);
}

CMat physical_weight(const WeightFamily& w, int n) {
  const int M = w.P, s = w.s;
  CMat out(s * M, s * M);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) {
      // circulant block with eigenvalues W_n^{(p)}(i, j)
      CVec col(M);
      for (int m = 0; m < M; ++m) {
        cplx acc(0.0, 0.0);
        for (int p = 0; p < M; ++p) acc += w.at(n, p, i, j) * std::polar(1.0, 2.0 * kPi * double((long long)p * m % M) / M);
        col(m) = acc / double(M);
      }
      for (int l = 0; l < M; ++l)
        for (int k = 0; k < M; ++k) out(i * M + l, j * M + k) = col(((l - k) % M + M) % M);
    }
  return out;
}

CVec potential_row(const DiskMesh& mesh, cplx lambda, double alpha_damp, double px, double py) {
  const int M = mesh.M;
  const double D = mesh.arc;
  const cplx s = damped_sqrt(lambda, alpha_damp);
  const double thx = std::atan2(py, px);
  CVec out(M);
  for (int k = 0; k < M; ++k) {
    const double a = k * D, b = (k + 1) * D;
    auto f = [&](double th) {
      const double r = std::hypot(px - std::cos(th), py - std::sin(th));
      return bessel_k0(s * r) / (2.0 * kPi);
    };
    // closest angle of the patch to the observation direction
    double tc = thx;
    while (tc < a - kPi) tc += 2.0 * kPi;
    while (tc > a + kPi) tc -= 2.0 * kPi;
    double best = a, bestd = 1e300;
    for (double cand : {a, b, std::clamp(tc, a, b), std::clamp(tc + 2 * kPi, a, b), std::clamp(tc - 2 * kPi, a, b)}) {
      const double dd = std::hypot(px - std::cos(cand), py - std::sin(cand));
      if (dd < bestd) {
        bestd = dd;
        best = cand;
      }
    }
    const int np = oscillation_panels(s, D);
    if (bestd >= D) {
      out(k) = gl_uniform(f, a, b, np);
    } else if (best - a <= 1e-14 * D) {
      out(k) = gl_graded(f, a, b, true, np);
    } else if (b - best <= 1e-14 * D) {
      out(k) = gl_graded(f, a, b, false, np);
    } else {
      out(k) = gl_graded(f, a, best, false, np) + gl_graded(f, best, b, true, np);
    }
  }
  return out;
}

CMat galerkin_load(const DiskMesh& mesh, const ButcherTableau& tab, double h, int j, const SpaceTimeData& g) {
  const int M = mesh.M, s = tab.s;
  CMat G(s, M);
  for (int i = 0; i < s; ++i) {
    const double t = h * (j + tab.c(i));
    for (int l = 0; l < M; ++l) {
      auto f = [&](double th) { return cplx(g(t, std::cos(th), std::sin(th)), 0.0); };
      G(i, l) = gl_panel(f, l * mesh.arc, (l + 1) * mesh.arc);
    }
  }
  return G;
}

ObliviousConfig bem_default_oblivious() {
  ObliviousConfig c;
  c.L = 26;
  c.B = 5;
  c.gamma = 0.6;
  c.alpha = 0.98;
  c.b_strip = 0.33;
  return c;
}

WeightFamily potential_weights(const DiskMesh& mesh, const ButcherTableau& tab, double h, int N, double alpha_damp,
                               double px, double py, const FftOptions& opt) {
  auto fam = [&mesh, alpha_damp, px, py](cplx lambda, cplx* out) {
    CVec r = potential_row(mesh, lambda, alpha_damp, px, py);
    for (int k = 0; k < mesh.M; ++k) out[k] = r(k);
  };
  return weights_fft_family(fam, mesh.M, tab, h, N, opt);
}

BemResult march(const DiskMesh& mesh, const ButcherTableau& tab, const SpaceTimeData& g, const BemConfig& cfg,
                MarchMode mode, const WeightFamily* pot_in) {
  if (cfg.N < 1) throw ConfigError("march: N must be positive");
  if (!(cfg.T > 0.0)) throw ConfigError("march: T must be positive");
  if (cfg.alpha_damp < 0.0) throw ConfigError("march: alpha_damp must be nonnegative");
  const int M = mesh.M, s = tab.s, N = cfg.N;
  const double h = cfg.T / N;

  // DFT over the patch index
  CMat F(M, M);
  for (int l = 0; l < M; ++l)
    for (int p = 0; p < M; ++p) F(l, p) = std::polar(1.0, -2.0 * kPi * double((long long)p * l % M) / M);
  const CMat Finv = F.conjugate() / double(M);

  BemResult res;
  DistanceClasses cls = distance_classes(mesh, cfg.d1);

  // Build history engines before marching so infeasible contours fail early.
  WeightFamily full;
  std::unique_ptr<ObliviousConvolver> c1, c2;
  std::vector<Eigen::PartialPivLU<CMat>> w0(M);
  if (mode == MarchMode::direct) {
    full = weight_operator_table(mesh, tab, h, N - 1, cfg.alpha_damp, nullptr, MaskSel::all, cfg.fft);
    for (int p = 0; p < M; ++p) w0[p].compute(full.matrix(0, p));
  } else {
    ObliviousConfig oc = cfg.obl;
    oc.local_fft = cfg.fft;
    c1 = std::make_unique<ObliviousConvolver>(bem_symbol_family(mesh, cfg.alpha_damp, &cls, MaskSel::near), M, tab,
                                              h, N, cls.d_near, oc);
    c2 = std::make_unique<ObliviousConvolver>(bem_symbol_family(mesh, cfg.alpha_damp, &cls, MaskSel::far), M, tab,
                                              h, N, cls.d_far, oc);
    for (int p = 0; p < M; ++p) w0[p].compute(c1->w0(p) + c2->w0(p));
    for (auto* c : {c1.get(), c2.get()})
      res.warnings.insert(res.warnings.end(), c->warnings().begin(), c->warnings().end());
  }
  for (int p = 0; p < M; ++p)
    if (!(w0[p].rcond() > 1e-14)) throw SingularError("march: W_0 is singular for mode " + std::to_string(p));

  WeightFamily pot_own;
  if (pot_in == nullptr) pot_own = potential_weights(mesh, tab, h, N - 1, cfg.alpha_damp, cfg.obs_x, cfg.obs_y, cfg.fft);
  const WeightFamily& pot = pot_in ? *pot_in : pot_own;
  if (pot.P != M || pot.N < N - 1 || pot.s != s) throw ConfigError("march: potential weights do not match the run");

  std::vector<CMat> phi_hat;  // s x M per step
  std::vector<CMat> phi_phys;
  phi_hat.reserve(N);
  phi_phys.reserve(N);
  for (int n = 0; n < N; ++n) {
    CMat ghat = galerkin_load(mesh, tab, h, n, g) * F;
    CMat hist = CMat::Zero(s, M);
    if (mode == MarchMode::direct) {
      for (int j = 0; j < n; ++j)
        for (int p = 0; p < M; ++p) hist.col(p) += full.matrix(n - j, p) * phi_hat[j].col(p);
    } else {
      hist = c1->history() + c2->history();
    }
    CMat ph(s, M);
    for (int p = 0; p < M; ++p) ph.col(p) = w0[p].solve(ghat.col(p) - hist.col(p));
    if (mode == MarchMode::oblivious) {
      c1->push(ph);
      c2->push(ph);
    }
    phi_hat.push_back(ph);
    phi_phys.push_back(ph * Finv);
  }

  res.t.resize(N);
  res.u.resize(N);
  res.phi.resize(N);
  std::vector<CRow> last(static_cast<std::size_t>(N) * M);
  for (int n = 0; n < N; ++n)
    for (int k = 0; k < M; ++k) last[std::size_t(n) * M + k] = pot.matrix(n, k).row(s - 1);
  for (int n = 0; n < N; ++n) {
    cplx acc(0.0, 0.0);
    for (int j = 0; j <= n; ++j)
      for (int k = 0; k < M; ++k) acc += (last[std::size_t(n - j) * M + k] * phi_phys[j].col(k))(0);
    res.t[n] = h * (n + 1);
    res.u[n] = acc.real();
    res.phi[n] = phi_phys[n].row(s - 1).real().transpose();
    const Eigen::MatrixXd re = phi_phys[n].real();
    const double mx = re.cwiseAbs().maxCoeff();
    if (mx > 0.0) {
      double spread = 0.0;
      for (int i = 0; i < s; ++i) spread = std::max(spread, re.row(i).maxCoeff() - re.row(i).minCoeff());
      res.max_spread = std::max(res.max_spread, spread / mx);
    }
  }
  if (mode == MarchMode::oblivious) res.counters = {c1->counters(), c2->counters()};
  return res;
}

}  // namespace tailcq
