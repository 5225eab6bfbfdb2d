#include "tailcq/rk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tailcq {

namespace {

ButcherTableau finish(RMat A, RVec b, int p, int q_ord, std::string name) {
  ButcherTableau t;
  t.s = static_cast<int>(b.size());
  t.c = A.rowwise().sum();
  t.A = std::move(A);
  t.b = std::move(b);
  t.p = p;
  t.q_ord = q_ord;
  t.name = std::move(name);
  return t;
}

Eigen::PartialPivLU<CMat> checked_lu(const CMat& M, const char* what) {
  Eigen::PartialPivLU<CMat> lu(M);
  double rc = lu.rcond();
  if (!(rc > 1e-14)) throw SingularError(std::string(what) + ": matrix is singular (pole)");
  return lu;
}

}  // namespace

ButcherTableau make_tableau(const std::string& name) {
  if (name == "backward_euler") {
    RMat A(1, 1);
    A << 1.0;
    RVec b(1);
    b << 1.0;
    return finish(A, b, 1, 1, name);
  }
  if (name == "radau_iia_2") {
    RMat A(2, 2);
    A << 5.0 / 12.0, -1.0 / 12.0, 3.0 / 4.0, 1.0 / 4.0;
    RVec b(2);
    b << 3.0 / 4.0, 1.0 / 4.0;
    return finish(A, b, 3, 2, name);
  }
  if (name == "radau_iia_3") {
    const double r6 = std::sqrt(6.0);
    RMat A(3, 3);
    A << (88.0 - 7.0 * r6) / 360.0, (296.0 - 169.0 * r6) / 1800.0, (-2.0 + 3.0 * r6) / 225.0,
        (296.0 + 169.0 * r6) / 1800.0, (88.0 + 7.0 * r6) / 360.0, (-2.0 - 3.0 * r6) / 225.0,
        (16.0 - r6) / 36.0, (16.0 + r6) / 36.0, 1.0 / 9.0;
    RVec b = A.row(2).transpose();
    return finish(A, b, 5, 3, name);
  }
  throw ConfigError("unknown tableau '" + name + "' (expected backward_euler, radau_iia_2, radau_iia_3)");
}

StageSymbol symbol(const ButcherTableau& tab, cplx z) {
  const int s = tab.s;
  CMat M = CMat::Identity(s, s) - z * tab.A.cast<cplx>();
  auto lu = checked_lu(M, "I - zA");
  StageSymbol out;
  out.z = z;
  CMat Minv = lu.inverse();
  out.v = Minv.rowwise().sum();
  out.q = tab.b.cast<cplx>().transpose() * Minv;
  out.r = 1.0 + z * (tab.b.cast<cplx>().transpose() * out.v)(0);
  return out;
}

cplx stability(const ButcherTableau& tab, cplx z) { return symbol(tab, z).r; }

CRow q_vector(const ButcherTableau& tab, cplx z) { return symbol(tab, z).q; }

CMat delta(const ButcherTableau& tab, cplx zeta) {
  if (zeta == cplx(1.0, 0.0)) throw DomainError("delta: zeta = 1 is excluded");
  const int s = tab.s;
  CMat inner = tab.A.cast<cplx>() +
               (zeta / (1.0 - zeta)) * CVec::Ones(s) * tab.b.cast<cplx>().transpose();
  auto lu = checked_lu(inner, "delta");
  return lu.inverse();
}

cplx ipow(cplx x, long long m) {
  cplx acc(1.0, 0.0);
  while (m > 0) {
    if (m & 1) acc *= x;
    x *= x;
    m >>= 1;
  }
  return acc;
}

CRow e_n(const ButcherTableau& tab, cplx z, int n) {
  if (n < 0) throw DomainError("e_n: n must be nonnegative");
  StageSymbol sy = symbol(tab, z);
  return ipow(sy.r, n) * sy.q;
}

CMat E_n(const ButcherTableau& tab, cplx z, int n) {
  if (n < 1) throw DomainError("E_n: n must be positive");
  StageSymbol sy = symbol(tab, z);
  return ipow(sy.r, n - 1) * (sy.v * sy.q);
}

namespace {

// log|r(z)| / Re z, Re z < 0.
double ratio(const ButcherTableau& tab, double x, double y) {
  cplx r = stability(tab, cplx(x, y));
  double m = std::abs(r);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return std::log(m) / x;
}

template <class F>
double golden_min(F f, double lo, double hi, double& best_x, int iters = 60) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  // the endpoints are candidates too, the minimum often sits on Re z = -xi
  double cand[4] = {lo, hi, c, d};
  double best = std::numeric_limits<double>::infinity();
  for (double x : cand) {
    double v = f(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  return best;
}

}  // namespace

double gamma_of_xi(const ButcherTableau& tab, double xi, const GammaGrid& grid) {
  if (!(xi > 0.0)) throw DomainError("gamma_of_xi: xi must be positive");
  const double x_hi = -std::min(grid.x_gap, 0.5 * xi);
  std::vector<double> xs(grid.nx), ys(grid.ny + 1);
  for (int i = 0; i < grid.nx; ++i)
    xs[i] = -xi + (x_hi + xi) * i / std::max(1, grid.nx - 1);
  ys[0] = 0.0;
  const double l0 = std::log(grid.y_min), l1 = std::log(grid.y_max);
  for (int j = 0; j < grid.ny; ++j) ys[j + 1] = std::exp(l0 + (l1 - l0) * j / std::max(1, grid.ny - 1));

  double best = std::numeric_limits<double>::infinity();
  int bi = 0, bj = 0;
  // conjugate symmetry: Im z >= 0 suffices
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j <= grid.ny; ++j) {
      double v = ratio(tab, xs[i], ys[j]);
      if (v < best) {
        best = v;
        bi = i;
        bj = j;
      }
    }

  double x = xs[bi], y = ys[bj];
  const double xlo = xs[std::max(0, bi - 1)], xhi = xs[std::min(grid.nx - 1, bi + 1)];
  const double ylo = ys[std::max(0, bj - 1)], yhi = ys[std::min(grid.ny, bj + 1)];
  for (int sweep = 0; sweep < grid.refine_sweeps; ++sweep) {
    double nx_ = x;
    double vx = golden_min([&](double t) { return ratio(tab, t, y); }, xlo, xhi, nx_);
    if (vx < best) {
      best = vx;
      x = nx_;
    }
    double ny_ = y;
    double vy = golden_min([&](double t) { return ratio(tab, x, t); }, ylo, yhi, ny_);
    if (vy < best) {
      best = vy;
      y = ny_;
    }
  }
  return std::clamp(best, 0.0, 1.0);
}

bool rho_sample_ok(const ButcherTableau& tab, double rho, int nx, int ny, double y_max) {
  auto ok = [&](double x, double y) {
    cplx r;
    try {
      r = stability(tab, cplx(x, y));
    } catch (const SingularError&) {
      return false;
    }
    return std::abs(r) <= std::exp(2.0 * x) * (1.0 + 1e-12);
  };
  for (int i = 0; i < nx; ++i) {
    double x = rho * i / std::max(1, nx - 1);
    if (!ok(x, 0.0)) return false;
    for (int j = 0; j < ny; ++j) {
      double y = -y_max + 2.0 * y_max * j / std::max(1, ny - 1);
      if (!ok(x, y)) return false;
    }
    // rational decay for large |Im z|
    for (double y = y_max; y < 1e6; y *= 2.0)
      if (!ok(x, y)) return false;
  }
  return true;
}

double rho_of(const ButcherTableau& tab) {
  Eigen::ComplexEigenSolver<CMat> es(tab.A.cast<cplx>());
  double min_re = std::numeric_limits<double>::infinity();
  for (int i = 0; i < tab.s; ++i) min_re = std::min(min_re, (1.0 / es.eigenvalues()(i)).real());
  double rho = 0.9 * min_re;
  while (rho > 1e-6 && !rho_sample_ok(tab, rho)) rho *= 0.95;
  return rho;
}

CVec rk_ode_step(const StageSymbol& sym, double h, const CVec& y, const CMat& g_stages) {
  return sym.r * y + h * (sym.q * g_stages).transpose();
}

CVec rk_ode_step(const ButcherTableau& tab, double h, cplx lambda, const CVec& y,
                 const CMat& g_stages) {
  return rk_ode_step(symbol(tab, h * lambda), h, y, g_stages);
}

}  // namespace tailcq
