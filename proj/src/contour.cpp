#include "tailcq/contour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>

namespace tailcq {

std::pair<cplx, cplx> hyperbola(double alpha, double nu, cplx x) {
  cplx arg = alpha - kI * x;
  return {nu * (1.0 - std::sin(arg)), nu * kI * std::cos(arg)};
}

ThetaMode parse_theta_mode(const std::string& s) {
  if (s == "bound") return ThetaMode::bound;
  if (s == "inverse_L") return ThetaMode::inverse_L;
  if (s == "sharp") return ThetaMode::sharp;
  if (s == "fixed") return ThetaMode::fixed;
  throw ConfigError("unknown theta_mode '" + s + "' (bound, inverse_L, sharp, fixed)");
}

std::string to_string(ThetaMode m) {
  switch (m) {
    case ThetaMode::bound: return "bound";
    case ThetaMode::inverse_L: return "inverse_L";
    case ThetaMode::sharp: return "sharp";
    case ThetaMode::fixed: return "fixed";
  }
  return "?";
}

double a_of_theta(double gamma, double alpha, double b_strip, double Lambda, double D, double theta) {
  const double g = gamma * (1.0 - D) * theta;
  const double arg = (g + 2.0 * Lambda * (1.0 - theta)) / (g * std::sin(alpha - b_strip));
  if (!(arg >= 1.0)) throw InfeasibleError("a(theta): arccosh argument below 1");
  return std::acosh(arg);
}

double theta_bound(int L, double a, double b_strip, double eps_eval, double theta) {
  const double e = std::exp(-2.0 * kPi * b_strip * L / a);
  return eps_eval * std::pow(e, -theta / 2.0) + std::pow(e, 1.0 - theta);
}

namespace {

// grid scan on (lo, hi) followed by golden-section polish around the best cell
template <class F>
double minimise_1d(F f, double lo, double hi, int n) {
  double best = std::numeric_limits<double>::infinity(), bx = 0.5 * (lo + hi);
  int bi = -1;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = lo + (hi - lo) * (i + 0.5) / n;
    double v = f(xs[i]);
    if (v < best) {
      best = v;
      bx = xs[i];
      bi = i;
    }
  }
  if (bi < 0) return bx;
  double a = xs[std::max(0, bi - 1)], b = xs[std::min(n - 1, bi + 1)];
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 50; ++it) {
    if (fc < fd) {
      b = d; d = c; fd = fc; c = b - g * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd; d = a + g * (b - a); fd = f(d);
    }
  }
  double xm = fc < fd ? c : d;
  return std::min(fc, fd) < best ? xm : bx;
}

}  // namespace

double choose_theta(int L, const std::function<double(double)>& a_of, double b_strip, double eps_eval) {
  if (L < 2) throw ConfigError("choose_theta: L must be >= 2");
  const double fallback = 1.0 / L;
  if (eps_eval == 0.0) return fallback;
  auto f = [&](double th) {
    try {
      return theta_bound(L, a_of(th), b_strip, eps_eval, th);
    } catch (const InfeasibleError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  double th = minimise_1d(f, 0.0, 1.0, 2000);
  return f(th) <= f(fallback) ? th : fallback;
}

double sharp_error_model(double gamma, double alpha, double b_strip, int L, double t0, double Lambda,
                         double D, double eps_eval, double theta) {
  const double a = a_of_theta(gamma, alpha, b_strip, Lambda, D, theta);
  const double nu = kPi * b_strip * L * theta / (Lambda * t0 * a);
  const double disc = std::exp(-2.0 * kPi * b_strip * L / a + nu * Lambda * t0 * (1.0 - std::sin(alpha - b_strip)));
  const double trunc = std::exp(nu * (1.0 - std::sin(alpha) * std::cosh(a)) * gamma * (1.0 - D) * t0);
  const double peak = std::exp(nu * Lambda * t0 * (1.0 - std::sin(alpha)));
  return disc + trunc + eps_eval * peak;
}

double choose_theta_sharp(double gamma, double alpha, double b_strip, int L, double t0, double Lambda,
                          double D, double eps_eval) {
  auto f = [&](double th) {
    try {
      return sharp_error_model(gamma, alpha, b_strip, L, t0, Lambda, D, eps_eval, th);
    } catch (const InfeasibleError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  return minimise_1d(f, 0.01, 0.99, 490);
}

ContourParams choose_parameters(double gamma, double alpha, double b_strip, int L, double t0,
                                double Lambda, double D, double theta) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("choose_parameters: gamma must lie in (0,1)");
  if (!(D > 0.0 && D < 1.0)) throw InfeasibleError("choose_parameters: D must lie in (0,1)");
  if (!(Lambda >= 1.0)) throw ConfigError("choose_parameters: Lambda must be >= 1");
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("choose_parameters: theta must lie in (0,1)");
  if (!(alpha - b_strip > 0.0)) throw ConfigError("choose_parameters: need alpha > b_strip");
  if (L < 1) throw ConfigError("choose_parameters: L must be positive");
  ContourParams p;
  p.alpha = alpha;
  p.b_strip = b_strip;
  p.L = L;
  p.theta = theta;
  p.gamma_target = gamma;
  p.t0 = t0;
  p.Lambda = Lambda;
  p.D = D;
  p.a = a_of_theta(gamma, alpha, b_strip, Lambda, D, theta);
  p.tau = p.a / L;
  p.nu = kPi * b_strip * L * theta / (Lambda * t0 * p.a);
  p.predicted_error = std::exp(-2.0 * kPi * b_strip * L * (1.0 - theta) / p.a);
  return p;
}

ContourParams select_parameters(ThetaMode mode, double gamma, double alpha, double b_strip, int L,
                                double t0, double Lambda, double D, double eps_eval, double fixed_theta) {
  double theta = 0.5;
  switch (mode) {
    case ThetaMode::inverse_L: theta = 1.0 / L; break;
    case ThetaMode::fixed: theta = fixed_theta; break;
    case ThetaMode::bound:
      theta = choose_theta(
          L, [&](double th) { return a_of_theta(gamma, alpha, b_strip, Lambda, D, th); }, b_strip, eps_eval);
      break;
    case ThetaMode::sharp:
      theta = choose_theta_sharp(gamma, alpha, b_strip, L, t0, Lambda, D, eps_eval);
      break;
  }
  ContourParams p = choose_parameters(gamma, alpha, b_strip, L, t0, Lambda, D, theta);
  p.eps_eval = eps_eval;
  return p;
}

ContourParams heuristic_parameters(int level, double h, int n0, double B, const HeuristicScaling& sc,
                                   int L, double alpha, double b_strip) {
  if (level < 2) throw ConfigError("heuristic_parameters: level must be >= 2");
  if (!(B > 1.0)) throw ConfigError("heuristic_parameters: B must be > 1");
  if (!(sc.c0 > 0.0 && sc.c1 > 0.0)) throw ConfigError("heuristic_parameters: c0, c1 must be positive");
  const double T = h * n0 + 2.0 * h * std::pow(B, level + 1);
  if (!(T > 1.0)) throw InfeasibleError("heuristic_parameters: T_l <= 1 gives a nonpositive a_l");
  ContourParams p;
  p.alpha = alpha;
  p.b_strip = b_strip;
  p.L = L;
  p.nu = sc.c0 / T;
  p.a = sc.c1 * std::log(T);
  p.tau = p.a / L;
  p.t0 = h * (n0 + std::pow(B, level));
  p.Lambda = T / p.t0;
  p.theta = 0.0;
  p.predicted_error = std::exp(-2.0 * kPi * b_strip / p.tau);
  return p;
}

double xi_of(const ContourParams& p, double h, double nu0) {
  double xi = -h * nu0 * (1.0 - std::sin(p.alpha + p.b_strip) * std::cosh(p.a + 0.5 * p.tau));
  if (!(xi > 0.0)) throw InfeasibleError("xi_of: nonpositive strip width");
  return xi;
}

std::vector<QuadNode> quad_nodes(const ContourParams& p) {
  std::vector<QuadNode> out;
  out.reserve(2 * p.L + 1);
  for (int k = -p.L; k <= p.L; ++k) {
    auto [z, dz] = hyperbola(p.alpha, p.nu, cplx(k * p.tau, 0.0));
    out.push_back({z, p.tau * dz / (2.0 * kPi * kI)});
  }
  return out;
}

ContourWeight weights_via_contour(const KernelDescriptor& k, const ButcherTableau& tab,
                                  const ContourParams& p, double d, double h, int n) {
  ContourWeight out;
  out.omega = CRow::Zero(tab.s);
  out.in_window = n * h > d / p.gamma_target;
  for (const auto& nd : quad_nodes(p)) {
    StageSymbol sy = symbol(tab, h * nd.lambda);
    out.omega += (nd.weight * h * k.eval(nd.lambda, d) * ipow(sy.r, n)) * sy.q;
  }
  return out;
}

CMat weight_matrix_via_contour(const KernelDescriptor& k, const ButcherTableau& tab,
                               const ContourParams& p, double d, double h, int n) {
  if (n < 1) throw DomainError("weight_matrix_via_contour: n >= 1 required");
  CMat W = CMat::Zero(tab.s, tab.s);
  for (const auto& nd : quad_nodes(p)) {
    StageSymbol sy = symbol(tab, h * nd.lambda);
    W += (nd.weight * h * k.eval(nd.lambda, d) * ipow(sy.r, n - 1)) * (sy.v * sy.q);
  }
  return W;
}

namespace {
int m_of_mu(double mu) { return static_cast<int>(std::floor(mu)) + 1; }
}  // namespace

std::optional<double> truncation_bound(double mu, double c_hat, const ContourParams& p, double d,
                                       double h, int n, double gamma) {
  const int m = m_of_mu(mu);
  const double tnm = h * (n - m);
  if (!(gamma * tnm > d)) return std::nullopt;
  auto [za, dza] = hyperbola(p.alpha, p.nu, cplx(p.a, 0.0));
  (void)dza;
  const double re_phi_a = 1.0 - std::sin(p.alpha) * std::cosh(p.a);
  return c_hat * std::pow(std::abs(za), mu - m) * std::pow(h, -m) *
         std::exp(p.nu * re_phi_a * (gamma * tnm - d));
}

std::optional<double> total_bound(double mu, double c_hat, const ContourParams& p, double d, double h,
                                  int n, double gamma) {
  const int m = m_of_mu(mu);
  const double tnm = h * (n - m);
  if (!(gamma * tnm > d)) return std::nullopt;
  const double tn = h * n;
  const double first = h * std::exp(2.0 * tn * p.nu) / std::expm1(2.0 * kPi * p.b_strip / p.tau);
  const double second = (1.0 + p.tau) * std::pow(h * p.nu * std::cosh(p.a), -m) *
                        std::exp(p.nu * (1.0 - std::sin(p.alpha - p.b_strip) * std::cosh(p.a)) *
                                 (gamma * tnm - d));
  return c_hat * (first + second);
}

cplx integrate_gl(const std::function<cplx(double)>& f, double lo, double hi, int panels) {
  using G = boost::math::quadrature::gauss<double, 30>;
  const auto& xs = G::abscissa();
  const auto& ws = G::weights();
  cplx acc(0.0, 0.0);
  for (int p = 0; p < panels; ++p) {
    const double a = lo + (hi - lo) * p / panels, b = lo + (hi - lo) * (p + 1) / panels;
    const double m = 0.5 * (a + b), r = 0.5 * (b - a);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (xs[i] == 0.0) {
        acc += r * ws[i] * f(m);
      } else {
        acc += r * ws[i] * (f(m - r * xs[i]) + f(m + r * xs[i]));
      }
    }
  }
  return acc;
}

TrapezoidResult trapezoid_check(const std::function<cplx(cplx)>& f, double a, double b_strip, int L) {
  if (L < 1) throw ConfigError("trapezoid_check: L must be positive");
  const double tau = a / L;
  cplx IL(0.0, 0.0);
  for (int k = -L; k <= L; ++k) IL += f(cplx(k * tau, 0.0));
  IL *= tau;

  auto fr = [&](double x) { return f(cplx(x, 0.0)); };
  const int panels = 40 + 4 * L;
  cplx I = integrate_gl(fr, -a, a, panels);
  cplx Iext = integrate_gl(fr, -a - 0.5 * tau, a + 0.5 * tau, panels);

  // sup |f| over the closed rectangle [-a - tau, a + tau] x [-b, b], sampled
  double M = 0.0;
  const int nxs = 400, nys = 41;
  for (int i = 0; i <= nxs; ++i)
    for (int j = 0; j < nys; ++j) {
      double x = -a - tau + 2.0 * (a + tau) * i / nxs;
      double y = -b_strip + 2.0 * b_strip * j / (nys - 1);
      M = std::max(M, std::abs(f(cplx(x, y))));
    }
  double gsup = 0.0;
  for (int j = 0; j < 401; ++j) {
    double y = -b_strip + 2.0 * b_strip * j / 400.0;
    gsup = std::max(gsup, std::abs(f(cplx(a + 0.5 * tau, y)) - f(cplx(-a - 0.5 * tau, y))));
  }
  TrapezoidResult out;
  out.error = std::abs(I - IL);
  out.error_extended = std::abs(Iext - IL);
  out.bound = 2.0 * M / std::expm1(2.0 * kPi * b_strip / tau) + std::log(2.0) / kPi * tau * gsup;
  return out;
}

}  // namespace tailcq
