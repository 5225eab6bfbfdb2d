#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tailcq/common.hpp"
#include "tailcq/kernels.hpp"
#include "tailcq/rk.hpp"

namespace tailcq {

struct ContourParams {
  double alpha = 0.9;
  double b_strip = 0.6;
  double nu = 1.0;
  double a = 1.0;
  int L = 15;
  double tau = 1.0 / 15.0;
  double theta = 0.5;
  double gamma_target = 0.8;
  double xi = 0.0;
  double t0 = 1.0;
  double Lambda = 1.0;
  double D = 0.0;
  double eps_eval = 0.0;
  double predicted_error = 0.0;  // exp(-2 pi b L (1 - theta) / a)
};

// nu*phi(x), nu*phi'(x) with phi(x) = 1 - sin(alpha - i x); x may be complex (strip points).
std::pair<cplx, cplx> hyperbola(double alpha, double nu, cplx x);

enum class ThetaMode { bound, inverse_L, sharp, fixed };
ThetaMode parse_theta_mode(const std::string& s);
std::string to_string(ThetaMode m);

// a(theta) from the error-balance relation; throws InfeasibleError when the arccosh argument is < 1.
double a_of_theta(double gamma, double alpha, double b_strip, double Lambda, double D, double theta);

// Round-off aware two-term estimate eps * e(theta)^{-theta/2} + e(theta)^{1-theta},
// e(theta) = exp(-2 pi b L / a(theta)).
double theta_bound(int L, double a, double b_strip, double eps_eval, double theta);

double choose_theta(int L, const std::function<double(double)>& a_of, double b_strip, double eps_eval);

// Error model that keeps the actual growth rates instead of the |r| <= e^{2z} estimate:
// discretisation exp(-2 pi b L / a) * exp(nu Lambda t0 (1 - sin(alpha - b))),
// truncation exp(nu (1 - sin(alpha) cosh a) gamma (1 - D) t0), and round-off eps * peak.
double sharp_error_model(double gamma, double alpha, double b_strip, int L, double t0, double Lambda,
                         double D, double eps_eval, double theta);
double choose_theta_sharp(double gamma, double alpha, double b_strip, int L, double t0, double Lambda,
                          double D, double eps_eval);

ContourParams choose_parameters(double gamma, double alpha, double b_strip, int L, double t0,
                                double Lambda, double D, double theta);

// Selects theta by `mode` and then applies choose_parameters.
ContourParams select_parameters(ThetaMode mode, double gamma, double alpha, double b_strip, int L,
                                double t0, double Lambda, double D, double eps_eval,
                                double fixed_theta = 0.75);

struct HeuristicScaling {
  double c0 = 2.5;
  double c1 = 1.0;
  double B = 5.0;
};

ContourParams heuristic_parameters(int level, double h, int n0, double B, const HeuristicScaling& sc,
                                   int L, double alpha, double b_strip = 0.6);

double xi_of(const ContourParams& p, double h, double nu0);

struct QuadNode {
  cplx lambda;
  cplx weight;  // tau * nu * phi'(x_k) / (2 pi i)
};
std::vector<QuadNode> quad_nodes(const ContourParams& p);

struct ContourWeight {
  CRow omega;
  bool in_window = true;  // false when t_n <= d / gamma (bound not guaranteed)
};

ContourWeight weights_via_contour(const KernelDescriptor& k, const ButcherTableau& tab,
                                  const ContourParams& p, double d, double h, int n);

// Full s x s matrix sum_k w_k h K(lambda_k) E_n(h lambda_k), n >= 1.
CMat weight_matrix_via_contour(const KernelDescriptor& k, const ButcherTableau& tab,
                               const ContourParams& p, double d, double h, int n);

// Truncation estimate; empty when t_{n-m} <= d / gamma.
std::optional<double> truncation_bound(double mu, double c_hat, const ContourParams& p, double d,
                                       double h, int n, double gamma);
std::optional<double> total_bound(double mu, double c_hat, const ContourParams& p, double d, double h,
                                  int n, double gamma);

struct TrapezoidResult {
  double error = 0.0;           // |I - I_L| with I over [-a, a]
  double error_extended = 0.0;  // |I - I_L| with I over [-a - tau/2, a + tau/2]
  double bound = 0.0;
};

TrapezoidResult trapezoid_check(const std::function<cplx(cplx)>& f, double a, double b_strip, int L);

// Composite Gauss-Legendre integral of f over [lo, hi]; used by several oracles.
cplx integrate_gl(const std::function<cplx(double)>& f, double lo, double hi, int panels);

}  // namespace tailcq
