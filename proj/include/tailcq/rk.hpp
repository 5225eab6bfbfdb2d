#pragma once

#include <string>

#include "tailcq/common.hpp"

namespace tailcq {

struct ButcherTableau {
  RMat A;
  RVec b;
  RVec c;
  int s = 0;
  int p = 0;      // classical order
  int q_ord = 0;  // stage order
  std::string name;
};

// backward_euler, radau_iia_2, radau_iia_3
ButcherTableau make_tableau(const std::string& name);

// Everything the CQ algebra needs at one point z = h*lambda.
//   r = 1 + z b^T (I - zA)^{-1} 1
//   q = b^T (I - zA)^{-1}
//   v = (I - zA)^{-1} 1      (last entry equals r when stiffly accurate)
struct StageSymbol {
  cplx z;
  cplx r;
  CRow q;
  CVec v;
};

StageSymbol symbol(const ButcherTableau& tab, cplx z);

cplx stability(const ButcherTableau& tab, cplx z);
CRow q_vector(const ButcherTableau& tab, cplx z);
CMat delta(const ButcherTableau& tab, cplx zeta);
CRow e_n(const ButcherTableau& tab, cplx z, int n);
CMat E_n(const ButcherTableau& tab, cplx z, int n);

// x^m by repeated squaring, m >= 0.
cplx ipow(cplx x, long long m);

struct GammaGrid {
  int nx = 60;          // samples in Re z across [-xi, -x_gap]
  int ny = 240;         // log samples in Im z over [y_min, y_max]
  double y_min = 1e-4;
  double y_max = 1e4;
  double x_gap = 1e-6;  // Re z in (-x_gap, 0) is excluded (0/0 limit)
  int refine_sweeps = 4;
};

double gamma_of_xi(const ButcherTableau& tab, double xi, const GammaGrid& grid = {});

struct ContractivityProfile {
  double xi;
  double gamma;
  double rho;
};

// Sampled check of |r(z)| <= exp(2 Re z) on [0, rho] x [-y_max, y_max].
bool rho_sample_ok(const ButcherTableau& tab, double rho, int nx = 200, int ny = 200,
                   double y_max = 50.0);
double rho_of(const ButcherTableau& tab);

// y+ = r(h lambda) y + h q(h lambda) g_stages, where g_stages is s x dim.
CVec rk_ode_step(const ButcherTableau& tab, double h, cplx lambda, const CVec& y,
                 const CMat& g_stages);
CVec rk_ode_step(const StageSymbol& sym, double h, const CVec& y, const CMat& g_stages);

}  // namespace tailcq
