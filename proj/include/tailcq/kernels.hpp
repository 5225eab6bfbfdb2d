#pragma once

#include <functional>

#include "tailcq/common.hpp"

namespace tailcq {

// Modified Bessel K_0, principal branch. Defined off the closed negative real axis.
cplx bessel_k0(cplx z);
// exp(z) K_0(z) for Re z >= 0; avoids underflow for large |z|.
cplx bessel_k0_scaled(cplx z);
cplx bessel_i0(cplx z);

// lambda * sqrt(1 + alpha/lambda): the branch of sqrt(lambda^2 + alpha*lambda) that is
// analytic off [-alpha, 0] and behaves like lambda + alpha/2 at infinity.
cplx damped_sqrt(cplx lambda, double alpha_damp);

cplx transfer_2d(cplx lambda, double d, double alpha_damp);
cplx transfer_3d(cplx lambda, double d, double alpha_damp);

struct KernelDescriptor {
  std::function<cplx(cplx, double)> eval;
  double mu = 0.0;
  double delta_sector = 0.1;
  bool shift_sectorial = true;
  std::function<double(double)> c_of_d;  // optional
  double d = 0.0;                        // distance the descriptor was built for, if any
  std::string name;
};

KernelDescriptor scalar_k0_kernel(double d);
KernelDescriptor wave2d_kernel(double alpha_damp);
KernelDescriptor wave3d_kernel(double alpha_damp);

struct SectorCheck {
  double c_hat = 0.0;      // calibrated surrogate for C(d)
  double worst = 0.0;      // max over samples of |e^{lambda d} K| |lambda|^{-mu} / c_hat
  double worst_right = 0.0;  // same for |K| |lambda|^{-mu} on Re lambda > 0
  bool ok = false;
};

// Calibrates c_hat = safety * max_{|lambda|=1} |e^{lambda d} K(lambda,d)| on the test rays, then
// samples both shifted-sectorial and right half-plane bounds for |lambda| in [1e-2, 1e4].
SectorCheck check_sectorial(const KernelDescriptor& k, double d, double safety = 4.0);

// Calibrated constant used by the bound evaluators (value at |lambda| = 1 times 2).
double calibrate_c_hat(const KernelDescriptor& k, double d, double safety = 2.0);

}  // namespace tailcq
