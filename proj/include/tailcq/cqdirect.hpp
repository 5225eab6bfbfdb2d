#pragma once

#include <functional>
#include <vector>

#include "tailcq/common.hpp"
#include "tailcq/kernels.hpp"
#include "tailcq/rk.hpp"

namespace tailcq {

struct WeightTable {
  double h = 0.0;
  double d = 0.0;
  std::vector<CMat> W;  // W_0 .. W_N, each s x s
  CRow omega(int n) const { return W.at(n).row(W.at(n).rows() - 1); }
  int N() const { return static_cast<int>(W.size()) - 1; }
};

struct FftOptions {
  double radius = 0.0;     // 0: eps_target^{1/(oversample N)}
  int oversample = 2;      // M_f = next power of two >= oversample (N+1)
  double eps_target = 1e-14;
};

// Weights for P scalar transfer functions sharing the same sample points. The family writes
// K_p(lambda) for p = 0..P-1 into out[p]. Result index: [n][p] -> s x s matrix.
using SymbolFamily = std::function<void(cplx lambda, cplx* out)>;

struct WeightFamily {
  int s = 0;
  int P = 0;
  int N = 0;
  double h = 0.0;
  std::vector<cplx> data;  // ((n * P + p) * s + i) * s + j
  int fallbacks = 0;       // samples that needed the contour matrix-function fallback

  cplx at(int n, int p, int i, int j) const { return data[((std::size_t(n) * P + p) * s + i) * s + j]; }
  CMat matrix(int n, int p) const;
};

WeightFamily weights_fft_family(const SymbolFamily& fam, int P, const ButcherTableau& tab, double h,
                                int N, const FftOptions& opt = {});

WeightTable weights_fft(const KernelDescriptor& k, const ButcherTableau& tab, double h, int N, double d,
                        const FftOptions& opt = {});

// Stage values g(t_j + c_i h), j = 0..N-1, as columns of an s x N matrix.
CMat stage_samples(const ButcherTableau& tab, double h, int N, const std::function<double(double)>& g);

// u_{n+1} = sum_{j<=n} omega_{n-j} g_j for n = 0..len-1 (real part).
std::vector<double> conv_direct(const WeightTable& w, const CMat& g_stages);

// h_n = sum_{j<=n} W_{n-j} phi_j with conforming matrices.
std::vector<CVec> conv_direct_operator(const std::vector<CMat>& W, const std::vector<CVec>& phi);

}  // namespace tailcq
