#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tailcq/common.hpp"
#include "tailcq/cqdirect.hpp"
#include "tailcq/oblivious.hpp"
#include "tailcq/rk.hpp"

namespace tailcq {

// Uniform mesh of the unit circle; patch i is the arc [2 pi i / M, 2 pi (i+1) / M).
struct DiskMesh {
  int M = 0;
  double arc = 0.0;  // 2 pi / M
  double midpoint_angle(int i) const { return arc * (i + 0.5); }
  // Chordal distance between midpoints of patches i and j; depends on (i - j) mod M only.
  double dist(int i, int j) const;
  double dist_shift(int m) const;
};

DiskMesh disk_mesh(int M);

struct DistanceClasses {
  double d1 = 0.0;
  std::vector<char> near;  // near[m] = 1 if dist_shift(m) <= d1, m = 0..M-1 (circulant mask)
  double d_near = 0.0;     // validity radius used for the class-1 contour (d1 + patch chord)
  double d_far = 2.0;      // diameter of the unit disk
  bool mask1(int i, int j, int M) const { return near[((i - j) % M + M) % M] != 0; }
};

DistanceClasses distance_classes(const DiskMesh& mesh, double d1);

enum class MaskSel { all, near, far };

// First column v_m, m = 0..M-1, of the circulant Galerkin matrix
// V(lambda)_{lk} = int int (1/2pi) K0(sqrt(lambda^2 + alpha lambda)|x-y|) b_k(y) b_l(x).
CVec circulant_row(const DiskMesh& mesh, cplx lambda, double alpha_damp);

// Dense M x M matrix; entries outside the selected class are zero.
CMat assemble_frequency(const DiskMesh& mesh, cplx lambda, double alpha_damp, const DistanceClasses* cls = nullptr,
                        MaskSel sel = MaskSel::all);

// Eigenvalues mu_p = sum_m v_m exp(-2 pi i p m / M) of a circulant with first column v.
CVec circulant_eigs(const CVec& v);

// Fourier-space symbol family for one class: out[p] = mu_p(lambda).
SymbolFamily bem_symbol_family(const DiskMesh& mesh, double alpha_damp, const DistanceClasses* cls, MaskSel sel);

// CQ weights for the class; entry [n][p] is the s x s weight of Fourier mode p.
WeightFamily weight_operator_table(const DiskMesh& mesh, const ButcherTableau& tab, double h, int N_local,
                                   double alpha_damp, const DistanceClasses* cls, MaskSel sel,
                                   const FftOptions& opt = {});

// Physical-space stage-blocked matrix (s M x s M) for W_n; row index i*M + l (stage i, patch l).
CMat physical_weight(const WeightFamily& w, int n);

// Single-layer potential of patch k evaluated at a point: int_{Gamma_k} (1/2pi) K0(s|x - y|) dGamma_y.
CVec potential_row(const DiskMesh& mesh, cplx lambda, double alpha_damp, double px, double py);

// CQ weights of the potential at (px, py); entry [n][k] couples the patch-k density to u.
WeightFamily potential_weights(const DiskMesh& mesh, const ButcherTableau& tab, double h, int N, double alpha_damp,
                               double px, double py, const FftOptions& opt = {});

enum class MarchMode { direct, oblivious };

struct BemConfig {
  int M = 100;
  int N = 400;
  double T = 40.0;
  double alpha_damp = 0.0;
  double d1 = 1.4142135623730951;
  std::string tableau = "radau_iia_3";
  ObliviousConfig obl{};
  FftOptions fft{0.0, 4, 1e-14};
  double obs_x = 0.0;
  double obs_y = 1.0;
};

ObliviousConfig bem_default_oblivious();

struct BemResult {
  std::vector<double> t;          // t_1 .. t_N
  std::vector<double> u;          // observable at t_n
  std::vector<Eigen::VectorXd> phi;  // last-stage density per patch at t_n
  double max_spread = 0.0;        // max_n (max_l phi - min_l phi) / max |phi_n|
  std::vector<Counters> counters;  // one per distance class in oblivious mode
  std::vector<std::string> warnings;
};

using SpaceTimeData = std::function<double(double t, double x, double y)>;

// Implicit CQ march  W_0 phi_n = g_n - sum_{j<n} W_{n-j} phi_j  in Fourier space.
// pot may carry precomputed potential weights (N - 1 lags) to share them between runs.
BemResult march(const DiskMesh& mesh, const ButcherTableau& tab, const SpaceTimeData& g, const BemConfig& cfg,
                MarchMode mode, const WeightFamily* pot = nullptr);

// Galerkin load vector: s x M matrix of int_{Gamma_l} g(t_j + c_i h, x) dGamma_x.
CMat galerkin_load(const DiskMesh& mesh, const ButcherTableau& tab, double h, int j, const SpaceTimeData& g);

}  // namespace tailcq
