#include "tailcq/cqdirect.hpp"

#include <cmath>

#include <fftw3.h>

namespace tailcq {

CMat WeightFamily::matrix(int n, int p) const {
  CMat M(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) M(i, j) = at(n, p, i, j);
  return M;
}

namespace {

int next_pow2(long long v) {
  int m = 1;
  while (m < v) m <<= 1;
  return m;
}

// K_p(Delta/h) for a non-diagonalisable (or badly conditioned) sample: Cauchy integral on a
// circle around the spectrum, which stays in the right half plane for A-stable methods.
void matrix_function_contour(const SymbolFamily& fam, int P, const CMat& X, const CVec& eig,
                             std::vector<CMat>& out) {
  const int s = static_cast<int>(X.rows());
  cplx centre = eig.mean();
  double rad = 0.0;
  for (int i = 0; i < s; ++i) rad = std::max(rad, std::abs(eig(i) - centre));
  rad = std::max(2.0 * rad, 1e-3 * std::abs(centre));
  rad = std::min(rad, 0.9 * centre.real());
  const int q = 128;
  std::vector<cplx> vals(P);
  for (int p = 0; p < P; ++p) out[p] = CMat::Zero(s, s);
  for (int k = 0; k < q; ++k) {
    cplx e = std::polar(1.0, 2.0 * kPi * k / q);
    cplx z = centre + rad * e;
    CMat R = (z * CMat::Identity(s, s) - X).inverse();
    fam(z, vals.data());
    for (int p = 0; p < P; ++p) out[p] += (vals[p] * rad * e / double(q)) * R;
  }
}

}  // namespace

WeightFamily weights_fft_family(const SymbolFamily& fam, int P, const ButcherTableau& tab, double h,
                                int N, const FftOptions& opt) {
  if (N < 0) throw ConfigError("weights_fft: N must be nonnegative");
  if (opt.oversample < 2) throw ConfigError("weights_fft: oversample must be >= 2");
  const int s = tab.s;
  const int Mf = next_pow2(static_cast<long long>(opt.oversample) * (N + 1));
  double R = opt.radius;
  if (R == 0.0) R = std::pow(opt.eps_target, 1.0 / (double(opt.oversample) * std::max(N, 1)));
  if (!(R > 0.0 && R < 1.0)) throw ConfigError("weights_fft: radius must lie in (0,1)");

  const std::size_t blk = std::size_t(P) * s * s;
  fftw_complex* buf = fftw_alloc_complex(blk * Mf);
  auto* data = reinterpret_cast<cplx*>(buf);

  WeightFamily out;
  out.s = s;
  out.P = P;
  out.N = N;
  out.h = h;
  std::vector<cplx> vals(P);
  std::vector<CMat> fb(P);
  for (int m = 0; m < Mf; ++m) {
    cplx zeta = std::polar(R, 2.0 * kPi * m / Mf);
    CMat X = delta(tab, zeta) / h;
    Eigen::ComplexEigenSolver<CMat> es(X);
    const CMat& V = es.eigenvectors();
    Eigen::PartialPivLU<CMat> lu(V);
    cplx* dst = data + std::size_t(m) * blk;
    if (lu.rcond() > 1e-10) {
      CMat Vinv = lu.inverse();
      std::vector<std::vector<cplx>> kv(s, std::vector<cplx>(P));
      for (int i = 0; i < s; ++i) fam(es.eigenvalues()(i), kv[i].data());
      for (int p = 0; p < P; ++p)
        for (int i = 0; i < s; ++i)
          for (int j = 0; j < s; ++j) {
            cplx acc(0.0, 0.0);
            for (int l = 0; l < s; ++l) acc += V(i, l) * kv[l][p] * Vinv(l, j);
            dst[(std::size_t(p) * s + i) * s + j] = acc;
          }
    } else {
      ++out.fallbacks;
      matrix_function_contour(fam, P, X, es.eigenvalues(), fb);
      for (int p = 0; p < P; ++p)
        for (int i = 0; i < s; ++i)
          for (int j = 0; j < s; ++j) dst[(std::size_t(p) * s + i) * s + j] = fb[p](i, j);
    }
  }

  int n_[1] = {Mf};
  fftw_plan plan = fftw_plan_many_dft(1, n_, static_cast<int>(blk), buf, nullptr, static_cast<int>(blk), 1,
                                      buf, nullptr, static_cast<int>(blk), 1, FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  out.data.resize(blk * (N + 1));
  double scale = 1.0 / Mf;
  for (int n = 0; n <= N; ++n) {
    for (std::size_t e = 0; e < blk; ++e) out.data[std::size_t(n) * blk + e] = data[std::size_t(n) * blk + e] * scale;
    scale /= R;
  }
  fftw_free(buf);
  return out;
}

WeightTable weights_fft(const KernelDescriptor& k, const ButcherTableau& tab, double h, int N, double d,
                        const FftOptions& opt) {
  auto fam = [&](cplx lambda, cplx* out) { out[0] = k.eval(lambda, d); };
  WeightFamily f = weights_fft_family(fam, 1, tab, h, N, opt);
  WeightTable w;
  w.h = h;
  w.d = d;
  w.W.reserve(N + 1);
  for (int n = 0; n <= N; ++n) w.W.push_back(f.matrix(n, 0));
  return w;
}

CMat stage_samples(const ButcherTableau& tab, double h, int N, const std::function<double(double)>& g) {
  CMat G(tab.s, N);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < tab.s; ++i) G(i, j) = g(h * (j + tab.c(i)));
  return G;
}

std::vector<double> conv_direct(const WeightTable& w, const CMat& g_stages) {
  const int len = static_cast<int>(g_stages.cols());
  if (len > w.N() + 1) throw ConfigError("conv_direct: more data than weights");
  std::vector<CRow> om(len);
  for (int n = 0; n < len; ++n) om[n] = w.omega(n);
  std::vector<double> u(len);
  for (int n = 0; n < len; ++n) {
    cplx acc(0.0, 0.0);
    for (int j = 0; j <= n; ++j) acc += (om[n - j] * g_stages.col(j))(0);
    u[n] = acc.real();
  }
  return u;
}

std::vector<CVec> conv_direct_operator(const std::vector<CMat>& W, const std::vector<CVec>& phi) {
  if (phi.size() > W.size()) throw ConfigError("conv_direct_operator: more densities than weights");
  std::vector<CVec> out(phi.size());
  for (std::size_t n = 0; n < phi.size(); ++n) {
    if (W[n].cols() != phi[n].size()) throw ConfigError("conv_direct_operator: dimension mismatch");
    CVec acc = CVec::Zero(W[0].rows());
    for (std::size_t j = 0; j <= n; ++j) acc += W[n - j] * phi[j];
    out[n] = acc;
  }
  return out;
}

}  // namespace tailcq
