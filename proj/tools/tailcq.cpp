// Experiment runner: gamma table, weight errors per bucket, scalar convolution and the disk BEM study.
#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "tailcq/bem.hpp"
#include "tailcq/config.hpp"
#include "tailcq/contour.hpp"
#include "tailcq/cqdirect.hpp"
#include "tailcq/kernels.hpp"
#include "tailcq/oblivious.hpp"
#include "tailcq/rk.hpp"

using namespace tailcq;

namespace {

struct AccuracyFailure : Error {
  using Error::Error;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

KernelDescriptor kernel_from(const Config& c) {
  const std::string k = c.str("kernel");
  if (k == "k0") return scalar_k0_kernel(c.real("d"));
  if (k == "wave2d") return wave2d_kernel(c.real("alpha_damp"));
  return wave3d_kernel(c.real("alpha_damp"));
}

ObliviousConfig oblivious_from(const Config& c) {
  ObliviousConfig o;
  o.L = static_cast<int>(c.integer("L"));
  o.B = c.real("B");
  o.gamma = c.real("gamma");
  o.alpha = c.real("alpha");
  o.b_strip = c.real("b_strip");
  o.theta_mode = parse_theta_mode(c.str("theta_mode"));
  o.theta = c.real("theta");
  o.eps_eval = c.real("eps_eval");
  if (c.has("n0")) o.n0 = static_cast<int>(c.integer("n0"));
  if (c.has("strategy")) o.strategy = c.str("strategy") == "heuristic" ? LevelStrategy::heuristic : LevelStrategy::corollary;
  o.local_fft.oversample = static_cast<int>(c.integer("oversample"));
  return o;
}

// Table values for the self check (method, xi, gamma).
struct GammaRow {
  const char* method;
  double xi;
  double gamma;
};
constexpr GammaRow kGammaTable[] = {
    {"backward_euler", 1.0, 0.69}, {"backward_euler", 0.5, 0.811}, {"radau_iia_2", 1.0, 0.90},
    {"radau_iia_2", 0.5, 0.984},   {"radau_iia_3", 1.0, 0.94},     {"radau_iia_3", 0.5, 0.997},
};

int cmd_gamma_table(const Config& c, std::ostream& out) {
  std::stringstream ms(c.str("methods"));
  std::string m;
  bool ok = true;
  const double tol = c.real("tol") > 0.0 ? c.real("tol") : 5e-3;
  out << "method,xi,gamma\n";
  while (std::getline(ms, m, ',')) {
    ButcherTableau tab = make_tableau(m);
    for (double xi : c.reals("xi")) {
      const double g = gamma_of_xi(tab, xi);
      out << m << "," << fmt(xi) << "," << fmt(g) << "\n";
      for (const auto& r : kGammaTable)
        if (m == r.method && xi == r.xi && std::abs(g - r.gamma) > tol) ok = false;
    }
  }
  if (c.flag("self_check") && !ok) throw AccuracyFailure("gamma-table: value outside tolerance of the reference table");
  return 0;
}

int cmd_weights_error(const Config& c, std::ostream& out) {
  const ButcherTableau tab = make_tableau(c.str("tableau"));
  const KernelDescriptor k = kernel_from(c);
  const double d = c.real("d"), h = c.real("h");
  const ObliviousConfig oc = oblivious_from(c);
  const int n0 = oc.n0 >= 0 ? oc.n0 : offset_n0(d, h, oc.gamma);
  const BucketSchedule sch = make_schedule(n0, oc.B, h);
  const int B = static_cast<int>(oc.B);
  const int ell_min = static_cast<int>(c.integer("ell_min"));
  int ell_max = static_cast<int>(c.integer("ell_max"));
  if (ell_max == 0) ell_max = B <= 5 ? 8 : 6;
  const long long samples = c.integer("samples");
  const long long cap = c.integer("fft_cap");

  // bucket for level l: n in [n0 + B^l, n0 + 2 B^{l+1}]
  auto lo_of = [&](int l) { return n0 + static_cast<long long>(std::llround(std::pow(B, l))); };
  auto hi_of = [&](int l) { return n0 + 2 * static_cast<long long>(std::llround(std::pow(B, l + 1))); };
  long long fft_n = 0;
  for (int l = ell_min; l <= ell_max; ++l)
    if (hi_of(l) <= cap) fft_n = std::max(fft_n, hi_of(l));
  FftOptions fo;
  fo.oversample = static_cast<int>(c.integer("oversample"));
  WeightTable ref;
  if (fft_n > 0) ref = weights_fft(k, tab, h, static_cast<int>(fft_n), d, fo);

  // Contour parameters for the weights under test (checked for feasibility before any output row).
  std::vector<ContourParams> params;
  for (int l = ell_min; l <= ell_max; ++l) params.push_back(level_contour(l, sch, d, oc));

  out << "ell,n,t,abs_err,rel_err\n";
  double worst = 0.0;
  for (int l = ell_min; l <= ell_max; ++l) {
    const ContourParams& p = params[l - ell_min];
    const long long lo = lo_of(l), hi = hi_of(l);
    std::unique_ptr<ContourParams> refp;
    if (hi > cap) {
      ObliviousConfig rc = oc;
      rc.L = static_cast<int>(c.integer("ref_L"));
      refp = std::make_unique<ContourParams>(level_contour(l, sch, d, rc));
    }
    std::vector<long long> ns;
    if (hi - lo + 1 <= samples) {
      for (long long n = lo; n <= hi; ++n) ns.push_back(n);
    } else {
      // geometric spacing across the bucket
      for (long long i = 0; i < samples; ++i) {
        const double f = double(i) / double(samples - 1);
        const long long n = std::min(hi, static_cast<long long>(std::llround(lo * std::pow(double(hi) / lo, f))));
        if (ns.empty() || n > ns.back()) ns.push_back(n);
      }
    }
    for (long long n : ns) {
      const CRow w = weights_via_contour(k, tab, p, d, h, static_cast<int>(n)).omega;
      const CRow r = refp ? weights_via_contour(k, tab, *refp, d, h, static_cast<int>(n)).omega : ref.omega(static_cast<int>(n));
      const double ae = (w - r).cwiseAbs().maxCoeff();
      const double scale = r.cwiseAbs().maxCoeff();
      const double re = scale > 0.0 ? ae / scale : ae;
      worst = std::max(worst, re);
      out << l << "," << n << "," << fmt(h * n) << "," << fmt(ae) << "," << fmt(re) << "\n";
    }
  }
  const double tol = c.real("tol");
  if (c.flag("self_check") && tol > 0.0 && worst > tol)
    throw AccuracyFailure("weights-error: max relative error " + fmt(worst) + " exceeds tol");
  return 0;
}

int cmd_conv_scalar(const Config& c, std::ostream& out) {
  const ButcherTableau tab = make_tableau(c.str("tableau"));
  const KernelDescriptor k = kernel_from(c);
  const double d = c.real("d"), h = c.real("h");
  const int N = static_cast<int>(c.integer("N"));
  const ObliviousConfig oc = oblivious_from(c);
  auto g = [](double t) { return t * t * t * t * std::exp(-2.0 * t); };

  ScalarRun fast = oblivious_convolve(k, tab, h, N, d, g, oc);
  FftOptions fo;
  fo.oversample = static_cast<int>(c.integer("oversample"));
  const WeightTable w = weights_fft(k, tab, h, N - 1, d, fo);
  const std::vector<double> ref = conv_direct(w, stage_samples(tab, h, N, g));

  out << "n,t,u_direct,u_oblivious,abs_err\n";
  double sup = 0.0;
  for (int n = 0; n < N; ++n) {
    const double e = std::abs(fast.u[n] - ref[n]);
    sup = std::max(sup, e);
    out << n + 1 << "," << fmt(h * (n + 1)) << "," << fmt(ref[n]) << "," << fmt(fast.u[n]) << "," << fmt(e) << "\n";
  }
  const int n0 = oc.n0 >= 0 ? oc.n0 : offset_n0(d, h, oc.gamma);
  const int nl = make_schedule(n0, oc.B, h).N_levels(N);
  const long long eval_bound = static_cast<long long>(2 * oc.L + 1) * nl;
  const long long state_bound = 3 * eval_bound;
  out << "# sup_err = " << fmt(sup) << "\n";
  out << "# kernel_evals = " << fast.counters.kernel_evals << " (bound " << eval_bound << ", direct weights " << N << ")\n";
  out << "# max_resident_states = " << fast.counters.max_resident_states << " (bound " << state_bound << ")\n";
  out << "# n0 = " << n0 << ", N_levels = " << nl << "\n";
  for (const auto& wmsg : fast.warnings) out << "# warning: " << wmsg << "\n";
  if (c.flag("self_check")) {
    const double tol = c.real("tol");
    if (tol > 0.0 && sup > tol) throw AccuracyFailure("conv-scalar: sup error " + fmt(sup) + " exceeds tol");
    if (fast.counters.kernel_evals > eval_bound || fast.counters.max_resident_states > state_bound)
      throw AccuracyFailure("conv-scalar: complexity counters exceed their bounds");
  }
  return 0;
}

int cmd_bem_disk(const Config& c, std::ostream& out) {
  const ButcherTableau tab = make_tableau(c.str("tableau"));
  const DiskMesh mesh = disk_mesh(static_cast<int>(c.integer("M")));
  BemConfig bc;
  bc.M = mesh.M;
  bc.N = static_cast<int>(c.integer("N"));
  bc.T = c.real("T");
  bc.alpha_damp = c.real("alpha_damp");
  bc.d1 = c.real("d1");
  bc.tableau = c.str("tableau");
  bc.obl = oblivious_from(c);
  bc.fft.oversample = static_cast<int>(c.integer("oversample"));
  bc.obs_x = c.real("obs_x");
  bc.obs_y = c.real("obs_y");
  auto g = [](double t, double, double) { return t * t * t * t * std::exp(-2.0 * t); };

  std::vector<long long> Ls = c.integers("sweep_L");
  std::vector<double> gs = c.reals("sweep_gamma");
  const bool sweep = !Ls.empty() || !gs.empty();
  if (Ls.empty()) Ls.push_back(bc.obl.L);
  if (gs.empty()) gs.push_back(bc.obl.gamma);

  // Contour feasibility for every requested run before the expensive reference.
  const double h = bc.T / bc.N;
  const DistanceClasses cls = distance_classes(mesh, bc.d1);
  for (long long L : Ls)
    for (double gm : gs) {
      ObliviousConfig o = bc.obl;
      o.L = static_cast<int>(L);
      o.gamma = gm;
      for (double dd : {cls.d_near, cls.d_far}) {
        const BucketSchedule sch = make_schedule(offset_n0(dd, h, gm), o.B, h);
        for (int l = 2; l <= sch.top_level(bc.N); ++l) (void)level_contour(l, sch, dd, o);
      }
    }

  const WeightFamily pot = potential_weights(mesh, tab, h, bc.N - 1, bc.alpha_damp, bc.obs_x, bc.obs_y, bc.fft);
  const BemResult ref = march(mesh, tab, g, bc, MarchMode::direct, &pot);
  double worst_spread = ref.max_spread;
  double last_err = 0.0;

  if (sweep) out << "L,gamma,sup_err\n";
  for (double gm : gs)
    for (long long L : Ls) {
      BemConfig run = bc;
      run.obl.L = static_cast<int>(L);
      run.obl.gamma = gm;
      const BemResult fast = march(mesh, tab, g, run, MarchMode::oblivious, &pot);
      worst_spread = std::max(worst_spread, fast.max_spread);
      double sup = 0.0;
      for (int n = 0; n < bc.N; ++n) sup = std::max(sup, std::abs(fast.u[n] - ref.u[n]));
      last_err = sup;
      if (sweep) {
        out << L << "," << fmt(gm) << "," << fmt(sup) << "\n";
      } else {
        out << "n,t,u_ref,u_fast,abs_err\n";
        for (int n = 0; n < bc.N; ++n)
          out << n + 1 << "," << fmt(ref.t[n]) << "," << fmt(ref.u[n]) << "," << fmt(fast.u[n]) << ","
              << fmt(std::abs(fast.u[n] - ref.u[n])) << "\n";
        out << "# sup_err = " << fmt(sup) << "\n";
        out << "# kernel_evals = " << fast.counters[0].kernel_evals << "," << fast.counters[1].kernel_evals << "\n";
        out << "# max_resident_states = " << fast.counters[0].max_resident_states << ","
            << fast.counters[1].max_resident_states << "\n";
      }
      for (const auto& wmsg : fast.warnings) out << "# warning: " << wmsg << "\n";
    }
  out << "# max_spread = " << fmt(worst_spread) << "\n";
  if (c.flag("self_check")) {
    if (!(worst_spread <= 1e-8)) throw AccuracyFailure("bem-disk: density is not space independent");
    const double tol = c.real("tol");
    if (tol > 0.0 && last_err > tol) throw AccuracyFailure("bem-disk: sup error " + fmt(last_err) + " exceeds tol");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tailcq: convolution quadrature experiments"};
  app.require_subcommand(1, 1);
  std::string cfg_file;
  std::vector<std::string> overrides;
  const char* names[] = {"gamma-table", "weights-error", "conv-scalar", "bem-disk"};
  for (const char* n : names) {
    auto* sub = app.add_subcommand(n);
    sub->add_option("--config", cfg_file, "key=value file");
    sub->add_option("overrides", overrides, "key=value overrides");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  const std::string name = app.get_subcommands().front()->get_name();

  try {
    Config c = Config::defaults_for(name);
    if (!cfg_file.empty()) c.load_file(cfg_file);
    for (const auto& o : overrides) c.apply_override(o);
    validate(c);

    std::ofstream file;
    const std::string path = c.str("output");
    if (path != "-") {
      file.open(path);
      if (!file) throw ConfigError("cannot open output '" + path + "'");
    }
    std::ostream& out = path == "-" ? std::cout : file;
    c.echo(out);
    if (name == "gamma-table") return cmd_gamma_table(c, out);
    if (name == "weights-error") return cmd_weights_error(c, out);
    if (name == "conv-scalar") return cmd_conv_scalar(c, out);
    return cmd_bem_disk(c, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible parameters: " << e.what() << "\n";
    return 3;
  } catch (const AccuracyFailure& e) {
    std::cerr << "self check failed: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
