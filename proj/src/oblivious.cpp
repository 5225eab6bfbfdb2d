#include "tailcq/oblivious.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace tailcq {

namespace {

long long ipow_ll(long long b, int e) {
  long long r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

double cached_rho(const ButcherTableau& tab) {
  static std::mutex mu;
  static std::map<std::string, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(tab.name);
  if (it != cache.end()) return it->second;
  double r = rho_of(tab);
  cache[tab.name] = r;
  return r;
}

}  // namespace

long long BucketSchedule::b(int ell, long long n) const {
  const long long big = ipow_ll(B, ell + 1);
  const long long v = big * (floor_div(n - n0, big) - 1);
  return v > 0 ? v : 0;
}

int BucketSchedule::top_level(long long n) const {
  int top = 1;
  for (int ell = 2; ell < 60; ++ell) {
    if (b(ell - 1, n) > 0)
      top = ell;
    else
      break;
  }
  return top;
}

int BucketSchedule::N_levels(long long n) const {
  long long bound = n0 + 1 + B;
  int N = 1;
  while (!(n < bound)) {
    ++N;
    bound += ipow_ll(B, N);
  }
  return N;
}

BucketSchedule make_schedule(int n0, double B, double h) {
  if (!(B >= 2.0) || std::floor(B) != B)
    throw ConfigError("schedule: B must be an integer >= 2 (block alignment needs integer powers)");
  if (n0 < 0) throw ConfigError("schedule: n0 must be nonnegative");
  BucketSchedule s;
  s.B = static_cast<int>(B);
  s.n0 = n0;
  s.h = h;
  return s;
}

int offset_n0(double d, double h, double gamma) {
  return static_cast<int>(std::ceil(d / (h * gamma) - 1e-12));
}

ScheduleSlice build_schedule(long long n, int n0, double B) {
  BucketSchedule s = make_schedule(n0, B, 1.0);
  ScheduleSlice out;
  out.n = n;
  out.n_levels = s.N_levels(n);
  out.local_begin = s.b(1, n);
  for (int ell = 2; ell <= s.top_level(n); ++ell) out.ranges.push_back({s.b(ell, n), s.b(ell - 1, n)});
  return out;
}

ContourParams level_contour(int level, const BucketSchedule& sch, double d, const ObliviousConfig& cfg) {
  if (level < 2) throw ConfigError("level_contour: level must be >= 2");
  const double Bl = std::pow(double(sch.B), level);
  if (cfg.strategy == LevelStrategy::heuristic) {
    ContourParams p = heuristic_parameters(level, sch.h, sch.n0, sch.B, cfg.scaling, cfg.L, cfg.alpha, cfg.b_strip);
    p.gamma_target = cfg.gamma;
    return p;
  }
  const double t0 = sch.h * (sch.n0 + Bl);
  const double Lambda = (sch.n0 + 2.0 * Bl * sch.B) / (sch.n0 + Bl);
  const double D = d / (cfg.gamma * t0);
  if (!(D < 1.0)) throw InfeasibleError("level_contour: D >= 1, n0 too small for this distance");
  const double Dpos = std::max(D, 1e-12);
  return select_parameters(cfg.theta_mode, cfg.gamma, cfg.alpha, cfg.b_strip, cfg.L, t0, Lambda, Dpos,
                           cfg.eps_eval, cfg.theta);
}

ObliviousConvolver::ObliviousConvolver(SymbolFamily fam, int P, const ButcherTableau& tab, double h, long long N,
                                       double d, const ObliviousConfig& cfg, const WeightFamily* local)
    : fam_(std::move(fam)), P_(P), tab_(tab), h_(h), N_(N), d_(d), cfg_(cfg) {
  if (cfg.L < 1) throw ConfigError("oblivious: L must be positive");
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw ConfigError("oblivious: gamma must lie in (0,1)");
  const int n0 = cfg.n0 >= 0 ? cfg.n0 : offset_n0(d, h, cfg.gamma);
  sch_ = make_schedule(n0, cfg.B, h);

  const int need = sch_.max_local_lag();
  if (local) {
    if (local->N < need || local->P != P) throw ConfigError("oblivious: local weight table too short");
    local_ = *local;
  } else {
    local_ = weights_fft_family(fam_, P_, tab_, h_, need, cfg.local_fft);
  }
  counters_.local_weights = need + 1;

  const int top = sch_.top_level(N);
  const double rho = top >= 2 ? cached_rho(tab_) : 0.0;
  std::vector<cplx> kv(P_);
  for (int ell = 2; ell <= top; ++ell) {
    Level lv;
    lv.ell = ell;
    lv.beta = ipow_ll(sch_.B, ell);
    lv.big = lv.beta * sch_.B;
    lv.params = level_contour(ell, sch_, d_, cfg_);
    lv.nodes = quad_nodes(lv.params);
    const int K = static_cast<int>(lv.nodes.size());
    lv.r.resize(K);
    lv.Q.resize(K, tab_.s);
    lv.V.resize(K, tab_.s);
    lv.Kv.resize(K, P_);
    lv.wk.resize(K);
    for (int k = 0; k < K; ++k) {
      StageSymbol sy = symbol(tab_, h_ * lv.nodes[k].lambda);
      lv.r(k) = sy.r;
      lv.Q.row(k) = sy.q;
      lv.V.row(k) = sy.v.transpose();
      lv.wk(k) = lv.nodes[k].weight;
      fam_(lv.nodes[k].lambda, kv.data());
      for (int p = 0; p < P_; ++p) lv.Kv(k, p) = kv[p];
      ++counters_.kernel_evals;
    }
    lv.f.Y = CMat::Zero(K, P_);
    lv.s.Y = CMat::Zero(K, P_);

    const ContourParams& cp = lv.params;
    if (cp.theta > 0.0) {
      try {
        double xi = xi_of(cp, h_, cp.nu);
        double g = gamma_of_xi(tab_, xi);
        if (g < cfg.gamma)
          warnings_.push_back("level " + std::to_string(ell) + ": gamma(xi)=" + std::to_string(g) +
                              " below target " + std::to_string(cfg.gamma));
      } catch (const InfeasibleError& e) {
        warnings_.push_back("level " + std::to_string(ell) + ": " + e.what());
      }
    }
    if (h_ * cp.nu * (1.0 - std::sin(cp.alpha - cp.b_strip)) >= rho)
      warnings_.push_back("level " + std::to_string(ell) + ": h nu (1 - sin(alpha - b)) >= rho");
    levels_.push_back(std::move(lv));
  }
  counters_.levels = static_cast<int>(levels_.size());
}

void ObliviousConvolver::absorb(Level& lv, Segment& into, const Segment& blk) {
  if (into.empty()) {
    into = blk;
    return;
  }
  if (into.end != blk.start) throw std::logic_error("oblivious: non-contiguous segments");
  const long long len = blk.end - blk.start;
  for (Eigen::Index k = 0; k < into.Y.rows(); ++k) into.Y.row(k) *= ipow(lv.r(k), len);
  into.Y += blk.Y;
  into.end = blk.end;
}

void ObliviousConvolver::ingest(const CMat& x, long long j) {
  for (auto& lv : levels_) {
    if (lv.pending.empty() || lv.pending.back().end - lv.pending.back().start == lv.beta) {
      Segment blk;
      blk.start = blk.end = j;
      blk.Y = CMat::Zero(lv.nodes.size(), P_);
      lv.pending.push_back(std::move(blk));
    }
    Segment& blk = lv.pending.back();
    if (blk.end != j) throw std::logic_error("oblivious: out-of-order ingestion");
    // y+ = r y + h q x, all nodes at once
    blk.Y = lv.r.asDiagonal() * blk.Y + h_ * (lv.Q * x);
    blk.end = j + 1;
  }
}

void ObliviousConvolver::activate(Level& lv, long long upto) {
  long long active_end = lv.s.empty() ? lv.f.end : lv.s.end;
  while (active_end < upto) {
    if (lv.pending.empty()) throw std::logic_error("oblivious: activation without pending data");
    Segment blk = std::move(lv.pending.front());
    lv.pending.pop_front();
    if (blk.start != active_end || blk.end > upto) throw std::logic_error("oblivious: misaligned block");
    if (lv.f.end - lv.f.start < lv.big) {
      if (!lv.s.empty()) throw std::logic_error("oblivious: second segment before first is full");
      absorb(lv, lv.f, blk);
    } else {
      absorb(lv, lv.s, blk);
    }
    active_end = blk.end;
  }
}

void ObliviousConvolver::retire(Level& lv, long long new_start) {
  if (new_start == lv.f.start) return;
  if (new_start != lv.f.start + lv.big || lv.f.end - lv.f.start != lv.big)
    throw std::logic_error("oblivious: unexpected range start");
  if (lv.s.empty()) {
    lv.f.start = lv.f.end = new_start;
    lv.f.Y.setZero();
  } else {
    lv.f = std::move(lv.s);
  }
  lv.s = Segment{};
  lv.s.start = lv.s.end = lv.f.end;
  lv.s.Y = CMat::Zero(lv.nodes.size(), P_);
}

void ObliviousConvolver::count_states() {
  long long live = 0;
  for (const auto& lv : levels_) {
    long long c = (lv.f.empty() ? 0 : 1) + (lv.s.empty() ? 0 : 1);
    for (const auto& b : lv.pending) c += b.empty() ? 0 : 1;
    live += c * static_cast<long long>(lv.nodes.size());
  }
  counters_.resident_states = live;
  counters_.max_resident_states = std::max(counters_.max_resident_states, live);
}

CMat ObliviousConvolver::history() {
  const long long n = n_;
  if (n > N_) throw ConfigError("oblivious: step beyond the configured horizon");
  const long long b1 = sch_.b(1, n);
  while (ring_begin_ < b1) {
    ingest(ring_.front(), ring_begin_);
    ring_.pop_front();
    ++ring_begin_;
  }
  for (auto& lv : levels_) {
    activate(lv, sch_.b(lv.ell - 1, n));
    retire(lv, sch_.b(lv.ell, n));
    const long long end = lv.s.empty() ? lv.f.end : lv.s.end;
    if (lv.f.start != sch_.b(lv.ell, n) || end != sch_.b(lv.ell - 1, n))
      throw std::logic_error("oblivious: active range does not match the schedule");
  }
  count_states();

  const int s = tab_.s;
  CMat H = CMat::Zero(s, P_);
  for (auto& lv : levels_) {
    if (lv.f.empty()) continue;
    const Eigen::Index K = lv.r.size();
    for (Eigen::Index k = 0; k < K; ++k) {
      CRow c = ipow(lv.r(k), n - lv.f.end) * lv.f.Y.row(k);
      if (!lv.s.empty()) c += ipow(lv.r(k), n - lv.s.end) * lv.s.Y.row(k);
      c = (lv.wk(k) * c).cwiseProduct(lv.Kv.row(k));
      H.noalias() += lv.V.row(k).transpose() * c;
    }
  }
  for (long long j = b1; j < n; ++j) {
    const CMat& x = ring_[j - ring_begin_];
    const int m = static_cast<int>(n - j);
    for (int p = 0; p < P_; ++p)
      for (int i = 0; i < s; ++i) {
        cplx acc(0.0, 0.0);
        for (int l = 0; l < s; ++l) acc += local_.at(m, p, i, l) * x(l, p);
        H(i, p) += acc;
      }
  }
  return H;
}

void ObliviousConvolver::push(const CMat& x) {
  if (x.rows() != tab_.s || x.cols() != P_) throw ConfigError("oblivious: datum has wrong shape");
  ring_.push_back(x);
  ++n_;
  ++counters_.data_reads;
}

ObliviousConvolver::Segment ObliviousConvolver::segment(int level, Slot slot) const {
  const Level& lv = levels_.at(level - 2);
  switch (slot) {
    case F: return lv.f;
    case S: return lv.s;
    case P1: return lv.pending.size() > 0 ? lv.pending[0] : Segment{};
    case P2: return lv.pending.size() > 1 ? lv.pending[1] : Segment{};
  }
  return Segment{};
}

std::pair<long long, long long> ObliviousConvolver::active_range(int level) const {
  const Level& lv = levels_.at(level - 2);
  return {lv.f.start, lv.s.empty() ? lv.f.end : lv.s.end};
}

ScalarRun oblivious_convolve(const KernelDescriptor& k, const ButcherTableau& tab, double h, int N, double d,
                             const std::function<double(double)>& g, const ObliviousConfig& cfg) {
  auto fam = [&k, d](cplx lambda, cplx* out) { out[0] = k.eval(lambda, d); };
  ObliviousConvolver conv(fam, 1, tab, h, N > 0 ? N - 1 : 0, d, cfg);
  CMat G = stage_samples(tab, h, N, g);
  const CMat W0 = conv.w0(0);
  ScalarRun run;
  run.u.resize(N);
  for (int n = 0; n < N; ++n) {
    CMat H = conv.history();
    CMat x = G.col(n);
    H += W0 * x;
    run.u[n] = H(tab.s - 1, 0).real();
    conv.push(x);
  }
  run.counters = conv.counters();
  run.warnings = conv.warnings();
  return run;
}

CVec replay_state(const ObliviousConvolver& conv, const ButcherTableau& tab, int level,
                  ObliviousConvolver::Slot slot, int node, const std::function<CMat(long long)>& data) {
  auto seg = conv.segment(level, slot);
  const cplx lambda = conv.level_nodes(level).at(node).lambda;
  StageSymbol sy = symbol(tab, conv.h() * lambda);
  CVec y;
  for (long long j = seg.start; j < seg.end; ++j) {
    CMat x = data(j);
    if (y.size() == 0) y = CVec::Zero(x.cols());
    y = rk_ode_step(sy, conv.h(), y, x);
  }
  if (y.size() == 0) y = CVec::Zero(seg.Y.cols() > 0 ? seg.Y.cols() : 1);
  return y;
}

}  // namespace tailcq
