#pragma once

#include <array>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "tailcq/common.hpp"
#include "tailcq/contour.hpp"
#include "tailcq/cqdirect.hpp"
#include "tailcq/rk.hpp"

namespace tailcq {

// Geometric splitting of the history. With n' = n - n0,
//   b_l(n) = max(0, B^{l+1} (floor(n'/B^{l+1}) - 1)),  l >= 1,
// level l >= 2 serves j in [b_l, b_{l-1}) and the local part serves j in [b_1, n].
struct BucketSchedule {
  int B = 5;
  int n0 = 0;
  double h = 0.1;

  long long b(int ell, long long n) const;
  // Largest level with a nonempty range at step n (1 when the tail is empty).
  int top_level(long long n) const;
  // Level count from the N_l rule: smallest N with n < n0 + 1 + B + sum_{l=2}^{N} B^l.
  int N_levels(long long n) const;
  // Longest lag served by the local part.
  int max_local_lag() const { return n0 + 2 * B * B - 1; }
};

BucketSchedule make_schedule(int n0, double B, double h);
int offset_n0(double d, double h, double gamma);

struct ScheduleSlice {
  long long n = 0;
  int n_levels = 0;          // N_levels(n)
  long long local_begin = 0; // b_1(n)
  std::vector<std::pair<long long, long long>> ranges;  // ranges[l-2] = [b_l, b_{l-1})
};
ScheduleSlice build_schedule(long long n, int n0, double B);

enum class LevelStrategy { corollary, heuristic };

struct ObliviousConfig {
  int L = 15;
  double B = 5;
  double gamma = 0.8;
  double alpha = 0.9;
  double b_strip = 0.6;
  ThetaMode theta_mode = ThetaMode::sharp;
  double theta = 0.75;       // used by ThetaMode::fixed
  double eps_eval = 1e-15;
  LevelStrategy strategy = LevelStrategy::corollary;
  HeuristicScaling scaling{};
  int n0 = -1;               // -1: ceil(d / (h gamma))
  FftOptions local_fft{0.0, 8, 1e-14};
};

ContourParams level_contour(int level, const BucketSchedule& sch, double d, const ObliviousConfig& cfg);

struct Counters {
  long long kernel_evals = 0;        // distinct (level, node) evaluations of the transfer function
  long long resident_states = 0;     // live (state, node) pairs right now
  long long max_resident_states = 0;
  long long data_reads = 0;          // stage vectors received
  int local_weights = 0;             // W_0 .. W_{max lag} from the FFT path
  int levels = 0;                    // levels allocated for the run
};

// Fast and oblivious history evaluator for a diagonal family of P transfer functions.
// Each pushed datum x_j is s x P; history() returns sum_{j<n} W_{n-j} x_j (s x P) with the
// local lags from direct weights and the older part from running RK solutions at contour nodes.
class ObliviousConvolver {
 public:
  enum Slot { F = 0, S = 1, P1 = 2, P2 = 3 };

  struct Segment {
    long long start = 0;
    long long end = 0;  // exclusive
    CMat Y;             // nodes x P
    bool empty() const { return end <= start; }
  };

  ObliviousConvolver(SymbolFamily fam, int P, const ButcherTableau& tab, double h, long long N, double d,
                     const ObliviousConfig& cfg, const WeightFamily* local = nullptr);

  long long step() const { return n_; }
  double h() const { return h_; }
  CMat history();
  void push(const CMat& x);

  // W_0 for component p (needed by implicit solves and to close u_{n+1}).
  CMat w0(int p) const { return local_.matrix(0, p); }
  const WeightFamily& local_weights() const { return local_; }

  const Counters& counters() const { return counters_; }
  const BucketSchedule& schedule() const { return sch_; }
  int top_level_allocated() const { return 1 + static_cast<int>(levels_.size()); }
  const ContourParams& level_params(int level) const { return levels_.at(level - 2).params; }
  const std::vector<QuadNode>& level_nodes(int level) const { return levels_.at(level - 2).nodes; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Segment bookkeeping for replay checks. Pending blocks are reported as P1, P2 in order.
  Segment segment(int level, Slot slot) const;
  // Active range [start, end) at the current step, i.e. what history() used last.
  std::pair<long long, long long> active_range(int level) const;

 private:
  struct Level {
    int ell = 2;
    long long beta = 0;  // B^l, pending block size
    long long big = 0;   // B^{l+1}
    ContourParams params;
    std::vector<QuadNode> nodes;
    CVec r;              // r(h lambda_k)
    CMat Q;              // nodes x s, rows q(h lambda_k)
    CMat V;              // nodes x s, rows v(h lambda_k)^T
    CMat Kv;             // nodes x P
    CVec wk;             // quadrature weights
    Segment f, s;
    std::deque<Segment> pending;
  };

  void ingest(const CMat& x, long long j);
  void activate(Level& lv, long long upto);
  void retire(Level& lv, long long new_start);
  void absorb(Level& lv, Segment& into, const Segment& blk);
  void count_states();

  SymbolFamily fam_;
  int P_;
  ButcherTableau tab_;
  double h_;
  long long N_;
  double d_;
  ObliviousConfig cfg_;
  BucketSchedule sch_;
  WeightFamily local_;
  std::deque<CMat> ring_;
  long long ring_begin_ = 0;
  long long n_ = 0;
  std::vector<Level> levels_;
  Counters counters_;
  std::vector<std::string> warnings_;
};

struct ScalarRun {
  std::vector<double> u;  // u_1 .. u_N
  Counters counters;
  std::vector<std::string> warnings;
};

// Scalar convolution u_{n+1} = sum_{j<=n} omega_{n-j} g_j with the oblivious history.
ScalarRun oblivious_convolve(const KernelDescriptor& k, const ButcherTableau& tab, double h, int N, double d,
                             const std::function<double(double)>& g, const ObliviousConfig& cfg);

// Recomputes a stored state from the raw data by fresh RK steps from zero.
CVec replay_state(const ObliviousConvolver& conv, const ButcherTableau& tab, int level,
                  ObliviousConvolver::Slot slot, int node, const std::function<CMat(long long)>& data);

}  // namespace tailcq
