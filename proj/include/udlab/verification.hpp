#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "udlab/decoding.hpp"
#include "udlab/lz.hpp"
#include "udlab/model.hpp"

namespace udlab {

struct BoundReport {
  std::string name;
  double left = 0.0;   // checked as left <= right (equality links note it in name)
  double right = 0.0;
  bool holds = false;
  double slack = 0.0;  // right - left
  std::string instance;
};

// The threshold the proof prescribes: alpha = (K/pi_min)^{2*cbar_n}. Natural
// log form is always finite; the linear form throws TooLarge past 1e300.
double prescribed_log_alpha(const SystemModel& model, int n);
double prescribed_alpha(const SystemModel& model, int n);

// L_n(z) = sum_y P(y)/P[E_o(y,z)] <= n ln(1/(pi_min |Theta||Omega|)) + 1.
BoundReport check_harmonic_lemma(const SystemModel& model, const Sequence& z);

// Pe_t(z) <= (alpha [n ln(1/(pi_min |Theta||Omega|)) + 1] + 1) Pe_o(z), both
// sides exact conditional error probabilities given z.
BoundReport check_threshold_lemma(const SystemModel& model, const Sequence& z, double alpha,
                                  double rate);

// P(y) <= P(y, s~) (|Theta x Omega| / pi_min^2)^c, plus the weaker K form.
// Instances whose shortest phrase is below three symbols are tagged
// "short-phrase" in the instance string; callers may treat those as advisory.
std::vector<BoundReport> check_marginal_vs_pinned(const SystemModel& model, const Sequence& y,
                                    const Sequence& z);

struct E1Set {
  std::vector<std::uint64_t> codes;  // y' codes with matching pinned scores
  std::vector<int> boundaries;
  PinnedPath t_hat;
  PinnedPath s_tilde;
  double sum_prob = 0.0;    // sum over E1 of P(y')
  double sum_pinned = 0.0;  // sum over E1 of P(y', s~)
};

E1Set build_E1(const SystemModel& model, const Sequence& y, const Sequence& z);

struct TSet {
  std::vector<Sequence> members;  // distinct phrase permutations of y, y included
};

TSet build_T(const SystemModel& model, const Sequence& y, const Sequence& z);

// The displayed chain lower-bounding P[E_t]: one report per link, plus the
// final K^{-cbar_n} |T| P(y) form.
std::vector<BoundReport> check_Et_lower_bound(const SystemModel& model, const Sequence& y,
                                              const Sequence& z, double alpha);

struct KraftReport {
  double sum = 0.0;    // sum over y' of 2^{-v(y',z)}
  double kappa = 0.0;  // (1/n) log2 of the sum
};

KraftReport kraft_sum(const SystemModel& model, const Sequence& z);

// f(a)/f(b) <= max{1, a/b} for a, b in (0, 1].
BoundReport check_f_ratio(double a, double b, int n, double rate);

struct EpsilonLadder {
  int n = 0;
  long long cbar_n = 0;
  double eps_n = 0.0;        // back-solved from the packing bound (n >= 2)
  bool kappa_measured = false;
  double kappa = 0.0;        // max_z (1/n) log2 sum_y 2^{-v}, bits
  double eps2_prime = 0.0;   // bits
  double eps2 = 0.0;         // bits
  double eps3 = 0.0;         // nats
  double eps_total_nats = 0.0;  // ln2 * (kappa + eps2) + eps3 when measured
};

EpsilonLadder epsilon_ladder(const SystemModel& model, int n);

// Every inequality at one block length, all (y,z) enumerated. `alpha <= 0`
// selects the prescribed (K/pi_min)^{2*cbar_n}. Reports whose name starts
// with "perm_class" are informational (the count bound can be vacuous at small n).
struct SweepOptions {
  double rate = 0.1;
  double alpha = 0.0;
  bool include_passing = true;
};

std::vector<BoundReport> bounds_sweep(const SystemModel& model, int n, const SweepOptions& opts);

// True when a failing report may be logged instead of failing the run.
bool is_advisory(const BoundReport& report);

}  // namespace udlab
