#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "udlab/common.hpp"
#include "udlab/rng.hpp"

namespace udlab {

struct AlphabetSpec {
  int x_size = 1;
  int y_size = 1;
  int z_size = 1;
};

struct StateSpec {
  int omega_size = 1;
  int sigma_size = 1;
  int theta_size = 1;
  int omega0 = 0;
  int sigma0 = 0;
  int theta0 = 0;
};

// Row-conditional kernels. Rows (the conditioning index) must sum to 1 within
// 1e-12; construction renormalizes exact row sums after that check.
struct SourceKernel {
  int x_size = 1;
  int omega_size = 1;
  std::vector<double> table;  // [omega'][x][omega]

  double at(int x, int omega, int omega_prime) const {
    return table[(static_cast<std::size_t>(omega_prime) * x_size + x) * omega_size + omega];
  }
};

struct ChannelKernelV {
  int x_size = 1;
  int y_size = 1;
  int theta_size = 1;
  std::vector<double> table;  // [x][theta'][y][theta]

  double at(int y, int theta, int x, int theta_prime) const {
    return table[((static_cast<std::size_t>(x) * theta_size + theta_prime) * y_size + y) *
                     theta_size +
                 theta];
  }
};

struct ChannelKernelW {
  int x_size = 1;
  int z_size = 1;
  int sigma_size = 1;
  std::vector<double> table;  // [x][sigma'][z][sigma]

  double at(int z, int sigma, int x, int sigma_prime) const {
    return table[((static_cast<std::size_t>(x) * sigma_size + sigma_prime) * z_size + z) *
                     sigma_size +
                 sigma];
  }
};

SourceKernel make_source_kernel(int x_size, int omega_size, std::vector<double> table);
ChannelKernelV make_channel_v(int x_size, int y_size, int theta_size, std::vector<double> table);
ChannelKernelW make_channel_w(int x_size, int z_size, int sigma_size, std::vector<double> table);

// A generic hidden-Markov chain in packed form: kernel[s'][o][s] is the
// probability of emitting observation o and moving to state s from state s'.
// Rows indexed by s' sum to 1 over (o, s).
struct PackedHmm {
  int num_states = 1;
  int num_obs = 1;
  int initial_state = 0;
  std::vector<double> kernel;  // [s'][o][s]

  double at(int o, int s, int s_prime) const {
    return kernel[(static_cast<std::size_t>(s_prime) * num_obs + o) * num_states + s];
  }
  double min_entry() const;
};

// pi(y, theta, omega | theta', omega') = sum_x G(x, omega | omega') V(y, theta | x, theta').
// Packed state is theta * |Omega| + omega; observation is y.
struct InducedKernelPi {
  int y_size = 1;
  int theta_size = 1;
  int omega_size = 1;
  PackedHmm hmm;
  double pi_min = 0.0;

  int pack_state(int theta, int omega) const { return theta * omega_size + omega; }
  double at(int y, int theta, int omega, int theta_prime, int omega_prime) const {
    return hmm.at(y, pack_state(theta, omega), pack_state(theta_prime, omega_prime));
  }
};

// Pi(y, z, theta, sigma, omega | ...) = sum_x G * V * W. Packed state is
// (theta * |Sigma| + sigma) * |Omega| + omega; observation is y * |Z| + z.
struct JointKernelBigPi {
  int y_size = 1;
  int z_size = 1;
  int theta_size = 1;
  int sigma_size = 1;
  int omega_size = 1;
  PackedHmm hmm;
  long long K = 1;  // |Theta| * |Sigma| * |Omega|

  int pack_state(int theta, int sigma, int omega) const {
    return (theta * sigma_size + sigma) * omega_size + omega;
  }
  int pack_obs(int y, int z) const { return y * z_size + z; }
  double at(int y, int z, int theta, int sigma, int omega, int theta_prime, int sigma_prime,
            int omega_prime) const {
    return hmm.at(pack_obs(y, z), pack_state(theta, sigma, omega),
                  pack_state(theta_prime, sigma_prime, omega_prime));
  }
};

// Fused one-draw sampler for a source/secondary-channel step: given the
// previous (omega', theta'), one categorical over the product row
// G(x, omega | omega') * V(y, theta | x, theta') yields (x, omega, y, theta)
// at once. Derived from G and V; exists to halve RNG traffic on the
// Monte-Carlo hot path, where fresh codebooks dominate the per-trial cost.
struct PairStepSampler {
  int row_len = 0;           // x_size * omega_size * y_size * theta_size
  int theta_size = 1;
  std::vector<double> rows;  // indexed by (omega' * theta_size + theta') * row_len
  std::vector<int> dec_x, dec_omega, dec_y, dec_theta;  // draw index -> component
  bool empty() const { return rows.empty(); }
};

struct SystemModel {
  AlphabetSpec alphabets;
  StateSpec states;
  SourceKernel G;
  ChannelKernelV V;
  ChannelKernelW W;
  InducedKernelPi pi;
  JointKernelBigPi big_pi;
  PairStepSampler xy_sampler;
};

InducedKernelPi build_pi(const SourceKernel& G, const ChannelKernelV& V, const StateSpec& states);
JointKernelBigPi build_big_pi(const SourceKernel& G, const ChannelKernelV& V,
                              const ChannelKernelW& W, const StateSpec& states);

SystemModel make_system_model(AlphabetSpec alphabets, StateSpec states, SourceKernel G,
                              ChannelKernelV V, ChannelKernelW W);

// Returns pi_min; throws PositivityViolation when any entry of pi is zero.
double check_positivity(const InducedKernelPi& pi);

// ---- probability evaluation -------------------------------------------------
// All log values are natural logs. The forward recursions run in scaled linear
// space (renormalizing each step and accumulating the log of the scale), which
// is as stable as explicit log-sum-exp here because every term is nonnegative.

double hmm_log_forward(const PackedHmm& hmm, const int* obs, int n);

double log_prob_y(const InducedKernelPi& pi, const Sequence& y);
double log_prob_yz(const JointKernelBigPi& big_pi, const Sequence& y, const Sequence& z);
double log_cond_z_given_y(const JointKernelBigPi& big_pi, const InducedKernelPi& pi,
                          const Sequence& y, const Sequence& z);

// ---- sampling ----------------------------------------------------------------

struct Triple {
  Sequence x;
  Sequence y;
  Sequence z;
};

Triple sample_triple(const SystemModel& model, int n, std::uint64_t seed);
// Source + secondary channel only (codebook generation path).
std::pair<Sequence, Sequence> sample_xy(const SystemModel& model, int n, Rng& rng);
void sample_xy_into(const SystemModel& model, int n, Rng& rng, Sequence& x, Sequence& y);
// Exact conditional transmission: draws (x, hidden states) given y by a
// backward-filtered forward pass over the joint (theta, omega) chain, then z
// through W. No rejection involved.
std::pair<Sequence, Sequence> sample_xz_given_y(const SystemModel& model, const Sequence& y,
                                                Rng& rng);
void sample_xz_given_y_into(const SystemModel& model, const Sequence& y, Rng& rng, Sequence& x,
                            Sequence& z);

// ---- phrase-pinned quantities -------------------------------------------------
// `boundaries` is PhraseParse::boundaries (n_0 = 0 < ... < n_c = n). Boundary
// states are the chain states at n_1..n_c; the state at n_0 is the fixed
// initial state and is not part of the assignment.

struct BoundaryStates {
  std::vector<int> states;  // packed states, one per phrase end
};

struct PinnedPath {
  BoundaryStates states;
  double log_value = kNegInf;  // natural log of the maximized pinned probability
};

PinnedPath hmm_phrase_viterbi(const PackedHmm& hmm, const int* obs, const std::vector<int>& boundaries);
double hmm_log_prob_pinned(const PackedHmm& hmm, const int* obs, const std::vector<int>& boundaries,
                           const BoundaryStates& states);

PinnedPath phrase_viterbi_t_hat(const JointKernelBigPi& big_pi, const Sequence& y,
                                const Sequence& z, const std::vector<int>& boundaries);
PinnedPath phrase_viterbi_s_tilde(const InducedKernelPi& pi, const Sequence& y,
                                  const std::vector<int>& boundaries);
double log_prob_y_s(const InducedKernelPi& pi, const Sequence& y,
                    const std::vector<int>& boundaries, const BoundaryStates& s);

// Packs (y, z) into the joint observation sequence for big_pi's chain.
void pack_pair_obs(const JointKernelBigPi& big_pi, const Sequence& y, const Sequence& z,
                   std::vector<int>& out);

}  // namespace udlab
