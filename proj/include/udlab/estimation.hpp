#pragma once

#include <cstdint>
#include <vector>

#include "udlab/common.hpp"
#include "udlab/decoding.hpp"
#include "udlab/model.hpp"

namespace udlab {

// Fitting the observation-sequence law as a hidden-Markov model over a single
// product hidden space, with a hard floor on every kernel entry so the fitted
// law keeps full support.
struct EstimationConfig {
  int hidden_size = 2;      // H, the fitted joint hidden-state count
  double floor_value = 1e-6;  // minimum allowed kernel entry after each M-step
  int max_iters = 200;
  double tol = 1e-6;  // stop once the per-iteration log-likelihood gain drops below this
  std::uint64_t seed = 1;
};

struct BaumWelchResult {
  PackedHmm pi_hat;  // num_states = H, num_obs = |Y|, initial state 0
  // Log-likelihood of the parameters entering each iteration, one entry per
  // iteration performed; non-decreasing up to flooring noise.
  std::vector<double> loglik_trace;
  int iterations = 0;
  bool converged = false;
};

// Floored EM for the fused kernel p(y_t, s_t | s_{t-1}). After every M-step
// each row is projected onto {p : p >= floor, sum p = 1} in the
// KL-optimal way, so the trace stays monotone.
BaumWelchResult baum_welch(const std::vector<Sequence>& sequences, int y_alphabet_size,
                           const EstimationConfig& config);

// Log-likelihood of a fitted model on data, for held-out comparisons.
double hmm_log_likelihood(const PackedHmm& hmm, const std::vector<Sequence>& sequences);

// Minimum-u decoding with the fitted law supplying the first term. Same
// tie-break as the built-in minimum-u decoder: (metric, word, index).
std::size_t plug_in_decode(const PackedHmm& pi_hat, const Codebook& codebook, const Sequence& z,
                           int z_alphabet_size);

// Paired Monte-Carlo comparison: identical codebooks, messages, and channel
// noise for both decoders, so the difference estimate is low-variance.
struct PlugInComparison {
  ErrorProbReport true_universal;
  ErrorProbReport plug_in;
};
PlugInComparison compare_plug_in_monte_carlo(const SystemModel& model, const PackedHmm& pi_hat,
                                             int n, double rate, long long trials,
                                             std::uint64_t seed, int workers = 1);

}  // namespace udlab
