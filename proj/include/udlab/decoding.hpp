#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "udlab/common.hpp"
#include "udlab/lz.hpp"
#include "udlab/model.hpp"

namespace udlab {

enum class DecoderFamily { ML, Universal, Threshold };

struct DecoderKind {
  DecoderFamily family = DecoderFamily::ML;
  double alpha = 0.0;  // only meaningful for Threshold; must be > 1

  static DecoderKind ml() { return {DecoderFamily::ML, 0.0}; }
  static DecoderKind universal() { return {DecoderFamily::Universal, 0.0}; }
  static DecoderKind threshold(double alpha) {
    if (!(alpha > 1.0)) throw ValidationError("threshold decoder requires alpha > 1");
    return {DecoderFamily::Threshold, alpha};
  }
  std::string name() const;
};

struct Codebook {
  int n = 0;
  double rate = 0.0;  // nats per symbol
  long long M = 0;    // ceil(e^{n * rate})
  std::uint64_t seed = 0;
  std::vector<Sequence> words;
};

// ceil(e^{nR}) with a small backoff so that rates hitting an integer exactly
// (up to round-off) are not bumped to the next one.
long long message_count(int n, double rate);

Codebook generate_codebook(const SystemModel& model, int n, double rate, std::uint64_t seed);
Codebook generate_codebook_m(const SystemModel& model, int n, long long M, double rate,
                             std::uint64_t seed);

struct ErrorProbReport {
  DecoderKind kind;
  double value = 0.0;
  std::string method;  // "exact-enumeration" or "monte-carlo"
  int n = 0;
  double rate = 0.0;
  long long M = 0;
  long long trials = 0;  // 0 when exact
  long long errors = 0;  // raw error count when Monte-Carlo
  double ci_low = std::numeric_limits<double>::quiet_NaN();
  double ci_high = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t seed = 0;
};

// u(y,z) = log2 P(y) + v(y,z); the universal decoder minimizes this.
double u_metric(const SystemModel& model, const Sequence& y, const Sequence& z);

// Decodes z against the codebook. Returns the 0-based message index, or
// nullopt when the threshold decoder finds no unique winner (erasure). ML and
// universal break ties by (metric, lexicographic y, codebook index).
std::optional<std::size_t> decode(const SystemModel& model, const Codebook& codebook,
                                  const Sequence& z, DecoderKind kind);

// f(t) = 1 - (1-t)^{M-1} with M = ceil(e^{nR}), evaluated via expm1/log1p.
double f_of_t(double t, int n, double rate);

// One ranking table: every y' of length n scored against a fixed z. Rank order
// is (metric, then integer code, i.e. lexicographic y'). Sequences with
// P(y') = 0 get metric +infinity; they carry no probability either way.
struct RankTable {
  int n = 0;
  DecoderFamily family = DecoderFamily::ML;
  std::vector<double> metric;   // by y-code; ML/Threshold: -ln P(z|y'); Universal: u in bits
  std::vector<double> log_py;   // natural log P(y')
  std::vector<double> log_pyz;  // natural log P(y', z)
  std::vector<std::uint32_t> order;        // codes sorted by (metric, code)
  std::vector<double> prefix_prob;         // inclusive prefix sums of P(y') in rank order
  std::vector<std::uint32_t> rank_of_code;
};

RankTable build_rank_table(const SystemModel& model, const Sequence& z, DecoderFamily family);

// P[E(y,z)] for the prefix event {y' : rank(y') <= rank(y)} (y itself included).
double set_prob_prefix(const RankTable& table, std::uint64_t y_code);
// P[E_t(y,z)] = P{y' : P(z|y') >= P(z|y)/alpha}; requires an ML/Threshold table.
double set_prob_threshold(const RankTable& table, std::uint64_t y_code, double alpha);

// Convenience wrapper per the enumeration guard |Y|^n <= 2^24.
double pairwise_set_prob(const SystemModel& model, const Sequence& z, DecoderKind kind,
                         const Sequence& y);

// Exact average error probability by full enumeration over (y, z); guard
// |Y|^n * |Z|^n <= 2^24.
ErrorProbReport exact_avg_error(const SystemModel& model, int n, double rate, DecoderKind kind);

// Exact f-average for an arbitrary ranking metric (rank by metric value, then
// lexicographic y). Used to compare decoders against the ML optimum.
double exact_f_average(const SystemModel& model, int n, double rate,
                       const std::function<double(const Sequence& y, const Sequence& z)>& metric);

// Monte-Carlo estimate: every trial draws a fresh codebook from P(y), picks a
// message uniformly, transmits via exact conditional sampling of z given the
// chosen codeword, and tests the union error event of the requested decoder.
// Deterministic for a given seed regardless of worker count.
ErrorProbReport monte_carlo_error(const SystemModel& model, int n, double rate, DecoderKind kind,
                                  long long trials, std::uint64_t seed, int workers = 1);

// Same trials evaluated under several decoders at once (shared randomness).
std::vector<ErrorProbReport> monte_carlo_error_multi(const SystemModel& model, int n, double rate,
                                                     const std::vector<DecoderKind>& kinds,
                                                     long long trials, std::uint64_t seed,
                                                     int workers = 1);

// Wilson 95% score interval for k successes out of m trials.
std::pair<double, double> wilson_interval(long long k, long long m);

}  // namespace udlab
