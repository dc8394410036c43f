#pragma once

// Brute-force reference implementations for the test suites. Everything here
// enumerates explicitly (hidden-state paths, candidate sequences, phrase
// permutations) and never calls the library's recursions, so agreement with
// the library is a meaningful check rather than a tautology.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "udlab/decoding.hpp"
#include "udlab/lz.hpp"
#include "udlab/model.hpp"
#include "udlab/rng.hpp"

namespace oracle {

using udlab::BoundaryStates;
using udlab::PackedHmm;
using udlab::Sequence;
using udlab::SystemModel;

// Deterministic strictly-positive test model: binary alphabets, two states in
// each chain, every kernel entry 0.2 + U[0,1) before row normalization.
inline SystemModel seeded_model(std::uint64_t seed) {
  udlab::Rng rng(udlab::derive_seed(seed, 7));
  auto fill = [&](std::size_t count, std::size_t row_len) {
    std::vector<double> t(count);
    for (double& v : t) v = 0.2 + rng.uniform();
    for (std::size_t r = 0; r < count; r += row_len) {
      double s = 0.0;
      for (std::size_t i = 0; i < row_len; ++i) s += t[r + i];
      for (std::size_t i = 0; i < row_len; ++i) t[r + i] /= s;
    }
    return t;
  };
  udlab::AlphabetSpec alphabets{2, 2, 2};
  udlab::StateSpec states{2, 2, 2, 0, 0, 0};
  auto g = udlab::make_source_kernel(2, 2, fill(8, 4));
  auto v = udlab::make_channel_v(2, 2, 2, fill(16, 4));
  auto w = udlab::make_channel_w(2, 2, 2, fill(16, 4));
  return udlab::make_system_model(alphabets, states, std::move(g), std::move(v), std::move(w));
}

// A memoryless chain: x ~ (1-g1, g1), y = x through a crossover-ev channel,
// z = x through a crossover-ew channel. All state spaces are singletons.
inline SystemModel memoryless_model(double g1, double ev, double ew) {
  udlab::AlphabetSpec alphabets{2, 2, 2};
  udlab::StateSpec states{1, 1, 1, 0, 0, 0};
  auto g = udlab::make_source_kernel(2, 1, {1.0 - g1, g1});
  auto v = udlab::make_channel_v(2, 2, 1, {1.0 - ev, ev, ev, 1.0 - ev});
  auto w = udlab::make_channel_w(2, 2, 1, {1.0 - ew, ew, ew, 1.0 - ew});
  return udlab::make_system_model(alphabets, states, std::move(g), std::move(v), std::move(w));
}

// P(obs) by full enumeration of hidden-state paths.
inline double prob_paths(const PackedHmm& hmm, const std::vector<int>& obs) {
  const int s_count = hmm.num_states;
  const int n = static_cast<int>(obs.size());
  std::vector<int> path(static_cast<std::size_t>(n), 0);
  double total = 0.0;
  while (true) {
    double p = 1.0;
    int prev = hmm.initial_state;
    for (int i = 0; i < n; ++i) {
      p *= hmm.at(obs[static_cast<std::size_t>(i)], path[static_cast<std::size_t>(i)], prev);
      prev = path[static_cast<std::size_t>(i)];
    }
    total += p;
    int i = 0;
    while (i < n && ++path[static_cast<std::size_t>(i)] == s_count) {
      path[static_cast<std::size_t>(i)] = 0;
      ++i;
    }
    if (i == n) break;
  }
  return total;
}

inline double log_prob_paths(const PackedHmm& hmm, const std::vector<int>& obs) {
  const double p = prob_paths(hmm, obs);
  return p > 0.0 ? std::log(p) : udlab::kNegInf;
}

inline std::vector<int> pair_obs(const SystemModel& model, const Sequence& y, const Sequence& z) {
  std::vector<int> obs(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    obs[i] = model.big_pi.pack_obs(y[i], z[i]);
  return obs;
}

inline std::vector<int> to_obs(const Sequence& y) { return y; }

// Buckets the full path enumeration by the states at the phrase-end
// positions. Returns (per-assignment probability) keyed by assignment.
inline std::map<std::vector<int>, double> pinned_buckets(const PackedHmm& hmm,
                                                         const std::vector<int>& obs,
                                                         const std::vector<int>& boundaries) {
  const int s_count = hmm.num_states;
  const int n = static_cast<int>(obs.size());
  std::vector<int> path(static_cast<std::size_t>(n), 0);
  std::map<std::vector<int>, double> buckets;
  while (true) {
    double p = 1.0;
    int prev = hmm.initial_state;
    for (int i = 0; i < n; ++i) {
      p *= hmm.at(obs[static_cast<std::size_t>(i)], path[static_cast<std::size_t>(i)], prev);
      prev = path[static_cast<std::size_t>(i)];
    }
    std::vector<int> key;
    for (std::size_t k = 1; k < boundaries.size(); ++k)
      key.push_back(path[static_cast<std::size_t>(boundaries[k] - 1)]);
    buckets[key] += p;
    int i = 0;
    while (i < n && ++path[static_cast<std::size_t>(i)] == s_count) {
      path[static_cast<std::size_t>(i)] = 0;
      ++i;
    }
    if (i == n) break;
  }
  return buckets;
}

inline double prob_pinned_paths(const PackedHmm& hmm, const std::vector<int>& obs,
                                const std::vector<int>& boundaries,
                                const BoundaryStates& pin) {
  auto buckets = pinned_buckets(hmm, obs, boundaries);
  const auto it = buckets.find(pin.states);
  return it == buckets.end() ? 0.0 : it->second;
}

// Maximizing boundary assignment; ties resolved toward the lexicographically
// smallest assignment (std::map iterates keys in that order).
inline udlab::PinnedPath viterbi_pinned_paths(const PackedHmm& hmm, const std::vector<int>& obs,
                                              const std::vector<int>& boundaries) {
  auto buckets = pinned_buckets(hmm, obs, boundaries);
  udlab::PinnedPath best;
  double best_p = -1.0;
  for (const auto& [key, p] : buckets) {
    if (p > best_p) {
      best_p = p;
      best.states.states = key;
    }
  }
  best.log_value = best_p > 0.0 ? std::log(best_p) : udlab::kNegInf;
  return best;
}

// ---- decoding-side oracles ---------------------------------------------------

struct ScoredCandidates {
  std::vector<double> prob_y;   // P(y') by code
  std::vector<double> prob_yz;  // P(y', z) by code
  std::vector<double> metric;   // family metric by code (+inf where undefined)
};

// Scores every y' of length n against z under one decoder family, using only
// path-enumeration probabilities and the publicly pinned metric definitions.
inline ScoredCandidates score_all(const SystemModel& model, const Sequence& z,
                                  udlab::DecoderFamily family) {
  const int n = static_cast<int>(z.size());
  const std::uint64_t count = udlab::sequence_count(model.alphabets.y_size, n);
  ScoredCandidates sc;
  sc.prob_y.resize(count);
  sc.prob_yz.resize(count);
  sc.metric.resize(count);
  Sequence y;
  const double inf = std::numeric_limits<double>::infinity();
  for (std::uint64_t code = 0; code < count; ++code) {
    udlab::decode_sequence(code, model.alphabets.y_size, n, y);
    const double py = prob_paths(model.pi.hmm, to_obs(y));
    const double pyz = prob_paths(model.big_pi.hmm, pair_obs(model, y, z));
    sc.prob_y[code] = py;
    sc.prob_yz[code] = pyz;
    if (py <= 0.0) {
      sc.metric[code] = inf;
      continue;
    }
    if (family == udlab::DecoderFamily::Universal) {
      const auto parse = udlab::joint_parse(y, z, model.alphabets.y_size, model.alphabets.z_size);
      sc.metric[code] = std::log2(py) + udlab::v_metric(parse);
    } else {
      sc.metric[code] = pyz > 0.0 ? -std::log(pyz / py) : inf;
    }
  }
  return sc;
}

// Mass of {y' : (metric, code) <= (metric(y), code(y))}, y included.
inline double set_prob_prefix(const ScoredCandidates& sc, std::uint64_t y_code) {
  double total = 0.0;
  for (std::uint64_t c = 0; c < sc.metric.size(); ++c) {
    if (sc.metric[c] < sc.metric[y_code] || (sc.metric[c] == sc.metric[y_code] && c <= y_code))
      total += sc.prob_y[c];
  }
  return total;
}

// Mass of {y' : -ln P(z|y') <= -ln P(z|y) + ln alpha}.
inline double set_prob_threshold(const ScoredCandidates& sc, std::uint64_t y_code, double alpha) {
  const double cutoff = sc.metric[y_code] + std::log(alpha);
  double total = 0.0;
  for (std::uint64_t c = 0; c < sc.metric.size(); ++c)
    if (sc.metric[c] <= cutoff) total += sc.prob_y[c];
  return total;
}

// Exact average error probability from first principles.
inline double exact_error(const SystemModel& model, int n, double rate, udlab::DecoderKind kind) {
  const long long m_count = udlab::message_count(n, rate);
  const std::uint64_t zc_count = udlab::sequence_count(model.alphabets.z_size, n);
  const std::uint64_t yc_count = udlab::sequence_count(model.alphabets.y_size, n);
  double total = 0.0;
  Sequence z, y;
  for (std::uint64_t zc = 0; zc < zc_count; ++zc) {
    udlab::decode_sequence(zc, model.alphabets.z_size, n, z);
    const ScoredCandidates sc =
        score_all(model, z,
                  kind.family == udlab::DecoderFamily::Universal ? udlab::DecoderFamily::Universal
                                                                 : udlab::DecoderFamily::ML);
    for (std::uint64_t yc = 0; yc < yc_count; ++yc) {
      udlab::decode_sequence(yc, model.alphabets.y_size, n, y);
      const double pyz = prob_paths(model.big_pi.hmm, pair_obs(model, y, z));
      if (pyz <= 0.0) continue;
      const double t = kind.family == udlab::DecoderFamily::Threshold
                           ? set_prob_threshold(sc, yc, kind.alpha)
                           : set_prob_prefix(sc, yc);
      const double f =
          m_count <= 1 ? 0.0
                       : 1.0 - std::pow(1.0 - std::min(t, 1.0), static_cast<double>(m_count - 1));
      total += pyz * f;
    }
  }
  return total;
}

// Relative agreement helper for probabilities and log values.
inline bool close_rel(double a, double b, double tol) {
  if (a == b) return true;
  return std::fabs(a - b) <= tol * std::max({std::fabs(a), std::fabs(b), 1e-300});
}

}  // namespace oracle
