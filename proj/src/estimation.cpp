#include "udlab/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "udlab/lz.hpp"
#include "udlab/rng.hpp"

namespace udlab {

namespace {

// Compensated accumulator: the monotonicity tolerance on the likelihood trace
// is far below plain-summation noise at realistic corpus sizes.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = x - comp;
    const double s = sum + t;
    comp = (s - sum) - t;
    sum = s;
  }
};

// Maximize sum_i c_i log p_i over {p : p_i >= floor, sum_i p_i = 1}. The
// optimum clamps a set of entries to the floor and splits the remaining mass
// proportionally to the counts; iterating the clamp set reaches the KKT point
// in at most d passes.
void waterfill_row(const double* counts, std::size_t d, double floor_value, double* row) {
  std::vector<char> clamped(d, 0);
  while (true) {
    double free_counts = 0.0;
    std::size_t num_clamped = 0;
    for (std::size_t i = 0; i < d; ++i) {
      if (clamped[i])
        ++num_clamped;
      else
        free_counts += counts[i];
    }
    const double free_mass = 1.0 - floor_value * static_cast<double>(num_clamped);
    bool changed = false;
    if (free_counts <= 0.0) {
      for (std::size_t i = 0; i < d; ++i)
        if (!clamped[i]) {
          clamped[i] = 1;
          changed = true;
        }
    } else {
      for (std::size_t i = 0; i < d; ++i) {
        if (clamped[i]) continue;
        if (counts[i] * free_mass / free_counts < floor_value) {
          clamped[i] = 1;
          changed = true;
        }
      }
    }
    if (!changed) {
      for (std::size_t i = 0; i < d; ++i)
        row[i] = clamped[i] ? floor_value : counts[i] * free_mass / free_counts;
      return;
    }
  }
}

void validate_sequences(const std::vector<Sequence>& sequences, int y_alphabet_size) {
  if (sequences.empty()) throw ValidationError("baum_welch: empty sequence list");
  for (const Sequence& seq : sequences) {
    if (seq.empty()) throw ValidationError("baum_welch: empty sequence");
    for (Symbol s : seq)
      if (s < 0 || s >= y_alphabet_size) throw ValidationError("baum_welch: symbol out of range");
  }
}

}  // namespace

BaumWelchResult baum_welch(const std::vector<Sequence>& sequences, int y_alphabet_size,
                           const EstimationConfig& config) {
  validate_sequences(sequences, y_alphabet_size);
  if (config.hidden_size < 1) throw ValidationError("baum_welch: hidden_size must be >= 1");
  if (!(config.floor_value > 0.0)) throw ValidationError("baum_welch: floor must be > 0");
  if (!(config.tol > 0.0)) throw ValidationError("baum_welch: tol must be > 0");
  if (config.max_iters < 1) throw ValidationError("baum_welch: max_iters must be >= 1");
  const int h = config.hidden_size;
  const int ys = y_alphabet_size;
  const std::size_t d = static_cast<std::size_t>(h) * static_cast<std::size_t>(ys);
  if (static_cast<double>(d) * config.floor_value > 1.0 + 1e-15)
    throw Degenerate("baum_welch: floor mass H*|Y|*floor exceeds 1");

  BaumWelchResult result;
  PackedHmm& hmm = result.pi_hat;
  hmm.num_states = h;
  hmm.num_obs = ys;
  hmm.initial_state = 0;
  hmm.kernel.resize(d * static_cast<std::size_t>(h));

  // Uniform start with +-10% multiplicative jitter to break symmetry, then
  // the same floor projection the M-step uses.
  Rng rng(derive_seed(config.seed, 0));
  std::vector<double> jitter(d);
  for (int sp = 0; sp < h; ++sp) {
    for (std::size_t i = 0; i < d; ++i) jitter[i] = 1.0 + 0.2 * (rng.uniform() - 0.5);
    waterfill_row(jitter.data(), d, config.floor_value,
                  hmm.kernel.data() + static_cast<std::size_t>(sp) * d);
  }

  std::vector<double> counts(hmm.kernel.size());
  std::vector<double> alpha;       // scaled forward rows, one per time step
  std::vector<double> scale;       // per-step normalizers
  std::vector<double> beta(h);     // scaled backward, current step
  std::vector<double> beta_next(h);

  for (int iter = 1; iter <= config.max_iters; ++iter) {
    std::fill(counts.begin(), counts.end(), 0.0);
    KahanSum loglik;
    for (const Sequence& seq : sequences) {
      const std::size_t t_len = seq.size();
      alpha.assign(t_len * static_cast<std::size_t>(h), 0.0);
      scale.assign(t_len, 0.0);
      {
        const double* row =
            hmm.kernel.data() +
            (static_cast<std::size_t>(hmm.initial_state) * ys + static_cast<std::size_t>(seq[0])) *
                h;
        double tot = 0.0;
        for (int s = 0; s < h; ++s) tot += row[s];
        scale[0] = tot;
        for (int s = 0; s < h; ++s) alpha[static_cast<std::size_t>(s)] = row[s] / tot;
      }
      for (std::size_t t = 1; t < t_len; ++t) {
        double* cur = alpha.data() + t * static_cast<std::size_t>(h);
        const double* prev = cur - h;
        for (int sp = 0; sp < h; ++sp) {
          const double w = prev[sp];
          const double* row = hmm.kernel.data() +
                              (static_cast<std::size_t>(sp) * ys +
                               static_cast<std::size_t>(seq[t])) *
                                  h;
          for (int s = 0; s < h; ++s) cur[s] += w * row[s];
        }
        double tot = 0.0;
        for (int s = 0; s < h; ++s) tot += cur[s];
        scale[t] = tot;
        for (int s = 0; s < h; ++s) cur[s] /= tot;
      }
      for (std::size_t t = 0; t < t_len; ++t) loglik.add(std::log(scale[t]));

      // Backward pass with transition-count accumulation on the fly.
      std::fill(beta.begin(), beta.end(), 1.0);
      for (std::size_t t = t_len; t-- > 0;) {
        if (t > 0) {
          const double* prev = alpha.data() + (t - 1) * static_cast<std::size_t>(h);
          for (int sp = 0; sp < h; ++sp) {
            const std::size_t base =
                (static_cast<std::size_t>(sp) * ys + static_cast<std::size_t>(seq[t])) * h;
            const double w = prev[sp] / scale[t];
            for (int s = 0; s < h; ++s) counts[base + s] += w * hmm.kernel[base + s] * beta[s];
          }
        } else {
          const double* cur = alpha.data();
          const std::size_t base =
              (static_cast<std::size_t>(hmm.initial_state) * ys + static_cast<std::size_t>(seq[0])) *
              h;
          for (int s = 0; s < h; ++s) counts[base + s] += cur[s] * beta[s];
        }
        if (t > 0) {
          std::swap(beta, beta_next);
          std::fill(beta.begin(), beta.end(), 0.0);
          for (int sp = 0; sp < h; ++sp) {
            const double* row = hmm.kernel.data() +
                                (static_cast<std::size_t>(sp) * ys +
                                 static_cast<std::size_t>(seq[t])) *
                                    h;
            double acc = 0.0;
            for (int s = 0; s < h; ++s) acc += row[s] * beta_next[s];
            beta[sp] = acc / scale[t];
          }
        }
      }
    }
    result.loglik_trace.push_back(loglik.sum);
    result.iterations = iter;

    for (int sp = 0; sp < h; ++sp) {
      const double* c = counts.data() + static_cast<std::size_t>(sp) * d;
      double tot = 0.0;
      for (std::size_t i = 0; i < d; ++i) tot += c[i];
      if (tot <= 0.0) continue;  // state never visited: keep its current row
      waterfill_row(c, d, config.floor_value,
                    hmm.kernel.data() + static_cast<std::size_t>(sp) * d);
    }

    const std::size_t k = result.loglik_trace.size();
    if (k >= 2 && result.loglik_trace[k - 1] - result.loglik_trace[k - 2] <= config.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

double hmm_log_likelihood(const PackedHmm& hmm, const std::vector<Sequence>& sequences) {
  KahanSum total;
  for (const Sequence& seq : sequences)
    total.add(hmm_log_forward(hmm, seq.data(), static_cast<int>(seq.size())));
  return total.sum;
}

std::size_t plug_in_decode(const PackedHmm& pi_hat, const Codebook& codebook, const Sequence& z,
                           int z_alphabet_size) {
  if (codebook.words.empty()) throw ValidationError("plug_in_decode: empty codebook");
  if (static_cast<int>(z.size()) != codebook.n)
    throw LengthMismatch("plug_in_decode: z length differs from codebook n");
  JointParser parser(pi_hat.num_obs, z_alphabet_size);
  PhraseParse parse;
  std::size_t best = 0;
  double best_u = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < codebook.words.size(); ++i) {
    const Sequence& w = codebook.words[i];
    const double ly = hmm_log_forward(pi_hat, w.data(), static_cast<int>(w.size()));
    parser.parse_into(w, z, parse);
    const double u = ly == kNegInf ? std::numeric_limits<double>::infinity()
                                   : log2_from_ln(ly) + v_metric(parse);
    if (i == 0 || u < best_u || (u == best_u && w < codebook.words[best])) {
      best = i;
      best_u = u;
    }
  }
  return best;
}

PlugInComparison compare_plug_in_monte_carlo(const SystemModel& model, const PackedHmm& pi_hat,
                                             int n, double rate, long long trials,
                                             std::uint64_t seed, int workers) {
  if (n < 1) throw DomainError("compare_plug_in_monte_carlo: n must be >= 1");
  if (trials < 1) throw ValidationError("compare_plug_in_monte_carlo: trials must be >= 1");
  if (pi_hat.num_obs != model.alphabets.y_size)
    throw ValidationError("compare_plug_in_monte_carlo: fitted alphabet differs from model");
  const std::size_t m_count = message_count(n, rate);
  if (workers < 1) workers = 1;
  if (static_cast<long long>(workers) > trials) workers = static_cast<int>(trials);

  std::vector<long long> err_true(static_cast<std::size_t>(workers), 0);
  std::vector<long long> err_hat(static_cast<std::size_t>(workers), 0);

  auto run_block = [&](int w, long long lo, long long hi) {
    JointParser parser(model.alphabets.y_size, model.alphabets.z_size);
    PhraseParse parse;
    std::vector<Sequence> words(m_count, Sequence(static_cast<std::size_t>(n)));
    Sequence x_scratch(static_cast<std::size_t>(n));
    Sequence z(static_cast<std::size_t>(n));
    std::vector<double> u_true(m_count);
    std::vector<double> u_hat(m_count);
    const double inf = std::numeric_limits<double>::infinity();
    for (long long t = lo; t < hi; ++t) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
      for (std::size_t i = 0; i < m_count; ++i)
        sample_xy_into(model, n, rng, x_scratch, words[i]);
      const std::size_t m = rng.index(m_count);
      sample_xz_given_y_into(model, words[m], rng, x_scratch, z);
      for (std::size_t i = 0; i < m_count; ++i) {
        parser.parse_into(words[i], z, parse);
        const double v = v_metric(parse);
        const double lt = log_prob_y(model.pi, words[i]);
        const double lh =
            hmm_log_forward(pi_hat, words[i].data(), static_cast<int>(words[i].size()));
        u_true[i] = lt == kNegInf ? inf : log2_from_ln(lt) + v;
        u_hat[i] = lh == kNegInf ? inf : log2_from_ln(lh) + v;
      }
      auto beaten = [&](const std::vector<double>& u) {
        for (std::size_t i = 0; i < m_count; ++i) {
          if (i == m) continue;
          if (u[i] < u[m]) return true;
          if (u[i] == u[m] && !(words[m] < words[i])) return true;
        }
        return false;
      };
      if (beaten(u_true)) ++err_true[static_cast<std::size_t>(w)];
      if (beaten(u_hat)) ++err_hat[static_cast<std::size_t>(w)];
    }
  };

  if (workers == 1) {
    run_block(0, 0, trials);
  } else {
    std::vector<std::thread> pool;
    const long long per = (trials + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const long long lo = static_cast<long long>(w) * per;
      const long long hi = std::min(trials, lo + per);
      if (lo >= hi) break;
      pool.emplace_back(run_block, w, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  auto make_report = [&](long long errs, std::string method) {
    ErrorProbReport rep;
    rep.kind = DecoderKind::universal();
    rep.value = static_cast<double>(errs) / static_cast<double>(trials);
    rep.method = std::move(method);
    rep.n = n;
    rep.rate = rate;
    rep.M = m_count;
    rep.trials = trials;
    rep.errors = errs;
    const auto [lo, hi] = wilson_interval(errs, trials);
    rep.ci_low = lo;
    rep.ci_high = hi;
    rep.seed = seed;
    return rep;
  };
  long long te = 0;
  long long he = 0;
  for (long long v : err_true) te += v;
  for (long long v : err_hat) he += v;
  PlugInComparison cmp;
  cmp.true_universal = make_report(te, "monte-carlo");
  cmp.plug_in = make_report(he, "monte-carlo-plug-in");
  return cmp;
}

}  // namespace udlab
