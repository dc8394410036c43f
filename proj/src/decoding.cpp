#include "udlab/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace udlab {

namespace {

constexpr std::uint64_t kEnumGuard = 1ULL << 24;

}  // namespace

std::string DecoderKind::name() const {
  switch (family) {
    case DecoderFamily::ML:
      return "ml";
    case DecoderFamily::Universal:
      return "universal";
    case DecoderFamily::Threshold:
      return "threshold";
  }
  return "unknown";
}

long long message_count(int n, double rate) {
  if (n < 1) throw DomainError("message_count: n must be >= 1");
  if (rate < 0.0 || !std::isfinite(rate)) throw DomainError("message_count: rate must be >= 0");
  const double v = std::exp(static_cast<double>(n) * rate);
  if (v > 1e15) throw TooLarge("message_count: e^{nR} too large");
  // Back off by a hair so values that are integers up to round-off stay put.
  return static_cast<long long>(std::ceil(v - 1e-9 - 1e-12 * v));
}

Codebook generate_codebook_m(const SystemModel& model, int n, long long M, double rate,
                             std::uint64_t seed) {
  if (M < 1) throw DomainError("generate_codebook: M must be >= 1");
  Codebook book;
  book.n = n;
  book.rate = rate;
  book.M = M;
  book.seed = seed;
  book.words.resize(static_cast<std::size_t>(M));
  Rng rng(derive_seed(seed, 0));
  Sequence x;
  for (auto& w : book.words) sample_xy_into(model, n, rng, x, w);
  return book;
}

Codebook generate_codebook(const SystemModel& model, int n, double rate, std::uint64_t seed) {
  return generate_codebook_m(model, n, message_count(n, rate), rate, seed);
}

double u_metric(const SystemModel& model, const Sequence& y, const Sequence& z) {
  const double ly = log_prob_y(model.pi, y);
  if (ly == kNegInf) throw ConditioningOnNull("u_metric: P(y) = 0");
  const PhraseParse parse = joint_parse(y, z, model.alphabets.y_size, model.alphabets.z_size);
  return log2_from_ln(ly) + v_metric(parse);
}

std::optional<std::size_t> decode(const SystemModel& model, const Codebook& codebook,
                                  const Sequence& z, DecoderKind kind) {
  const std::size_t M = codebook.words.size();
  if (M == 0) throw ValidationError("decode: empty codebook");
  if (kind.family == DecoderFamily::Threshold) {
    if (!(kind.alpha > 1.0)) throw ValidationError("decode: threshold requires alpha > 1");
    if (M == 1) return 0;
    const double log_alpha = std::log(kind.alpha);
    std::vector<double> lcond(M);
    for (std::size_t m = 0; m < M; ++m)
      lcond[m] = log_cond_z_given_y(model.big_pi, model.pi, codebook.words[m], z);
    std::size_t best = 0;
    for (std::size_t m = 1; m < M; ++m)
      if (lcond[m] > lcond[best]) best = m;
    double second = kNegInf;
    for (std::size_t m = 0; m < M; ++m)
      if (m != best) second = std::max(second, lcond[m]);
    if (lcond[best] > log_alpha + second) return best;
    return std::nullopt;
  }

  std::size_t best = 0;
  double best_metric = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    double metric;
    if (kind.family == DecoderFamily::ML) {
      metric = -log_cond_z_given_y(model.big_pi, model.pi, codebook.words[m], z);
    } else {
      metric = u_metric(model, codebook.words[m], z);
    }
    if (m == 0 || metric < best_metric ||
        (metric == best_metric && codebook.words[m] < codebook.words[best])) {
      best = m;
      best_metric = metric;
    }
  }
  return best;
}

double f_of_t(double t, int n, double rate) {
  if (!(t >= -1e-9 && t <= 1.0 + 1e-9)) throw DomainError("f_of_t: t outside [0,1]");
  t = std::min(1.0, std::max(0.0, t));
  const long long M = message_count(n, rate);
  if (M <= 1) return 0.0;
  if (t >= 1.0) return 1.0;
  return -std::expm1(static_cast<double>(M - 1) * std::log1p(-t));
}

RankTable build_rank_table(const SystemModel& model, const Sequence& z, DecoderFamily family) {
  const int n = static_cast<int>(z.size());
  if (n < 1) throw LengthMismatch("build_rank_table: empty z");
  const std::uint64_t count = sequence_count(model.alphabets.y_size, n);
  if (count > kEnumGuard) throw TooLarge("build_rank_table: |Y|^n exceeds enumeration guard");

  RankTable table;
  table.n = n;
  table.family = family;
  table.metric.resize(count);
  table.log_py.resize(count);
  table.log_pyz.resize(count);

  JointParser parser(model.alphabets.y_size, model.alphabets.z_size);
  PhraseParse parse;
  Sequence y;
  for (std::uint64_t code = 0; code < count; ++code) {
    decode_sequence(code, model.alphabets.y_size, n, y);
    const double ly = log_prob_y(model.pi, y);
    const double lyz = log_prob_yz(model.big_pi, y, z);
    table.log_py[code] = ly;
    table.log_pyz[code] = lyz;
    if (ly == kNegInf) {
      table.metric[code] = std::numeric_limits<double>::infinity();
      continue;
    }
    if (family == DecoderFamily::Universal) {
      parser.parse_into(y, z, parse);
      table.metric[code] = log2_from_ln(ly) + v_metric(parse);
    } else {
      table.metric[code] =
          lyz == kNegInf ? std::numeric_limits<double>::infinity() : -(lyz - ly);
    }
  }

  table.order.resize(count);
  std::iota(table.order.begin(), table.order.end(), 0u);
  std::sort(table.order.begin(), table.order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (table.metric[a] != table.metric[b]) return table.metric[a] < table.metric[b];
    return a < b;
  });
  table.prefix_prob.resize(count);
  table.rank_of_code.resize(count);
  double acc = 0.0;
  for (std::uint64_t r = 0; r < count; ++r) {
    const std::uint32_t code = table.order[r];
    const double lp = table.log_py[code];
    acc += lp == kNegInf ? 0.0 : std::exp(lp);
    table.prefix_prob[r] = acc;
    table.rank_of_code[code] = static_cast<std::uint32_t>(r);
  }
  return table;
}

double set_prob_prefix(const RankTable& table, std::uint64_t y_code) {
  return table.prefix_prob[table.rank_of_code[y_code]];
}

double set_prob_threshold(const RankTable& table, std::uint64_t y_code, double alpha) {
  if (table.family == DecoderFamily::Universal)
    throw DomainError("set_prob_threshold: table must rank by conditional likelihood");
  if (!(alpha > 1.0)) throw ValidationError("set_prob_threshold: alpha must be > 1");
  const double cutoff = table.metric[y_code] + std::log(alpha);
  // All entries with -ln P(z|y') <= cutoff; ranks are sorted by that metric.
  std::size_t lo = 0, hi = table.order.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (table.metric[table.order[mid]] <= cutoff)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo == 0 ? 0.0 : table.prefix_prob[lo - 1];
}

double pairwise_set_prob(const SystemModel& model, const Sequence& z, DecoderKind kind,
                         const Sequence& y) {
  if (y.size() != z.size()) throw LengthMismatch("pairwise_set_prob: y and z lengths differ");
  const RankTable table = build_rank_table(
      model, z, kind.family == DecoderFamily::Universal ? DecoderFamily::Universal
                                                        : DecoderFamily::ML);
  const std::uint64_t code = encode_sequence(y, model.alphabets.y_size);
  if (kind.family == DecoderFamily::Threshold) return set_prob_threshold(table, code, kind.alpha);
  return set_prob_prefix(table, code);
}

ErrorProbReport exact_avg_error(const SystemModel& model, int n, double rate, DecoderKind kind) {
  if (n < 1) throw DomainError("exact_avg_error: n must be >= 1");
  const std::uint64_t y_count = sequence_count(model.alphabets.y_size, n);
  const std::uint64_t z_count = sequence_count(model.alphabets.z_size, n);
  if (y_count > kEnumGuard / z_count)
    throw TooLarge("exact_avg_error: |Y|^n * |Z|^n exceeds enumeration guard");
  const long long M = message_count(n, rate);

  double total = 0.0;
  Sequence z;
  for (std::uint64_t zc = 0; zc < z_count; ++zc) {
    decode_sequence(zc, model.alphabets.z_size, n, z);
    const RankTable table = build_rank_table(
        model, z, kind.family == DecoderFamily::Universal ? DecoderFamily::Universal
                                                          : DecoderFamily::ML);
    for (std::uint64_t yc = 0; yc < y_count; ++yc) {
      const double lyz = table.log_pyz[yc];
      if (lyz == kNegInf) continue;
      const double t = kind.family == DecoderFamily::Threshold
                           ? set_prob_threshold(table, yc, kind.alpha)
                           : set_prob_prefix(table, yc);
      total += std::exp(lyz) * f_of_t(t, n, rate);
    }
  }

  ErrorProbReport report;
  report.kind = kind;
  // The mathematical value is a probability; keep round-off from pushing it
  // past 1 when every term saturates.
  report.value = std::min(total, 1.0);
  report.method = "exact-enumeration";
  report.n = n;
  report.rate = rate;
  report.M = M;
  return report;
}

double exact_f_average(const SystemModel& model, int n, double rate,
                       const std::function<double(const Sequence&, const Sequence&)>& metric) {
  const std::uint64_t y_count = sequence_count(model.alphabets.y_size, n);
  const std::uint64_t z_count = sequence_count(model.alphabets.z_size, n);
  if (y_count > kEnumGuard / z_count)
    throw TooLarge("exact_f_average: |Y|^n * |Z|^n exceeds enumeration guard");

  std::vector<double> prob_y(y_count);
  Sequence y, z;
  for (std::uint64_t yc = 0; yc < y_count; ++yc) {
    decode_sequence(yc, model.alphabets.y_size, n, y);
    const double ly = log_prob_y(model.pi, y);
    prob_y[yc] = ly == kNegInf ? 0.0 : std::exp(ly);
  }

  double total = 0.0;
  std::vector<std::pair<double, std::uint32_t>> keyed(y_count);
  std::vector<double> prefix(y_count);
  std::vector<std::uint32_t> rank_of(y_count);
  for (std::uint64_t zc = 0; zc < z_count; ++zc) {
    decode_sequence(zc, model.alphabets.z_size, n, z);
    for (std::uint64_t yc = 0; yc < y_count; ++yc) {
      decode_sequence(yc, model.alphabets.y_size, n, y);
      keyed[yc] = {metric(y, z), static_cast<std::uint32_t>(yc)};
    }
    std::sort(keyed.begin(), keyed.end());
    double acc = 0.0;
    for (std::uint64_t r = 0; r < y_count; ++r) {
      acc += prob_y[keyed[r].second];
      prefix[r] = acc;
      rank_of[keyed[r].second] = static_cast<std::uint32_t>(r);
    }
    for (std::uint64_t yc = 0; yc < y_count; ++yc) {
      if (prob_y[yc] == 0.0) continue;
      decode_sequence(yc, model.alphabets.y_size, n, y);
      const double lyz = log_prob_yz(model.big_pi, y, z);
      if (lyz == kNegInf) continue;
      total += std::exp(lyz) * f_of_t(std::min(prefix[rank_of[yc]], 1.0), n, rate);
    }
  }
  return std::min(total, 1.0);
}

std::pair<double, double> wilson_interval(long long k, long long m) {
  if (m < 1) throw DomainError("wilson_interval: trials must be >= 1");
  if (k < 0 || k > m) throw DomainError("wilson_interval: successes must lie in [0, trials]");
  const double z = 1.959963984540054;
  const double nn = static_cast<double>(m);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  // The boundary cases are exact; round-off must not pull them inward.
  const double low = k == 0 ? 0.0 : std::max(0.0, center - half);
  const double high = k == m ? 1.0 : std::min(1.0, center + half);
  return {low, high};
}

namespace {

struct TrialEngine {
  const SystemModel& model;
  int n;
  long long M;
  bool need_cond;
  bool need_u;
  JointParser parser;
  PhraseParse parse;
  std::vector<Sequence> words;
  Sequence x_scratch;
  Sequence z;
  std::vector<double> nlcond;  // -ln P(z|y_m): smaller is better, like u
  std::vector<double> u;

  TrialEngine(const SystemModel& m, int n_, long long M_, bool cond, bool uu)
      : model(m),
        n(n_),
        M(M_),
        need_cond(cond),
        need_u(uu),
        parser(m.alphabets.y_size, m.alphabets.z_size),
        words(static_cast<std::size_t>(M_)),
        nlcond(static_cast<std::size_t>(M_)),
        u(static_cast<std::size_t>(M_)) {}

  // Returns the transmitted message index; fills metric arrays.
  std::size_t run(std::uint64_t trial_seed) {
    Rng rng(trial_seed);
    for (auto& w : words) sample_xy_into(model, n, rng, x_scratch, w);
    const std::size_t m = rng.index(words.size());
    sample_xz_given_y_into(model, words[m], rng, x_scratch, z);
    for (std::size_t i = 0; i < words.size(); ++i) {
      const double ly = log_prob_y(model.pi, words[i]);
      if (need_cond) {
        const double lyz = log_prob_yz(model.big_pi, words[i], z);
        nlcond[i] = (ly == kNegInf || lyz == kNegInf)
                        ? std::numeric_limits<double>::infinity()
                        : -(lyz - ly);
      }
      if (need_u) {
        parser.parse_into(words[i], z, parse);
        u[i] = ly == kNegInf ? std::numeric_limits<double>::infinity()
                             : log2_from_ln(ly) + v_metric(parse);
      }
    }
    return m;
  }

  // Union error event: some other codeword ranks at least as well under a
  // smaller-is-better metric with (metric, lexicographic y) ordering.
  bool error_rank(const std::vector<double>& metric, std::size_t m) const {
    const double mv = metric[m];
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i == m) continue;
      if (metric[i] < mv) return true;
      if (metric[i] == mv && !(words[m] < words[i])) return true;
    }
    return false;
  }

  // Union event for the threshold decoder: some other codeword has
  // P(z|y') >= P(z|y_m)/alpha, i.e. -ln P(z|y') <= -ln P(z|y_m) + ln alpha.
  bool error_threshold(std::size_t m, double log_alpha) const {
    const double cutoff = nlcond[m] + log_alpha;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i == m) continue;
      if (nlcond[i] <= cutoff) return true;
    }
    return false;
  }
};

}  // namespace

std::vector<ErrorProbReport> monte_carlo_error_multi(const SystemModel& model, int n, double rate,
                                                     const std::vector<DecoderKind>& kinds,
                                                     long long trials, std::uint64_t seed,
                                                     int workers) {
  if (trials < 1) throw DomainError("monte_carlo_error: trials must be >= 1");
  if (kinds.empty()) throw DomainError("monte_carlo_error: no decoder kinds given");
  if (workers < 1) workers = 1;
  if (static_cast<long long>(workers) > trials) workers = static_cast<int>(trials);
  const long long M = message_count(n, rate);

  bool need_cond = false;
  bool need_u = false;
  for (const auto& k : kinds) {
    if (k.family == DecoderFamily::Universal)
      need_u = true;
    else
      need_cond = true;
    if (k.family == DecoderFamily::Threshold && !(k.alpha > 1.0))
      throw ValidationError("monte_carlo_error: threshold requires alpha > 1");
  }

  std::vector<std::vector<long long>> counts(static_cast<std::size_t>(workers),
                                             std::vector<long long>(kinds.size(), 0));
  auto run_block = [&](int widx, long long lo, long long hi) {
    TrialEngine engine(model, n, M, need_cond, need_u);
    auto& local = counts[static_cast<std::size_t>(widx)];
    for (long long t = lo; t < hi; ++t) {
      const std::size_t m = engine.run(derive_seed(seed, static_cast<std::uint64_t>(t)));
      for (std::size_t k = 0; k < kinds.size(); ++k) {
        bool err;
        switch (kinds[k].family) {
          case DecoderFamily::ML:
            err = engine.error_rank(engine.nlcond, m);
            break;
          case DecoderFamily::Universal:
            err = engine.error_rank(engine.u, m);
            break;
          default:
            err = engine.error_threshold(m, std::log(kinds[k].alpha));
            break;
        }
        if (err) ++local[k];
      }
    }
  };

  if (workers == 1) {
    run_block(0, 0, trials);
  } else {
    std::vector<std::thread> pool;
    const long long chunk = (trials + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const long long lo = static_cast<long long>(w) * chunk;
      const long long hi = std::min(trials, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(run_block, w, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  std::vector<ErrorProbReport> reports;
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    long long errs = 0;
    for (const auto& c : counts) errs += c[k];
    ErrorProbReport r;
    r.kind = kinds[k];
    r.value = static_cast<double>(errs) / static_cast<double>(trials);
    r.method = "monte-carlo";
    r.n = n;
    r.rate = rate;
    r.M = M;
    r.trials = trials;
    r.errors = errs;
    const auto ci = wilson_interval(errs, trials);
    r.ci_low = ci.first;
    r.ci_high = ci.second;
    r.seed = seed;
    reports.push_back(std::move(r));
  }
  return reports;
}

ErrorProbReport monte_carlo_error(const SystemModel& model, int n, double rate, DecoderKind kind,
                                  long long trials, std::uint64_t seed, int workers) {
  return monte_carlo_error_multi(model, n, rate, {kind}, trials, seed, workers)[0];
}

}  // namespace udlab
