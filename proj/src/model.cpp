#include "udlab/model.hpp"

#include <algorithm>
#include <cmath>

namespace udlab {

namespace {

// Validates that each row of `table` (rows of length `row_len`) sums to 1
// within 1e-12 and has nonnegative entries, then renormalizes the row exactly.
void validate_rows(std::vector<double>& table, std::size_t row_len, const char* kernel_name) {
  if (row_len == 0 || table.size() % row_len != 0)
    throw ValidationError(std::string(kernel_name) + ": table size is not a multiple of row size");
  const std::size_t rows = table.size() / row_len;
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::size_t k = 0; k < row_len; ++k) {
      const double p = table[r * row_len + k];
      if (!(p >= 0.0) || !std::isfinite(p))
        throw ValidationError(std::string(kernel_name) + ": negative or non-finite entry in row " +
                              std::to_string(r));
      sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
      throw ValidationError(std::string(kernel_name) + ": row " + std::to_string(r) +
                            " sums to " + std::to_string(sum) + ", expected 1");
    if (sum != 1.0) {
      const double inv = 1.0 / sum;
      for (std::size_t k = 0; k < row_len; ++k) table[r * row_len + k] *= inv;
    }
    // Push residual round-off into the largest entry until the row sums to
    // exactly 1, so renormalizing an already-normalized row is a no-op.
    for (int pass = 0; pass < 4; ++pass) {
      double resum = 0.0;
      std::size_t largest = 0;
      for (std::size_t k = 0; k < row_len; ++k) {
        resum += table[r * row_len + k];
        if (table[r * row_len + k] > table[r * row_len + largest]) largest = k;
      }
      if (1.0 - resum == 0.0) break;
      table[r * row_len + largest] += 1.0 - resum;
    }
  }
}

thread_local std::vector<double> tl_alpha;
thread_local std::vector<double> tl_next;
thread_local std::vector<int> tl_obs;

}  // namespace

SourceKernel make_source_kernel(int x_size, int omega_size, std::vector<double> table) {
  if (x_size < 1 || omega_size < 1) throw ValidationError("source kernel: sizes must be >= 1");
  const std::size_t expect =
      static_cast<std::size_t>(omega_size) * x_size * omega_size;
  if (table.size() != expect) throw ValidationError("source kernel: wrong table size");
  validate_rows(table, static_cast<std::size_t>(x_size) * omega_size, "source kernel");
  return SourceKernel{x_size, omega_size, std::move(table)};
}

ChannelKernelV make_channel_v(int x_size, int y_size, int theta_size, std::vector<double> table) {
  if (x_size < 1 || y_size < 1 || theta_size < 1)
    throw ValidationError("channel V: sizes must be >= 1");
  const std::size_t expect =
      static_cast<std::size_t>(x_size) * theta_size * y_size * theta_size;
  if (table.size() != expect) throw ValidationError("channel V: wrong table size");
  validate_rows(table, static_cast<std::size_t>(y_size) * theta_size, "channel V");
  return ChannelKernelV{x_size, y_size, theta_size, std::move(table)};
}

ChannelKernelW make_channel_w(int x_size, int z_size, int sigma_size, std::vector<double> table) {
  if (x_size < 1 || z_size < 1 || sigma_size < 1)
    throw ValidationError("channel W: sizes must be >= 1");
  const std::size_t expect =
      static_cast<std::size_t>(x_size) * sigma_size * z_size * sigma_size;
  if (table.size() != expect) throw ValidationError("channel W: wrong table size");
  validate_rows(table, static_cast<std::size_t>(z_size) * sigma_size, "channel W");
  return ChannelKernelW{x_size, z_size, sigma_size, std::move(table)};
}

double PackedHmm::min_entry() const {
  double m = 1.0;
  for (double p : kernel) m = std::min(m, p);
  return m;
}

InducedKernelPi build_pi(const SourceKernel& G, const ChannelKernelV& V, const StateSpec& states) {
  if (G.x_size != V.x_size) throw ValidationError("build_pi: G and V disagree on |X|");
  InducedKernelPi pi;
  pi.y_size = V.y_size;
  pi.theta_size = V.theta_size;
  pi.omega_size = G.omega_size;
  const int S = pi.theta_size * pi.omega_size;
  pi.hmm.num_states = S;
  pi.hmm.num_obs = pi.y_size;
  pi.hmm.initial_state = pi.pack_state(states.theta0, states.omega0);
  pi.hmm.kernel.assign(static_cast<std::size_t>(S) * pi.y_size * S, 0.0);
  for (int tp = 0; tp < pi.theta_size; ++tp)
    for (int wp = 0; wp < pi.omega_size; ++wp)
      for (int y = 0; y < pi.y_size; ++y)
        for (int th = 0; th < pi.theta_size; ++th)
          for (int w = 0; w < pi.omega_size; ++w) {
            double sum = 0.0;
            for (int x = 0; x < G.x_size; ++x) sum += G.at(x, w, wp) * V.at(y, th, x, tp);
            const int sp = pi.pack_state(tp, wp);
            const int s = pi.pack_state(th, w);
            pi.hmm.kernel[(static_cast<std::size_t>(sp) * pi.y_size + y) * S + s] = sum;
          }
  pi.pi_min = pi.hmm.min_entry();
  return pi;
}

JointKernelBigPi build_big_pi(const SourceKernel& G, const ChannelKernelV& V,
                              const ChannelKernelW& W, const StateSpec& states) {
  if (G.x_size != V.x_size || G.x_size != W.x_size)
    throw ValidationError("build_big_pi: kernels disagree on |X|");
  JointKernelBigPi big;
  big.y_size = V.y_size;
  big.z_size = W.z_size;
  big.theta_size = V.theta_size;
  big.sigma_size = W.sigma_size;
  big.omega_size = G.omega_size;
  big.K = static_cast<long long>(big.theta_size) * big.sigma_size * big.omega_size;
  const int S = static_cast<int>(big.K);
  const int O = big.y_size * big.z_size;
  big.hmm.num_states = S;
  big.hmm.num_obs = O;
  big.hmm.initial_state = big.pack_state(states.theta0, states.sigma0, states.omega0);
  big.hmm.kernel.assign(static_cast<std::size_t>(S) * O * S, 0.0);
  for (int tp = 0; tp < big.theta_size; ++tp)
    for (int gp = 0; gp < big.sigma_size; ++gp)
      for (int wp = 0; wp < big.omega_size; ++wp) {
        const int sp = big.pack_state(tp, gp, wp);
        for (int y = 0; y < big.y_size; ++y)
          for (int z = 0; z < big.z_size; ++z)
            for (int th = 0; th < big.theta_size; ++th)
              for (int sg = 0; sg < big.sigma_size; ++sg)
                for (int w = 0; w < big.omega_size; ++w) {
                  double sum = 0.0;
                  for (int x = 0; x < G.x_size; ++x)
                    sum += G.at(x, w, wp) * V.at(y, th, x, tp) * W.at(z, sg, x, gp);
                  const int s = big.pack_state(th, sg, w);
                  big.hmm.kernel[(static_cast<std::size_t>(sp) * O + big.pack_obs(y, z)) * S + s] =
                      sum;
                }
      }
  return big;
}

namespace {

PairStepSampler build_xy_sampler(const SourceKernel& G, const ChannelKernelV& V,
                                 const StateSpec& states) {
  PairStepSampler ps;
  const int xs = G.x_size;
  const int ws = states.omega_size;
  const int ys = V.y_size;
  const int ts = states.theta_size;
  ps.row_len = xs * ws * ys * ts;
  ps.theta_size = ts;
  ps.rows.assign(static_cast<std::size_t>(ws) * ts * ps.row_len, 0.0);
  ps.dec_x.resize(static_cast<std::size_t>(ps.row_len));
  ps.dec_omega.resize(static_cast<std::size_t>(ps.row_len));
  ps.dec_y.resize(static_cast<std::size_t>(ps.row_len));
  ps.dec_theta.resize(static_cast<std::size_t>(ps.row_len));
  for (int x = 0; x < xs; ++x)
    for (int w = 0; w < ws; ++w)
      for (int y = 0; y < ys; ++y)
        for (int th = 0; th < ts; ++th) {
          const int idx = ((x * ws + w) * ys + y) * ts + th;
          ps.dec_x[static_cast<std::size_t>(idx)] = x;
          ps.dec_omega[static_cast<std::size_t>(idx)] = w;
          ps.dec_y[static_cast<std::size_t>(idx)] = y;
          ps.dec_theta[static_cast<std::size_t>(idx)] = th;
        }
  for (int wp = 0; wp < ws; ++wp)
    for (int tp = 0; tp < ts; ++tp) {
      double* row = &ps.rows[static_cast<std::size_t>(wp * ts + tp) * ps.row_len];
      for (int x = 0; x < xs; ++x)
        for (int w = 0; w < ws; ++w) {
          const double g = G.at(x, w, wp);
          for (int y = 0; y < ys; ++y)
            for (int th = 0; th < ts; ++th)
              row[((x * ws + w) * ys + y) * ts + th] = g * V.at(y, th, x, tp);
        }
    }
  return ps;
}

}  // namespace

SystemModel make_system_model(AlphabetSpec alphabets, StateSpec states, SourceKernel G,
                              ChannelKernelV V, ChannelKernelW W) {
  if (alphabets.x_size != G.x_size || alphabets.x_size != V.x_size || alphabets.x_size != W.x_size)
    throw ValidationError("model: |X| disagrees between alphabets and kernels");
  if (alphabets.y_size != V.y_size || alphabets.z_size != W.z_size)
    throw ValidationError("model: output alphabet sizes disagree with kernels");
  if (states.omega_size != G.omega_size || states.theta_size != V.theta_size ||
      states.sigma_size != W.sigma_size)
    throw ValidationError("model: state-space sizes disagree with kernels");
  auto valid_state = [](int v, int size) { return v >= 0 && v < size; };
  if (!valid_state(states.omega0, states.omega_size) ||
      !valid_state(states.sigma0, states.sigma_size) ||
      !valid_state(states.theta0, states.theta_size))
    throw ValidationError("model: initial state out of range");
  SystemModel m;
  m.alphabets = alphabets;
  m.states = states;
  m.G = std::move(G);
  m.V = std::move(V);
  m.W = std::move(W);
  m.pi = build_pi(m.G, m.V, m.states);
  m.big_pi = build_big_pi(m.G, m.V, m.W, m.states);
  m.xy_sampler = build_xy_sampler(m.G, m.V, m.states);
  return m;
}

double check_positivity(const InducedKernelPi& pi) {
  if (!(pi.pi_min > 0.0))
    throw PositivityViolation("pi has a zero entry; positivity assumption does not hold");
  return pi.pi_min;
}

double hmm_log_forward(const PackedHmm& hmm, const int* obs, int n) {
  const int S = hmm.num_states;
  tl_alpha.assign(static_cast<std::size_t>(S), 0.0);
  tl_next.assign(static_cast<std::size_t>(S), 0.0);
  tl_alpha[static_cast<std::size_t>(hmm.initial_state)] = 1.0;
  // Scale factors are folded into a running product and flushed to log space
  // only near the underflow edge, so the common path pays one std::log total
  // instead of one per step.
  double log_total = 0.0;
  double scale = 1.0;
  for (int i = 0; i < n; ++i) {
    const int o = obs[i];
    if (o < 0 || o >= hmm.num_obs) throw DomainError("hmm forward: observation out of range");
    std::fill(tl_next.begin(), tl_next.end(), 0.0);
    for (int sp = 0; sp < S; ++sp) {
      const double a = tl_alpha[static_cast<std::size_t>(sp)];
      if (a == 0.0) continue;
      const double* row = &hmm.kernel[(static_cast<std::size_t>(sp) * hmm.num_obs + o) * S];
      for (int s = 0; s < S; ++s) tl_next[static_cast<std::size_t>(s)] += a * row[s];
    }
    double sum = 0.0;
    for (int s = 0; s < S; ++s) sum += tl_next[static_cast<std::size_t>(s)];
    if (!(sum > 0.0)) return kNegInf;
    const double inv = 1.0 / sum;
    for (int s = 0; s < S; ++s) tl_alpha[static_cast<std::size_t>(s)] = tl_next[static_cast<std::size_t>(s)] * inv;
    scale *= sum;
    if (scale < 1e-280) {
      log_total += std::log(scale);
      scale = 1.0;
    }
  }
  return log_total + std::log(scale);
}

double log_prob_y(const InducedKernelPi& pi, const Sequence& y) {
  return hmm_log_forward(pi.hmm, y.data(), static_cast<int>(y.size()));
}

void pack_pair_obs(const JointKernelBigPi& big_pi, const Sequence& y, const Sequence& z,
                   std::vector<int>& out) {
  if (y.size() != z.size()) throw LengthMismatch("pack_pair_obs: y and z lengths differ");
  out.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0 || y[i] >= big_pi.y_size || z[i] < 0 || z[i] >= big_pi.z_size)
      throw DomainError("pack_pair_obs: symbol outside alphabet");
    out[i] = big_pi.pack_obs(y[i], z[i]);
  }
}

double log_prob_yz(const JointKernelBigPi& big_pi, const Sequence& y, const Sequence& z) {
  pack_pair_obs(big_pi, y, z, tl_obs);
  return hmm_log_forward(big_pi.hmm, tl_obs.data(), static_cast<int>(tl_obs.size()));
}

double log_cond_z_given_y(const JointKernelBigPi& big_pi, const InducedKernelPi& pi,
                          const Sequence& y, const Sequence& z) {
  const double ly = log_prob_y(pi, y);
  if (ly == kNegInf) throw ConditioningOnNull("log_cond_z_given_y: P(y) = 0");
  const double lyz = log_prob_yz(big_pi, y, z);
  return lyz - ly;
}

void sample_xy_into(const SystemModel& model, int n, Rng& rng, Sequence& x, Sequence& y) {
  x.resize(static_cast<std::size_t>(n));
  y.resize(static_cast<std::size_t>(n));
  int omega = model.states.omega0;
  int theta = model.states.theta0;
  const PairStepSampler& ps = model.xy_sampler;
  if (!ps.empty()) {
    for (int i = 0; i < n; ++i) {
      const double* row = &ps.rows[static_cast<std::size_t>(omega * ps.theta_size + theta) *
                                   ps.row_len];
      const int idx = rng.categorical(row, ps.row_len);
      x[static_cast<std::size_t>(i)] = ps.dec_x[static_cast<std::size_t>(idx)];
      y[static_cast<std::size_t>(i)] = ps.dec_y[static_cast<std::size_t>(idx)];
      omega = ps.dec_omega[static_cast<std::size_t>(idx)];
      theta = ps.dec_theta[static_cast<std::size_t>(idx)];
    }
    return;
  }
  const int xs = model.alphabets.x_size;
  const int ws = model.states.omega_size;
  const int ys = model.alphabets.y_size;
  const int ts = model.states.theta_size;
  for (int i = 0; i < n; ++i) {
    const double* g_row = &model.G.table[static_cast<std::size_t>(omega) * xs * ws];
    const int gi = rng.categorical(g_row, xs * ws);
    const int xi = gi / ws;
    omega = gi % ws;
    const double* v_row =
        &model.V.table[(static_cast<std::size_t>(xi) * ts + theta) * ys * ts];
    const int vi = rng.categorical(v_row, ys * ts);
    y[static_cast<std::size_t>(i)] = vi / ts;
    theta = vi % ts;
    x[static_cast<std::size_t>(i)] = xi;
  }
}

std::pair<Sequence, Sequence> sample_xy(const SystemModel& model, int n, Rng& rng) {
  Sequence x;
  Sequence y;
  sample_xy_into(model, n, rng, x, y);
  return {std::move(x), std::move(y)};
}

Triple sample_triple(const SystemModel& model, int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("sample_triple: n must be >= 1");
  Rng rng(derive_seed(seed, 0));
  auto [x, y] = sample_xy(model, n, rng);
  Sequence z(static_cast<std::size_t>(n));
  int sigma = model.states.sigma0;
  const int zs = model.alphabets.z_size;
  const int ss = model.states.sigma_size;
  for (int i = 0; i < n; ++i) {
    const double* w_row =
        &model.W.table[(static_cast<std::size_t>(x[static_cast<std::size_t>(i)]) * ss + sigma) *
                       zs * ss];
    const int wi = rng.categorical(w_row, zs * ss);
    z[static_cast<std::size_t>(i)] = wi / ss;
    sigma = wi % ss;
  }
  return Triple{std::move(x), std::move(y), std::move(z)};
}

std::pair<Sequence, Sequence> sample_xz_given_y(const SystemModel& model, const Sequence& y,
                                                Rng& rng) {
  Sequence x;
  Sequence z;
  sample_xz_given_y_into(model, y, rng, x, z);
  return {std::move(x), std::move(z)};
}

void sample_xz_given_y_into(const SystemModel& model, const Sequence& y, Rng& rng, Sequence& x,
                            Sequence& z) {
  const int n = static_cast<int>(y.size());
  const PackedHmm& chain = model.pi.hmm;
  const int S = chain.num_states;
  // Backward filter: beta[i][s] proportional to P(y_{i+1..n} | state_i = s).
  thread_local std::vector<double> beta;
  thread_local std::vector<double> weights;
  beta.assign(static_cast<std::size_t>(n + 1) * S, 1.0);
  for (int i = n - 1; i >= 0; --i) {
    const int o = y[static_cast<std::size_t>(i)];
    if (o < 0 || o >= chain.num_obs) throw ValidationError("sample_xz_given_y: symbol out of range");
    double total = 0.0;
    for (int sp = 0; sp < S; ++sp) {
      const double* row = &chain.kernel[(static_cast<std::size_t>(sp) * chain.num_obs + o) * S];
      double acc = 0.0;
      for (int s = 0; s < S; ++s) acc += row[s] * beta[static_cast<std::size_t>(i + 1) * S + s];
      beta[static_cast<std::size_t>(i) * S + sp] = acc;
      total += acc;
    }
    if (!(total > 0.0)) throw ConditioningOnNull("sample_xz_given_y: P(y) = 0");
    const double inv = 1.0 / total;
    for (int sp = 0; sp < S; ++sp) beta[static_cast<std::size_t>(i) * S + sp] *= inv;
  }

  const int xs = model.alphabets.x_size;
  const int ts = model.states.theta_size;
  const int ws = model.states.omega_size;
  const int zs = model.alphabets.z_size;
  const int ss = model.states.sigma_size;
  x.resize(static_cast<std::size_t>(n));
  z.resize(static_cast<std::size_t>(n));
  weights.assign(static_cast<std::size_t>(xs) * S, 0.0);
  int theta = model.states.theta0;
  int omega = model.states.omega0;
  int sigma = model.states.sigma0;
  for (int i = 0; i < n; ++i) {
    const int yi = y[static_cast<std::size_t>(i)];
    // Joint draw of (x_i, theta_i, omega_i) given the past and y_i..y_n.
    for (int xi = 0; xi < xs; ++xi)
      for (int th = 0; th < ts; ++th)
        for (int w = 0; w < ws; ++w) {
          const int s = th * ws + w;
          weights[static_cast<std::size_t>(xi) * S + s] =
              model.G.at(xi, w, omega) * model.V.at(yi, th, xi, theta) *
              beta[static_cast<std::size_t>(i + 1) * S + s];
        }
    const int pick = rng.categorical(weights.data(), xs * S);
    const int xi = pick / S;
    const int s = pick % S;
    theta = s / ws;
    omega = s % ws;
    x[static_cast<std::size_t>(i)] = xi;
    const double* w_row =
        &model.W.table[(static_cast<std::size_t>(xi) * ss + sigma) * zs * ss];
    const int wi = rng.categorical(w_row, zs * ss);
    z[static_cast<std::size_t>(i)] = wi / ss;
    sigma = wi % ss;
  }
}

namespace {

// Per-phrase transition matrices in log domain: L[i][s'* S + s] is the natural
// log of P(observations in phrase i+1, end state s | start state s').
std::vector<std::vector<double>> phrase_log_matrices(const PackedHmm& hmm, const int* obs,
                                                     const std::vector<int>& boundaries) {
  if (boundaries.size() < 2 || boundaries.front() != 0)
    throw ValidationError("phrase matrices: invalid boundaries");
  const int S = hmm.num_states;
  const int c = static_cast<int>(boundaries.size()) - 1;
  std::vector<std::vector<double>> out(static_cast<std::size_t>(c));
  std::vector<double> mat(static_cast<std::size_t>(S) * S);
  std::vector<double> next(static_cast<std::size_t>(S) * S);
  for (int p = 0; p < c; ++p) {
    const int a = boundaries[static_cast<std::size_t>(p)];
    const int b = boundaries[static_cast<std::size_t>(p + 1)];
    if (b <= a) throw ValidationError("phrase matrices: boundaries not increasing");
    // Identity start, then one kernel slice per observation, rescaled to keep
    // the product in range; the accumulated log scale is added back at the end.
    std::fill(mat.begin(), mat.end(), 0.0);
    for (int s = 0; s < S; ++s) mat[static_cast<std::size_t>(s) * S + s] = 1.0;
    double log_scale = 0.0;
    for (int i = a; i < b; ++i) {
      const int o = obs[i];
      if (o < 0 || o >= hmm.num_obs) throw DomainError("phrase matrices: observation out of range");
      std::fill(next.begin(), next.end(), 0.0);
      for (int sp = 0; sp < S; ++sp)
        for (int m = 0; m < S; ++m) {
          const double v = mat[static_cast<std::size_t>(sp) * S + m];
          if (v == 0.0) continue;
          const double* row = &hmm.kernel[(static_cast<std::size_t>(m) * hmm.num_obs + o) * S];
          for (int s = 0; s < S; ++s) next[static_cast<std::size_t>(sp) * S + s] += v * row[s];
        }
      double mx = 0.0;
      for (double v : next) mx = std::max(mx, v);
      if (mx == 0.0) {
        log_scale = kNegInf;
        std::fill(next.begin(), next.end(), 0.0);
        mat.swap(next);
        break;
      }
      const double inv = 1.0 / mx;
      for (double& v : next) v *= inv;
      log_scale += std::log(mx);
      mat.swap(next);
    }
    auto& L = out[static_cast<std::size_t>(p)];
    L.resize(static_cast<std::size_t>(S) * S);
    for (std::size_t k = 0; k < L.size(); ++k)
      L[k] = mat[k] > 0.0 && log_scale != kNegInf ? std::log(mat[k]) + log_scale : kNegInf;
  }
  return out;
}

}  // namespace

PinnedPath hmm_phrase_viterbi(const PackedHmm& hmm, const int* obs,
                              const std::vector<int>& boundaries) {
  const auto L = phrase_log_matrices(hmm, obs, boundaries);
  const int S = hmm.num_states;
  const int c = static_cast<int>(L.size());
  // Backward best-to-go values, then a forward greedy walk that prefers the
  // smallest state index; this yields the lexicographically smallest argmax.
  std::vector<std::vector<double>> best(static_cast<std::size_t>(c + 1),
                                        std::vector<double>(static_cast<std::size_t>(S), 0.0));
  for (int i = c - 1; i >= 0; --i)
    for (int sp = 0; sp < S; ++sp) {
      double b = kNegInf;
      for (int s = 0; s < S; ++s) {
        const double cand = L[static_cast<std::size_t>(i)][static_cast<std::size_t>(sp) * S + s] +
                            best[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(s)];
        if (cand > b) b = cand;
      }
      best[static_cast<std::size_t>(i)][static_cast<std::size_t>(sp)] = b;
    }
  PinnedPath result;
  result.log_value = best[0][static_cast<std::size_t>(hmm.initial_state)];
  result.states.states.reserve(static_cast<std::size_t>(c));
  int cur = hmm.initial_state;
  for (int i = 0; i < c; ++i) {
    const double target = best[static_cast<std::size_t>(i)][static_cast<std::size_t>(cur)];
    int chosen = 0;
    for (int s = 0; s < S; ++s) {
      const double cand = L[static_cast<std::size_t>(i)][static_cast<std::size_t>(cur) * S + s] +
                          best[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(s)];
      if (cand == target) {
        chosen = s;
        break;
      }
    }
    result.states.states.push_back(chosen);
    cur = chosen;
  }
  return result;
}

double hmm_log_prob_pinned(const PackedHmm& hmm, const int* obs, const std::vector<int>& boundaries,
                           const BoundaryStates& states) {
  const auto L = phrase_log_matrices(hmm, obs, boundaries);
  if (states.states.size() != L.size())
    throw ValidationError("pinned probability: state list length differs from phrase count");
  double total = 0.0;
  int cur = hmm.initial_state;
  for (std::size_t i = 0; i < L.size(); ++i) {
    const int s = states.states[i];
    if (s < 0 || s >= hmm.num_states) throw ValidationError("pinned probability: state out of range");
    total += L[i][static_cast<std::size_t>(cur) * hmm.num_states + s];
    cur = s;
  }
  return total;
}

PinnedPath phrase_viterbi_t_hat(const JointKernelBigPi& big_pi, const Sequence& y,
                                const Sequence& z, const std::vector<int>& boundaries) {
  std::vector<int> obs;
  pack_pair_obs(big_pi, y, z, obs);
  return hmm_phrase_viterbi(big_pi.hmm, obs.data(), boundaries);
}

PinnedPath phrase_viterbi_s_tilde(const InducedKernelPi& pi, const Sequence& y,
                                  const std::vector<int>& boundaries) {
  return hmm_phrase_viterbi(pi.hmm, y.data(), boundaries);
}

double log_prob_y_s(const InducedKernelPi& pi, const Sequence& y,
                    const std::vector<int>& boundaries, const BoundaryStates& s) {
  return hmm_log_prob_pinned(pi.hmm, y.data(), boundaries, s);
}

}  // namespace udlab
