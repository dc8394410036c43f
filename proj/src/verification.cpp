#include "udlab/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <tuple>

namespace udlab {

namespace {

constexpr std::uint64_t kEnumGuard = 1ULL << 24;
constexpr std::size_t kPermGuard = 1ULL << 20;

std::string pair_tag(const Sequence& y, const Sequence& z) {
  return "y=" + sequence_to_string(y) + " z=" + sequence_to_string(z);
}

// left <= right compared on natural-log values with relative tolerance; the
// report carries the linear values.
BoundReport log_bound(std::string name, double log_left, double log_right, std::string instance) {
  BoundReport r;
  r.name = std::move(name);
  r.left = log_left == kNegInf ? 0.0 : std::exp(log_left);
  r.right = log_right == kNegInf ? 0.0 : std::exp(log_right);
  const double tol = 1e-9 * std::max({1.0, std::fabs(log_left), std::fabs(log_right)});
  r.holds = log_left == kNegInf || log_left <= log_right + tol;
  r.slack = r.right - r.left;
  r.instance = std::move(instance);
  return r;
}

BoundReport count_bound(std::string name, long long violations, std::string instance) {
  BoundReport r;
  r.name = std::move(name);
  r.left = static_cast<double>(violations);
  r.right = 0.0;
  r.holds = violations == 0;
  r.slack = -r.left;
  r.instance = std::move(instance);
  return r;
}

double theta_omega(const SystemModel& model) {
  return static_cast<double>(model.states.theta_size) *
         static_cast<double>(model.states.omega_size);
}

// n ln(1/(pi_min |Theta||Omega|)) + 1, the harmonic-chain ceiling.
double harmonic_rhs(const SystemModel& model, int n) {
  const double pi_min = check_positivity(model.pi);
  return static_cast<double>(n) * std::log(1.0 / (pi_min * theta_omega(model))) + 1.0;
}

}  // namespace

double prescribed_log_alpha(const SystemModel& model, int n) {
  const double pi_min = check_positivity(model.pi);
  const long long c =
      cbar(n, model.alphabets.y_size * model.alphabets.z_size);
  return 2.0 * static_cast<double>(c) *
         std::log(static_cast<double>(model.big_pi.K) / pi_min);
}

double prescribed_alpha(const SystemModel& model, int n) {
  const double la = prescribed_log_alpha(model, n);
  if (la > 690.0) throw TooLarge("prescribed_alpha: exceeds double range; use prescribed_log_alpha");
  return std::exp(la);
}

BoundReport check_harmonic_lemma(const SystemModel& model, const Sequence& z) {
  const int n = static_cast<int>(z.size());
  const RankTable table = build_rank_table(model, z, DecoderFamily::ML);
  double L = 0.0;
  for (std::size_t r = 0; r < table.order.size(); ++r) {
    const double lp = table.log_py[table.order[r]];
    if (lp == kNegInf) continue;
    L += std::exp(lp) / table.prefix_prob[r];
  }
  BoundReport rep;
  rep.name = "harmonic_lemma";
  rep.left = L;
  rep.right = harmonic_rhs(model, n);
  rep.holds = L <= rep.right + 1e-9 * std::max(1.0, rep.right);
  rep.slack = rep.right - rep.left;
  rep.instance = "z=" + sequence_to_string(z);
  return rep;
}

BoundReport check_threshold_lemma(const SystemModel& model, const Sequence& z, double alpha,
                                  double rate) {
  if (!(alpha > 1.0)) throw ValidationError("check_threshold_lemma: alpha must be > 1");
  const int n = static_cast<int>(z.size());
  const RankTable table = build_rank_table(model, z, DecoderFamily::ML);
  double pz = 0.0;
  for (double lyz : table.log_pyz)
    if (lyz != kNegInf) pz += std::exp(lyz);
  BoundReport rep;
  rep.name = "threshold_lemma";
  rep.instance = "z=" + sequence_to_string(z) + " alpha=" + std::to_string(alpha);
  if (pz == 0.0) {
    rep.holds = true;
    return rep;
  }
  double pe_o = 0.0;
  double pe_t = 0.0;
  for (std::uint64_t yc = 0; yc < table.log_pyz.size(); ++yc) {
    const double lyz = table.log_pyz[yc];
    if (lyz == kNegInf) continue;
    const double w = std::exp(lyz) / pz;
    pe_o += w * f_of_t(set_prob_prefix(table, yc), n, rate);
    pe_t += w * f_of_t(set_prob_threshold(table, yc, alpha), n, rate);
  }
  const double factor = alpha * harmonic_rhs(model, n) + 1.0;
  rep.left = pe_t;
  rep.right = factor * pe_o;
  rep.holds = pe_t <= rep.right + 1e-9 * std::max(1.0, rep.right);
  rep.slack = rep.right - rep.left;
  return rep;
}

std::vector<BoundReport> check_marginal_vs_pinned(const SystemModel& model, const Sequence& y,
                                    const Sequence& z) {
  const double pi_min = check_positivity(model.pi);
  const PhraseParse parse = joint_parse(y, z, model.alphabets.y_size, model.alphabets.z_size);
  const PinnedPath s_tilde = phrase_viterbi_s_tilde(model.pi, y, parse.boundaries);
  const double ly = log_prob_y(model.pi, y);
  const double c = static_cast<double>(parse.c_yz);
  int min_len = static_cast<int>(y.size());
  for (int i = 0; i < parse.c_yz; ++i)
    min_len = std::min(min_len, parse.boundaries[static_cast<std::size_t>(i + 1)] -
                                    parse.boundaries[static_cast<std::size_t>(i)]);
  std::string tag = pair_tag(y, z) + " c=" + std::to_string(parse.c_yz);
  if (min_len < 3) tag += " short-phrase";

  std::vector<BoundReport> out;
  out.push_back(log_bound("marginal_vs_pinned_theta_omega", ly,
                          s_tilde.log_value + c * std::log(theta_omega(model) / (pi_min * pi_min)),
                          tag));
  out.push_back(log_bound(
      "marginal_vs_pinned_K", ly,
      s_tilde.log_value +
          c * std::log(static_cast<double>(model.big_pi.K) / (pi_min * pi_min)),
      tag));
  return out;
}

E1Set build_E1(const SystemModel& model, const Sequence& y, const Sequence& z) {
  const int n = static_cast<int>(y.size());
  const std::uint64_t count = sequence_count(model.alphabets.y_size, n);
  if (count > kEnumGuard) throw TooLarge("build_E1: |Y|^n exceeds enumeration guard");

  E1Set set;
  const PhraseParse parse = joint_parse(y, z, model.alphabets.y_size, model.alphabets.z_size);
  set.boundaries = parse.boundaries;
  set.t_hat = phrase_viterbi_t_hat(model.big_pi, y, z, parse.boundaries);
  set.s_tilde = phrase_viterbi_s_tilde(model.pi, y, parse.boundaries);

  std::vector<int> obs;
  Sequence yp;
  for (std::uint64_t code = 0; code < count; ++code) {
    decode_sequence(code, model.alphabets.y_size, n, yp);
    pack_pair_obs(model.big_pi, yp, z, obs);
    const double l1 =
        hmm_log_prob_pinned(model.big_pi.hmm, obs.data(), set.boundaries, set.t_hat.states);
    if (!log_close(l1, set.t_hat.log_value, 1e-9)) continue;
    const double l2 = hmm_log_prob_pinned(model.pi.hmm, yp.data(), set.boundaries,
                                          set.s_tilde.states);
    if (!log_close(l2, set.s_tilde.log_value, 1e-9)) continue;
    set.codes.push_back(code);
    const double lp = log_prob_y(model.pi, yp);
    set.sum_prob += lp == kNegInf ? 0.0 : std::exp(lp);
    set.sum_pinned += l2 == kNegInf ? 0.0 : std::exp(l2);
  }
  return set;
}

TSet build_T(const SystemModel& model, const Sequence& y, const Sequence& z) {
  const PhraseParse parse = joint_parse(y, z, model.alphabets.y_size, model.alphabets.z_size);
  const PinnedPath t_hat = phrase_viterbi_t_hat(model.big_pi, y, z, parse.boundaries);
  const PinnedPath s_tilde = phrase_viterbi_s_tilde(model.pi, y, parse.boundaries);

  const int c = parse.c_yz;
  auto t_state = [&](int i) {
    return i == 0 ? model.big_pi.hmm.initial_state
                  : t_hat.states.states[static_cast<std::size_t>(i - 1)];
  };
  auto s_state = [&](int i) {
    return i == 0 ? model.pi.hmm.initial_state
                  : s_tilde.states.states[static_cast<std::size_t>(i - 1)];
  };

  // Phrases are interchangeable when they carry the same z-segment (which
  // implies equal length) and the same boundary states under both maximizers.
  using GroupKey = std::tuple<std::string, int, int, int, int>;
  std::map<GroupKey, std::vector<int>> groups;
  for (int i = 0; i < c; ++i) {
    const int a = parse.boundaries[static_cast<std::size_t>(i)];
    const int b = parse.boundaries[static_cast<std::size_t>(i + 1)];
    Sequence zseg(z.begin() + a, z.begin() + b);
    groups[{sequence_to_string(zseg), t_state(i), t_state(i + 1), s_state(i), s_state(i + 1)}]
        .push_back(i);
  }

  // Distinct arrangements per group, then the cartesian product across groups.
  std::vector<std::vector<int>> positions;
  std::vector<std::vector<std::vector<Sequence>>> arrangements;
  std::size_t total = 1;
  for (auto& [key, idxs] : groups) {
    std::vector<Sequence> phrases;
    for (int i : idxs) {
      const int a = parse.boundaries[static_cast<std::size_t>(i)];
      const int b = parse.boundaries[static_cast<std::size_t>(i + 1)];
      phrases.emplace_back(y.begin() + a, y.begin() + b);
    }
    std::sort(phrases.begin(), phrases.end());
    std::vector<std::vector<Sequence>> perms;
    do {
      perms.push_back(phrases);
      if (perms.size() > kPermGuard) throw TooLarge("build_T: permutation guard exceeded");
    } while (std::next_permutation(phrases.begin(), phrases.end()));
    total *= perms.size();
    if (total > kPermGuard) throw TooLarge("build_T: permutation guard exceeded");
    positions.push_back(idxs);
    arrangements.push_back(std::move(perms));
  }

  TSet result;
  std::vector<std::size_t> pick(positions.size(), 0);
  while (true) {
    Sequence yp = y;
    for (std::size_t g = 0; g < positions.size(); ++g) {
      const auto& arr = arrangements[g][pick[g]];
      for (std::size_t j = 0; j < positions[g].size(); ++j) {
        const int i = positions[g][j];
        const int a = parse.boundaries[static_cast<std::size_t>(i)];
        std::copy(arr[j].begin(), arr[j].end(), yp.begin() + a);
      }
    }
    result.members.push_back(std::move(yp));
    std::size_t g = 0;
    while (g < pick.size()) {
      if (++pick[g] < arrangements[g].size()) break;
      pick[g] = 0;
      ++g;
    }
    if (g == pick.size()) break;
  }
  std::sort(result.members.begin(), result.members.end());
  result.members.erase(std::unique(result.members.begin(), result.members.end()),
                       result.members.end());
  return result;
}

namespace {

std::vector<BoundReport> check_Et_links(const SystemModel& model, const Sequence& y,
                                        const Sequence& z, double alpha, const RankTable& table,
                                        const E1Set& e1, const TSet& t_set) {
  const int n = static_cast<int>(y.size());
  const std::uint64_t y_code = encode_sequence(y, model.alphabets.y_size);
  const double p_et = set_prob_threshold(table, y_code, alpha);
  const double ly = log_prob_y(model.pi, y);
  const double py = ly == kNegInf ? 0.0 : std::exp(ly);
  const double c = static_cast<double>(e1.boundaries.size()) - 1.0;
  const double k = static_cast<double>(model.big_pi.K);
  const double e1_count = static_cast<double>(e1.codes.size());
  const std::string tag = pair_tag(y, z) + " alpha=" + std::to_string(alpha);

  std::vector<BoundReport> out;
  auto push = [&](std::string name, double left, double right, bool equality) {
    BoundReport r;
    r.name = std::move(name);
    r.left = left;
    r.right = right;
    const double tol = 1e-8 * std::max({1.0e-300, std::fabs(left), std::fabs(right)});
    r.holds = equality ? std::fabs(left - right) <= tol : left <= right + tol;
    r.slack = right - left;
    r.instance = tag;
    out.push_back(std::move(r));
  };
  push("Et_ge_E1_mass", e1.sum_prob, p_et, false);
  push("E1_pinned_le_marginal", e1.sum_pinned, e1.sum_prob, false);
  const double pinned_ref =
      e1.s_tilde.log_value == kNegInf ? 0.0 : std::exp(e1.s_tilde.log_value);
  push("E1_pinned_mass_equality", e1.sum_pinned, e1_count * pinned_ref, true);
  push("pinned_ge_Kc_marginal", std::pow(k, -c) * e1_count * py, e1_count * pinned_ref, false);
  const double cbar_n =
      static_cast<double>(cbar(n, model.alphabets.y_size * model.alphabets.z_size));
  push("Et_ge_Kcbar_T_mass", std::pow(k, -cbar_n) * static_cast<double>(t_set.members.size()) * py,
       p_et, false);
  return out;
}

}  // namespace

std::vector<BoundReport> check_Et_lower_bound(const SystemModel& model, const Sequence& y,
                                              const Sequence& z, double alpha) {
  if (!(alpha > 1.0)) throw ValidationError("check_Et_lower_bound: alpha must be > 1");
  const RankTable table = build_rank_table(model, z, DecoderFamily::ML);
  const E1Set e1 = build_E1(model, y, z);
  const TSet t_set = build_T(model, y, z);
  return check_Et_links(model, y, z, alpha, table, e1, t_set);
}

KraftReport kraft_sum(const SystemModel& model, const Sequence& z) {
  const int n = static_cast<int>(z.size());
  const std::uint64_t count = sequence_count(model.alphabets.y_size, n);
  if (count > kEnumGuard) throw TooLarge("kraft_sum: |Y|^n exceeds enumeration guard");
  JointParser parser(model.alphabets.y_size, model.alphabets.z_size);
  PhraseParse parse;
  Sequence yp;
  double sum = 0.0;
  for (std::uint64_t code = 0; code < count; ++code) {
    decode_sequence(code, model.alphabets.y_size, n, yp);
    parser.parse_into(yp, z, parse);
    sum += std::exp2(-v_metric(parse));
  }
  KraftReport rep;
  rep.sum = sum;
  rep.kappa = std::log2(sum) / static_cast<double>(n);
  return rep;
}

BoundReport check_f_ratio(double a, double b, int n, double rate) {
  if (!(a > 0.0 && a <= 1.0 && b > 0.0 && b <= 1.0))
    throw DomainError("check_f_ratio: a and b must lie in (0,1]");
  const double fa = f_of_t(a, n, rate);
  const double fb = f_of_t(b, n, rate);
  BoundReport rep;
  rep.name = "f_ratio";
  rep.instance = "a=" + std::to_string(a) + " b=" + std::to_string(b);
  if (fb == 0.0) {
    // M = 1 makes both sides 0/0; the statement is vacuous.
    rep.holds = fa == 0.0;
    return rep;
  }
  rep.left = fa / fb;
  rep.right = std::max(1.0, a / b);
  rep.holds = rep.left <= rep.right * (1.0 + 1e-12);
  rep.slack = rep.right - rep.left;
  return rep;
}

EpsilonLadder epsilon_ladder(const SystemModel& model, int n) {
  const double pi_min = check_positivity(model.pi);
  EpsilonLadder ladder;
  ladder.n = n;
  const int pair_alpha_size = model.alphabets.y_size * model.alphabets.z_size;
  ladder.cbar_n = cbar(n, pair_alpha_size);
  ladder.eps_n = n >= 2 ? cbar_formula_epsilon(n, pair_alpha_size)
                        : std::numeric_limits<double>::quiet_NaN();
  const double cb = static_cast<double>(ladder.cbar_n);
  const double th = model.states.theta_size;
  const double om = model.states.omega_size;
  const double sg = model.states.sigma_size;
  const double k = static_cast<double>(model.big_pi.K);
  ladder.eps2_prime = cb / n *
                      std::log2(std::pow(th, 4.0) * std::pow(om, 4.0) * sg * sg *
                                std::exp(1.0));
  ladder.eps2 = ladder.eps2_prime + cb * std::log2(k) / n;
  // Stable (1/n) ln(e^A + 1) with A = ln of the threshold-lemma factor at the
  // prescribed alpha.
  const double a = 2.0 * cb * std::log(k / pi_min) +
                   std::log(static_cast<double>(n) * std::log(1.0 / (pi_min * th * om)) + 1.0);
  ladder.eps3 = (a > 30.0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a))) / n;

  const std::uint64_t y_count = sequence_count(model.alphabets.y_size, n);
  const std::uint64_t z_count = sequence_count(model.alphabets.z_size, n);
  if (y_count <= kEnumGuard && z_count <= kEnumGuard && y_count <= kEnumGuard / z_count) {
    double kappa = kNegInf;
    Sequence z;
    for (std::uint64_t zc = 0; zc < z_count; ++zc) {
      decode_sequence(zc, model.alphabets.z_size, n, z);
      kappa = std::max(kappa, kraft_sum(model, z).kappa);
    }
    ladder.kappa = kappa;
    ladder.kappa_measured = true;
    ladder.eps_total_nats = kLn2 * (ladder.kappa + ladder.eps2) + ladder.eps3;
  } else {
    ladder.kappa = std::numeric_limits<double>::quiet_NaN();
    ladder.kappa_measured = false;
    ladder.eps_total_nats = std::numeric_limits<double>::quiet_NaN();
  }
  return ladder;
}

bool is_advisory(const BoundReport& report) {
  if (report.name.rfind("perm_class", 0) == 0) return true;
  if (report.name.rfind("marginal_vs_pinned", 0) == 0 &&
      report.instance.find("short-phrase") != std::string::npos)
    return true;
  return false;
}

std::vector<BoundReport> bounds_sweep(const SystemModel& model, int n, const SweepOptions& opts) {
  if (n < 1) throw DomainError("bounds_sweep: n must be >= 1");
  const std::uint64_t y_count = sequence_count(model.alphabets.y_size, n);
  const std::uint64_t z_count = sequence_count(model.alphabets.z_size, n);
  if (y_count > kEnumGuard || y_count > kEnumGuard / z_count)
    throw TooLarge("bounds_sweep: enumeration guard exceeded");
  const double alpha = opts.alpha > 0.0 ? opts.alpha : prescribed_alpha(model, n);
  if (!(alpha > 1.0)) throw ValidationError("bounds_sweep: alpha must be > 1");
  const double log_alpha = std::log(alpha);
  const EpsilonLadder ladder = epsilon_ladder(model, n);

  std::vector<BoundReport> reports;
  auto keep = [&](BoundReport r) {
    if (opts.include_passing || !r.holds) reports.push_back(std::move(r));
  };

  Sequence y, z;
  for (std::uint64_t zc = 0; zc < z_count; ++zc) {
    decode_sequence(zc, model.alphabets.z_size, n, z);
    keep(check_harmonic_lemma(model, z));
    keep(check_threshold_lemma(model, z, alpha, opts.rate));
    const RankTable ml_table = build_rank_table(model, z, DecoderFamily::ML);
    const RankTable u_table = build_rank_table(model, z, DecoderFamily::Universal);
    const double kappa = kraft_sum(model, z).kappa;

    for (std::uint64_t yc = 0; yc < y_count; ++yc) {
      decode_sequence(yc, model.alphabets.y_size, n, y);
      const double ly = ml_table.log_py[yc];
      if (ly == kNegInf) continue;
      const std::string tag = pair_tag(y, z);

      const PhraseParse parse =
          joint_parse(y, z, model.alphabets.y_size, model.alphabets.z_size);
      const double c = static_cast<double>(parse.c_yz);
      const PinnedPath t_hat = phrase_viterbi_t_hat(model.big_pi, y, z, parse.boundaries);
      const PinnedPath s_tilde = phrase_viterbi_s_tilde(model.pi, y, parse.boundaries);
      const double lyz = ml_table.log_pyz[yc];
      const double log_k = std::log(static_cast<double>(model.big_pi.K));

      keep(log_bound("t_hat_vs_joint", lyz - c * log_k, t_hat.log_value, tag));
      keep(log_bound("s_tilde_vs_marginal", ly - c * std::log(theta_omega(model)),
                     s_tilde.log_value, tag));
      for (auto& r : check_marginal_vs_pinned(model, y, z)) keep(std::move(r));

      // Set containments, extensionally.
      const E1Set e1 = build_E1(model, y, z);
      const TSet t_set = build_T(model, y, z);
      const double et_cutoff = ml_table.metric[yc] + log_alpha;
      long long eo_out = 0;
      const std::uint32_t y_rank = ml_table.rank_of_code[yc];
      for (std::uint32_t r = 0; r <= y_rank; ++r)
        if (!(ml_table.metric[ml_table.order[r]] <= et_cutoff)) ++eo_out;
      keep(count_bound("Eo_subset_Et", eo_out, tag));
      long long e1_out = 0;
      for (std::uint64_t code : e1.codes)
        if (!(ml_table.metric[code] <= et_cutoff)) ++e1_out;
      keep(count_bound("E1_subset_Et", e1_out, tag));
      std::set<std::uint64_t> e1_codes(e1.codes.begin(), e1.codes.end());
      long long t_out = 0;
      for (const auto& member : t_set.members)
        if (!e1_codes.count(encode_sequence(member, model.alphabets.y_size))) ++t_out;
      keep(count_bound("T_subset_E1", t_out, tag));

      for (auto& r : check_Et_links(model, y, z, alpha, ml_table, e1, t_set))
        keep(std::move(r));

      // Kraft-chain conclusion and the threshold-set floor.
      const double u = u_table.metric[yc];  // bits
      const double p_eu = set_prob_prefix(u_table, yc);
      keep(log_bound("peu_kraft", std::log(p_eu),
                     (static_cast<double>(n) * kappa + u) * kLn2, tag));
      const double p_et = set_prob_threshold(ml_table, yc, alpha);
      keep(log_bound("pet_floor", (u - static_cast<double>(n) * ladder.eps2) * kLn2,
                     std::log(p_et), tag));

      const double v = v_metric(parse);
      keep(log_bound("perm_class_count",
                     (v - static_cast<double>(n) * ladder.eps2_prime) * kLn2,
                     std::log(static_cast<double>(t_set.members.size())), tag));
    }
  }

  // f(a)/f(b) <= max{1, a/b} on a 100x100 grid, reported as one summary row.
  double worst = 0.0;
  for (int i = 1; i <= 100; ++i)
    for (int j = 1; j <= 100; ++j) {
      const BoundReport r = check_f_ratio(i / 100.0, j / 100.0, n, opts.rate);
      if (r.right > 0.0 || r.left > 0.0) worst = std::max(worst, r.left - r.right);
    }
  BoundReport grid;
  grid.name = "f_ratio_grid_100x100";
  grid.left = worst;
  grid.right = 0.0;
  grid.holds = worst <= 1e-12;
  grid.slack = -worst;
  grid.instance = "rate=" + std::to_string(opts.rate);
  keep(std::move(grid));

  return reports;
}

}  // namespace udlab
