#include "udlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "udlab/lz.hpp"

#ifndef UDLAB_VERSION
#define UDLAB_VERSION "dev"
#endif

namespace udlab {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open for writing: " + path);
  out << text;
  if (!out) throw ValidationError("write failed: " + path);
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  return j.at(key);
}

int require_int(const json& j, const char* key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_number_integer()) throw ParseError(where + ": field '" + key + "' must be an integer");
  return v.get<int>();
}

int optional_int(const json& j, const char* key, int fallback) {
  return j.contains(key) ? j.at(key).get<int>() : fallback;
}

std::vector<double> require_array(const json& j, const char* key, const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_array()) throw ParseError(where + ": field '" + key + "' must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) throw ParseError(where + ": field '" + key + "' holds a non-number");
    out.push_back(e.get<double>());
  }
  return out;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

// One CSV record; fields left empty simply do not apply to the mode.
struct Record {
  std::string mode, model, n, rate, decoder, alpha, method, metric, instance, value, left, right,
      holds, ci_low, ci_high, trials, seed;
};

std::string to_line(const Record& r) {
  const std::string* fields[] = {&r.mode,  &r.model, &r.n,        &r.rate,   &r.decoder, &r.alpha,
                                 &r.method, &r.metric, &r.instance, &r.value, &r.left,    &r.right,
                                 &r.holds, &r.ci_low, &r.ci_high, &r.trials, &r.seed};
  std::string line;
  for (const std::string* f : fields) {
    line += csv_escape(*f);
    line += ',';
  }
  line += csv_escape(version_string());
  return line;
}

int alphabet_floor(const Sequence& seq) {
  int m = 0;
  for (Symbol s : seq) m = std::max(m, s + 1);
  return std::max(m, 1);
}

double resolve_alpha(const SystemModel& model, int n, double override_value) {
  return override_value > 0.0 ? override_value : prescribed_alpha(model, n);
}

std::vector<DecoderKind> resolve_kinds(const SystemModel& model, int n,
                                       const ExperimentConfig& config) {
  std::vector<DecoderFamily> families = config.decoders;
  if (families.empty()) families = {DecoderFamily::ML, DecoderFamily::Universal};
  std::vector<DecoderKind> kinds;
  for (DecoderFamily f : families) {
    switch (f) {
      case DecoderFamily::ML:
        kinds.push_back(DecoderKind::ml());
        break;
      case DecoderFamily::Universal:
        kinds.push_back(DecoderKind::universal());
        break;
      case DecoderFamily::Threshold:
        kinds.push_back(DecoderKind::threshold(resolve_alpha(model, n, config.alpha_override)));
        break;
    }
  }
  return kinds;
}

Record base_record(const ExperimentConfig& config) {
  Record r;
  r.mode = config.mode;
  r.model = config.model_path;
  r.rate = format_double(config.rate);
  r.seed = std::to_string(config.seed);
  return r;
}

void append_error_report(std::vector<std::string>& rows, Record r, const ErrorProbReport& rep) {
  r.n = std::to_string(rep.n);
  r.decoder = rep.kind.name();
  if (rep.kind.family == DecoderFamily::Threshold) r.alpha = format_double(rep.kind.alpha);
  r.method = rep.method;
  r.metric = "error_prob";
  r.value = format_double(rep.value);
  if (rep.trials > 0) {
    r.trials = std::to_string(rep.trials);
    r.ci_low = format_double(rep.ci_low);
    r.ci_high = format_double(rep.ci_high);
  }
  rows.push_back(to_line(r));
}

}  // namespace

std::string version_string() { return UDLAB_VERSION; }

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::string csv_header() {
  return "mode,model,n,rate,decoder,alpha,method,metric,instance,value,left,right,holds,"
         "ci_low,ci_high,trials,seed,version";
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("UDLAB_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 4096)
      throw ValidationError("UDLAB_WORKERS must be a positive integer");
    return static_cast<int>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

SystemModel load_model(const std::string& path) {
  const json j = read_json_file(path);
  const json& ja = require(j, "alphabets", path);
  AlphabetSpec alphabets;
  alphabets.x_size = require_int(ja, "x", path);
  alphabets.y_size = require_int(ja, "y", path);
  alphabets.z_size = require_int(ja, "z", path);
  const json& js = require(j, "states", path);
  StateSpec states;
  states.omega_size = require_int(js, "omega", path);
  states.sigma_size = require_int(js, "sigma", path);
  states.theta_size = require_int(js, "theta", path);
  states.omega0 = optional_int(js, "omega0", 0);
  states.sigma0 = optional_int(js, "sigma0", 0);
  states.theta0 = optional_int(js, "theta0", 0);
  const json& jk = require(j, "kernels", path);
  SourceKernel g =
      make_source_kernel(alphabets.x_size, states.omega_size, require_array(jk, "G", path));
  ChannelKernelV v = make_channel_v(alphabets.x_size, alphabets.y_size, states.theta_size,
                                    require_array(jk, "V", path));
  ChannelKernelW w = make_channel_w(alphabets.x_size, alphabets.z_size, states.sigma_size,
                                    require_array(jk, "W", path));
  return make_system_model(alphabets, states, std::move(g), std::move(v), std::move(w));
}

void save_model(const SystemModel& model, const std::string& path) {
  ordered_json j;
  j["alphabets"] = {{"x", model.alphabets.x_size},
                    {"y", model.alphabets.y_size},
                    {"z", model.alphabets.z_size}};
  j["states"] = {{"omega", model.states.omega_size}, {"sigma", model.states.sigma_size},
                 {"theta", model.states.theta_size}, {"omega0", model.states.omega0},
                 {"sigma0", model.states.sigma0},    {"theta0", model.states.theta0}};
  j["kernels"] = {{"G", model.G.table}, {"V", model.V.table}, {"W", model.W.table}};
  write_text_file(path, j.dump(2) + "\n");
}

void save_codebook(const Codebook& codebook, const std::string& path) {
  ordered_json j;
  j["n"] = codebook.n;
  j["rate"] = codebook.rate;
  j["M"] = codebook.M;
  j["seed"] = codebook.seed;
  j["words"] = codebook.words;
  write_text_file(path, j.dump() + "\n");
}

Codebook load_codebook(const std::string& path) {
  const json j = read_json_file(path);
  Codebook cb;
  cb.n = require_int(j, "n", path);
  cb.rate = require(j, "rate", path).get<double>();
  cb.M = require(j, "M", path).get<long long>();
  cb.seed = require(j, "seed", path).get<std::uint64_t>();
  const json& words = require(j, "words", path);
  if (!words.is_array()) throw ParseError(path + ": 'words' must be an array");
  for (const auto& w : words) {
    Sequence seq = w.get<Sequence>();
    if (static_cast<int>(seq.size()) != cb.n)
      throw ParseError(path + ": codeword length differs from n");
    for (Symbol s : seq)
      if (s < 0) throw ParseError(path + ": negative symbol");
    cb.words.push_back(std::move(seq));
  }
  if (static_cast<long long>(cb.words.size()) != cb.M)
    throw ParseError(path + ": word count differs from M");
  return cb;
}

void save_fitted(const PackedHmm& hmm, const std::string& path) {
  ordered_json j;
  j["hidden"] = hmm.num_states;
  j["obs"] = hmm.num_obs;
  j["initial"] = hmm.initial_state;
  j["kernel"] = hmm.kernel;
  write_text_file(path, j.dump(2) + "\n");
}

PackedHmm load_fitted(const std::string& path) {
  const json j = read_json_file(path);
  PackedHmm hmm;
  hmm.num_states = require_int(j, "hidden", path);
  hmm.num_obs = require_int(j, "obs", path);
  hmm.initial_state = optional_int(j, "initial", 0);
  hmm.kernel = require_array(j, "kernel", path);
  if (hmm.num_states < 1 || hmm.num_obs < 1)
    throw ParseError(path + ": non-positive dimensions");
  const std::size_t want = static_cast<std::size_t>(hmm.num_states) *
                           static_cast<std::size_t>(hmm.num_obs) *
                           static_cast<std::size_t>(hmm.num_states);
  if (hmm.kernel.size() != want) throw ParseError(path + ": kernel size mismatch");
  if (hmm.initial_state < 0 || hmm.initial_state >= hmm.num_states)
    throw ParseError(path + ": initial state out of range");
  for (double v : hmm.kernel)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParseError(path + ": invalid kernel entry");
  return hmm;
}

double capacity_memoryless(const SystemModel& model) {
  if (model.states.omega_size != 1 || model.states.sigma_size != 1 ||
      model.states.theta_size != 1)
    throw NotMemoryless("capacity_memoryless: all state spaces must be singletons");
  const int ys = model.alphabets.y_size;
  const int zs = model.alphabets.z_size;
  const std::vector<double>& joint = model.big_pi.hmm.kernel;  // [(y,z)] with one state
  std::vector<double> py(ys, 0.0), pz(zs, 0.0);
  for (int y = 0; y < ys; ++y)
    for (int z = 0; z < zs; ++z) {
      py[y] += joint[static_cast<std::size_t>(y) * zs + z];
      pz[z] += joint[static_cast<std::size_t>(y) * zs + z];
    }
  double info = 0.0;
  for (int y = 0; y < ys; ++y)
    for (int z = 0; z < zs; ++z) {
      const double p = joint[static_cast<std::size_t>(y) * zs + z];
      if (p > 0.0) info += p * std::log(p / (py[y] * pz[z]));
    }
  return info;
}

RunResult run(const ExperimentConfig& config) {
  RunResult out;
  out.rows.push_back(csv_header());
  const Record base = base_record(config);

  if (config.mode == "exact" || config.mode == "monte-carlo" || config.mode == "bounds-check") {
    if (config.model_path.empty()) throw ValidationError("run: model path required");
    if (config.n_values.empty()) throw ValidationError("run: at least one block length required");
    const SystemModel model = load_model(config.model_path);
    for (int n : config.n_values) {
      if (config.mode == "exact") {
        for (const DecoderKind& kind : resolve_kinds(model, n, config))
          append_error_report(out.rows, base, exact_avg_error(model, n, config.rate, kind));
      } else if (config.mode == "monte-carlo") {
        const auto reports =
            monte_carlo_error_multi(model, n, config.rate, resolve_kinds(model, n, config),
                                    config.trials, config.seed, resolve_workers(config.workers));
        for (const ErrorProbReport& rep : reports) append_error_report(out.rows, base, rep);
      } else {
        SweepOptions opts;
        opts.rate = config.rate;
        opts.alpha = config.alpha_override;
        opts.include_passing = true;
        const double alpha_used = resolve_alpha(model, n, config.alpha_override);
        for (const BoundReport& rep : bounds_sweep(model, n, opts)) {
          Record r = base;
          r.n = std::to_string(n);
          r.alpha = format_double(alpha_used);
          r.method = is_advisory(rep) ? "advisory" : "checked";
          r.metric = rep.name;
          r.instance = rep.instance;
          r.value = format_double(rep.slack);
          r.left = format_double(rep.left);
          r.right = format_double(rep.right);
          r.holds = rep.holds ? "1" : "0";
          out.rows.push_back(to_line(r));
          if (!rep.holds && !is_advisory(rep)) ++out.bound_violations;
        }
        const EpsilonLadder ladder = epsilon_ladder(model, n);
        auto ladder_row = [&](const char* metric, double value, const std::string& instance) {
          Record r = base;
          r.n = std::to_string(n);
          r.method = "ladder";
          r.metric = metric;
          r.instance = instance;
          r.value = format_double(value);
          out.rows.push_back(to_line(r));
        };
        ladder_row("cbar_n", static_cast<double>(ladder.cbar_n), "");
        ladder_row("eps_n", ladder.eps_n, "");
        ladder_row("eps2_prime_bits", ladder.eps2_prime, "");
        ladder_row("eps2_bits", ladder.eps2, "");
        ladder_row("eps3_nats", ladder.eps3, "");
        ladder_row("kappa_bits", ladder.kappa,
                   ladder.kappa_measured ? "measured" : "unavailable");
        ladder_row("eps_total_nats", ladder.eps_total_nats,
                   ladder.kappa_measured ? "measured" : "unavailable");
      }
    }
  } else if (config.mode == "estimate") {
    if (config.codebook_path.empty())
      throw ValidationError("run: estimate mode needs a codebook path");
    const Codebook cb = load_codebook(config.codebook_path);
    int ys = 0;
    for (const Sequence& w : cb.words) ys = std::max(ys, alphabet_floor(w));
    if (!config.model_path.empty())
      ys = std::max(ys, load_model(config.model_path).alphabets.y_size);
    EstimationConfig ec;
    ec.hidden_size = config.hidden_size;
    ec.floor_value = config.floor_value;
    ec.max_iters = config.max_iters;
    ec.tol = config.tol;
    ec.seed = config.seed;
    const BaumWelchResult res = baum_welch(cb.words, ys, ec);
    for (std::size_t i = 0; i < res.loglik_trace.size(); ++i) {
      Record r = base;
      r.metric = "loglik";
      r.instance = "iter=" + std::to_string(i + 1);
      r.value = format_double(res.loglik_trace[i]);
      out.rows.push_back(to_line(r));
    }
    Record r = base;
    r.metric = "converged";
    r.instance = "iterations=" + std::to_string(res.iterations);
    r.value = res.converged ? "1" : "0";
    out.rows.push_back(to_line(r));
    if (!config.fitted_out.empty()) save_fitted(res.pi_hat, config.fitted_out);
  } else if (config.mode == "parse") {
    if (config.parse_y.empty() || config.parse_z.empty())
      throw ValidationError("run: parse mode needs y and z sequences");
    int ya = alphabet_floor(config.parse_y);
    int za = alphabet_floor(config.parse_z);
    if (!config.model_path.empty()) {
      const SystemModel model = load_model(config.model_path);
      if (ya > model.alphabets.y_size || za > model.alphabets.z_size)
        throw ValidationError("run: parse sequences use symbols outside the model alphabets");
      ya = model.alphabets.y_size;
      za = model.alphabets.z_size;
    }
    const PhraseParse parse = joint_parse(config.parse_y, config.parse_z, ya, za);
    const std::string tag = "y=" + sequence_to_string(config.parse_y) +
                            " z=" + sequence_to_string(config.parse_z);
    auto parse_row = [&](const std::string& metric, double value, const std::string& instance) {
      Record r = base;
      r.n = std::to_string(config.parse_y.size());
      r.metric = metric;
      r.instance = instance;
      r.value = format_double(value);
      out.rows.push_back(to_line(r));
    };
    parse_row("c_yz", parse.c_yz, tag);
    parse_row("c_z", parse.c_z, tag);
    for (std::size_t l = 0; l < parse.c_ell.size(); ++l)
      parse_row("c_ell", parse.c_ell[l], tag + " l=" + std::to_string(l + 1));
    parse_row("v_bits", v_metric(parse), tag);
    parse_row("last_complete", parse.last_complete ? 1.0 : 0.0, tag);
  } else {
    throw ValidationError("run: unknown mode '" + config.mode + "'");
  }

  if (!config.out_path.empty()) {
    std::string text;
    for (const std::string& row : out.rows) {
      text += row;
      text += '\n';
    }
    write_text_file(config.out_path, text);
  }
  return out;
}

}  // namespace udlab
