#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "udlab/harness.hpp"
#include "udlab/lz.hpp"

namespace {

udlab::Sequence parse_digits(const std::string& text) {
  udlab::Sequence seq;
  for (char c : text) {
    if (c < '0' || c > '9')
      throw udlab::ValidationError("sequences must be strings of decimal digits");
    seq.push_back(c - '0');
  }
  if (seq.empty()) throw udlab::ValidationError("empty sequence string");
  return seq;
}

std::vector<udlab::DecoderFamily> parse_decoders(const std::vector<std::string>& names) {
  std::vector<udlab::DecoderFamily> out;
  for (const std::string& name : names) {
    if (name == "ml")
      out.push_back(udlab::DecoderFamily::ML);
    else if (name == "universal")
      out.push_back(udlab::DecoderFamily::Universal);
    else if (name == "threshold")
      out.push_back(udlab::DecoderFamily::Threshold);
    else
      throw udlab::ValidationError("unknown decoder '" + name + "' (ml|universal|threshold)");
  }
  return out;
}

void print_rows(const udlab::RunResult& result) {
  for (const std::string& row : result.rows) std::cout << row << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noisy-codebook decoding laboratory"};
  app.require_subcommand(1);

  udlab::ExperimentConfig cfg;
  cfg.n_values.clear();
  std::vector<std::string> decoder_names;
  std::string y_text, z_text;
  long long m_override = 0;

  auto add_model = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--model", cfg.model_path, "model file (JSON)");
    if (required) opt->required();
  };
  auto add_core = [&](CLI::App* sub) {
    sub->add_option("--n", cfg.n_values, "block length(s)");
    sub->add_option("--rate", cfg.rate, "rate in nats per symbol");
    sub->add_option("--seed", cfg.seed, "base seed");
    sub->add_option("--out", cfg.out_path, "CSV output path (default: stdout only)");
    sub->add_option("--workers", cfg.workers, "worker threads (default: UDLAB_WORKERS or hardware)");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo decoding error estimation");
  add_model(simulate, true);
  add_core(simulate);
  simulate->add_option("--decoder", decoder_names, "ml|universal|threshold (repeatable)");
  simulate->add_option("--trials", cfg.trials, "Monte-Carlo trials");
  simulate->add_option("--alpha", cfg.alpha_override, "threshold parameter override (> 1)");

  CLI::App* exact = app.add_subcommand("exact-eval", "exact error probability by enumeration");
  add_model(exact, true);
  add_core(exact);
  exact->add_option("--decoder", decoder_names, "ml|universal|threshold (repeatable)");
  exact->add_option("--alpha", cfg.alpha_override, "threshold parameter override (> 1)");

  CLI::App* bounds = app.add_subcommand("bounds-check", "exhaustive inequality verification");
  add_model(bounds, true);
  add_core(bounds);
  bounds->add_option("--alpha", cfg.alpha_override, "threshold parameter override (> 1)");

  CLI::App* estimate = app.add_subcommand("estimate", "fit the observation law from a codebook");
  add_model(estimate, false);
  estimate->add_option("--codebook", cfg.codebook_path, "codebook file with training words")
      ->required();
  estimate->add_option("--hidden", cfg.hidden_size, "hidden-state count");
  estimate->add_option("--floor", cfg.floor_value, "kernel entry floor");
  estimate->add_option("--max-iters", cfg.max_iters, "iteration cap");
  estimate->add_option("--tol", cfg.tol, "log-likelihood gain stop threshold");
  estimate->add_option("--seed", cfg.seed, "initialization seed");
  estimate->add_option("--out", cfg.fitted_out, "fitted-law output file");

  CLI::App* parse_cmd = app.add_subcommand("parse", "joint incremental parsing of a (y, z) pair");
  add_model(parse_cmd, false);
  parse_cmd->add_option("--y", y_text, "y sequence as digits, e.g. 010001")->required();
  parse_cmd->add_option("--z", z_text, "z sequence as digits, e.g. 010101")->required();
  parse_cmd->add_option("--out", cfg.out_path, "CSV output path");

  CLI::App* capacity = app.add_subcommand("capacity", "mutual information of a memoryless model");
  add_model(capacity, true);

  CLI::App* codebook = app.add_subcommand("codebook", "draw and store a random codebook");
  add_model(codebook, true);
  codebook->add_option("--n", cfg.n_values, "block length");
  codebook->add_option("--rate", cfg.rate, "rate in nats per symbol");
  codebook->add_option("--m", m_override, "explicit word count (default: from rate)");
  codebook->add_option("--seed", cfg.seed, "draw seed");
  codebook->add_option("--out", cfg.out_path, "codebook output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (cfg.n_values.empty()) cfg.n_values = {4};
    cfg.decoders = parse_decoders(decoder_names);

    if (simulate->parsed() || exact->parsed()) {
      cfg.mode = simulate->parsed() ? "monte-carlo" : "exact";
      print_rows(udlab::run(cfg));
      return 0;
    }
    if (bounds->parsed()) {
      cfg.mode = "bounds-check";
      const udlab::RunResult result = udlab::run(cfg);
      print_rows(result);
      if (result.bound_violations > 0) {
        std::cerr << result.bound_violations << " bound violation(s)\n";
        return 3;
      }
      return 0;
    }
    if (estimate->parsed()) {
      cfg.mode = "estimate";
      cfg.out_path.clear();  // --out names the fitted file here, not the CSV
      print_rows(udlab::run(cfg));
      return 0;
    }
    if (parse_cmd->parsed()) {
      cfg.mode = "parse";
      cfg.parse_y = parse_digits(y_text);
      cfg.parse_z = parse_digits(z_text);
      const udlab::RunResult result = udlab::run(cfg);
      // Human-readable summary, recomputed from the same parse.
      int ya = 1, za = 1;
      for (int s : cfg.parse_y) ya = std::max(ya, s + 1);
      for (int s : cfg.parse_z) za = std::max(za, s + 1);
      const udlab::PhraseParse parse = udlab::joint_parse(cfg.parse_y, cfg.parse_z, ya, za);
      std::cout << "c(y,z)=" << parse.c_yz << '\n';
      std::cout << "c(z)=" << parse.c_z << '\n';
      std::cout << "c_ell=";
      for (std::size_t l = 0; l < parse.c_ell.size(); ++l)
        std::cout << (l ? "," : "") << parse.c_ell[l];
      std::cout << '\n';
      std::cout << "v_bits=" << udlab::format_double(udlab::v_metric(parse)) << '\n';
      (void)result;
      return 0;
    }
    if (capacity->parsed()) {
      const udlab::SystemModel model = udlab::load_model(cfg.model_path);
      const std::string value = udlab::format_double(udlab::capacity_memoryless(model));
      std::cout << "capacity_nats=" << value << '\n';
      return 0;
    }
    if (codebook->parsed()) {
      const udlab::SystemModel model = udlab::load_model(cfg.model_path);
      const int n = cfg.n_values.front();
      const udlab::Codebook cb =
          m_override > 0
              ? udlab::generate_codebook_m(model, n, m_override, cfg.rate, cfg.seed)
              : udlab::generate_codebook(model, n, cfg.rate, cfg.seed);
      udlab::save_codebook(cb, cfg.out_path);
      std::cout << "codebook n=" << cb.n << " M=" << cb.M << " -> " << cfg.out_path << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
