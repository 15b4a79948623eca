/**
 * @file scorex_cli.cpp
 * @brief Command-line front end: expand, evaluate, run, train-markov, tokens.
 *
 * Exit codes: 0 success, 1 usage error, 2 data error, 3 partial batch failure.
 */

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "scorex/errors.h"
#include "scorex/expansion.h"
#include "scorex/harness.h"
#include "scorex/markov.h"
#include "scorex/metrics.h"
#include "scorex/midi_io.h"
#include "scorex/tokenizer.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitPartial = 3;

scorex::TokenSequence load_tokens(const std::string& path, int q) {
  std::vector<std::string> warnings;
  auto score = scorex::parse_midi(scorex::read_file_bytes(path), &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << path << ": " << w << "\n";
  return scorex::encode(scorex::quantize(score, q));
}

void print_analysis(const scorex::BoundaryAnalysis& a, nlohmann::ordered_json extra = {}) {
  nlohmann::ordered_json j = extra.is_null() ? nlohmann::ordered_json::object() : std::move(extra);
  j["gs1"] = a.gs1;
  j["gs2"] = a.gs2;
  j["delta_gs"] = a.delta_gs;
  j["rhs1"] = a.rhs1;
  j["rhs2"] = a.rhs2;
  j["delta_rhs"] = a.delta_rhs;
  std::cout << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symbolic music score expansion and boundary metrics"};
  app.require_subcommand(1);

  int q = scorex::kDefaultPositionsPerBar;
  app.add_option("-q,--positions-per-bar", q, "Grid positions per 4/4 bar")->check(CLI::PositiveNumber);

  // expand
  auto* expand_cmd = app.add_subcommand("expand", "Insert new bars at a boundary of one MIDI file");
  std::string expand_file, expand_out, expand_infiller = "copy-future", expand_model;
  int expand_boundary = 0, expand_gap = 4;
  std::uint64_t expand_seed = 0;
  expand_cmd->add_option("file", expand_file, "Input MIDI file")->required()->check(CLI::ExistingFile);
  expand_cmd->add_option("--boundary", expand_boundary, "Boundary bar p (past = bars [0, p))")->required();
  expand_cmd->add_option("--gap", expand_gap, "Bars to insert")->check(CLI::PositiveNumber);
  expand_cmd->add_option("--infiller", expand_infiller, "copy-past | copy-future | markov | random");
  expand_cmd->add_option("--model", expand_model, "Markov model file (markov infiller)");
  expand_cmd->add_option("--seed", expand_seed, "Sampling seed");
  expand_cmd->add_option("--out", expand_out, "Output MIDI path")->required();

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Boundary analysis of (past, new, future) MIDI files");
  std::string eval_past, eval_new, eval_future;
  eval_cmd->add_option("past", eval_past)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("new", eval_new)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("future", eval_future)->required()->check(CLI::ExistingFile);

  // run
  auto* run_cmd = app.add_subcommand("run", "Batch experiment from a JSON config");
  std::string run_config;
  std::optional<int> run_gap, run_jobs, run_order;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::string> run_infiller, run_out, run_model;
  run_cmd->add_option("--config", run_config, "Config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--gap", run_gap, "Override gap_bars")->check(CLI::PositiveNumber);
  run_cmd->add_option("--infiller", run_infiller, "Override infiller");
  run_cmd->add_option("--model", run_model, "Override Markov model path");
  run_cmd->add_option("--order", run_order, "Override Markov order")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run_seed, "Override seed");
  run_cmd->add_option("--out", run_out, "Override output_dir");
  run_cmd->add_option("--jobs", run_jobs, "Worker threads")->check(CLI::PositiveNumber);

  // train-markov
  auto* train_cmd = app.add_subcommand("train-markov", "Train a token Markov model on a MIDI directory");
  std::string train_corpus, train_out;
  int train_order = 2;
  train_cmd->add_option("--corpus", train_corpus, "Directory of MIDI files")->required()->check(CLI::ExistingDirectory);
  train_cmd->add_option("--order", train_order, "Context length k")->check(CLI::PositiveNumber);
  train_cmd->add_option("--out", train_out, "Model output path")->required();

  // tokens
  auto* tokens_cmd = app.add_subcommand("tokens", "Print the token sequence of a MIDI file");
  std::string tokens_file;
  tokens_cmd->add_option("file", tokens_file)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*expand_cmd) {
      scorex::ExperimentConfig cfg;
      cfg.infiller.kind = scorex::parse_infiller_kind(expand_infiller);
      cfg.infiller.model_path = expand_model;
      cfg.positions_per_bar = q;
      if (cfg.infiller.kind == scorex::InfillerKind::Markov && expand_model.empty()) {
        std::cerr << "error: --model is required with --infiller markov\n";
        return kExitUsage;
      }
      if (expand_boundary < 1) {
        std::cerr << "error: --boundary must be >= 1\n";
        return kExitUsage;
      }
      auto infiller = scorex::make_infiller(cfg);
      auto ts = load_tokens(expand_file, q);
      const auto p = static_cast<std::size_t>(expand_boundary);
      auto expanded = scorex::expand(ts, p, expand_gap, *infiller, expand_seed);
      const std::size_t gap = static_cast<std::size_t>(expand_gap);
      auto analysis = scorex::boundary_analysis(scorex::slice_bars(expanded, 0, p),
                                                scorex::slice_bars(expanded, p, p + gap),
                                                scorex::slice_bars(expanded, p + gap, scorex::bar_count(expanded)));
      scorex::write_file_bytes(expand_out, scorex::write_midi(scorex::dequantize(scorex::decode(expanded))));
      nlohmann::ordered_json info;
      info["bars_in"] = scorex::bar_count(ts);
      info["bars_out"] = scorex::bar_count(expanded);
      print_analysis(analysis, info);
      return kExitOk;
    }

    if (*eval_cmd) {
      print_analysis(scorex::boundary_analysis(load_tokens(eval_past, q), load_tokens(eval_new, q),
                                               load_tokens(eval_future, q)));
      return kExitOk;
    }

    if (*run_cmd) {
      auto cfg = scorex::load_config(run_config);
      if (app.count("--positions-per-bar") > 0) cfg.positions_per_bar = q;
      if (run_gap) cfg.gap_bars = *run_gap;
      if (run_infiller) cfg.infiller.kind = scorex::parse_infiller_kind(*run_infiller);
      if (run_model) cfg.infiller.model_path = *run_model;
      if (run_order) cfg.infiller.order = *run_order;
      if (run_seed) cfg.seed = *run_seed;
      if (run_out) cfg.output_dir = *run_out;
      if (run_jobs) cfg.jobs = *run_jobs;

      auto report = scorex::run_experiment(cfg);
      for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
      scorex::emit_results(report.results, cfg.output_dir);
      std::cout << scorex::summary_json(report.results);
      const auto failed = report.failures();
      if (failed == 0) return kExitOk;
      return failed == report.results.size() ? kExitData : kExitPartial;
    }

    if (*train_cmd) {
      std::vector<std::string> warnings;
      auto corpus = scorex::load_corpus(train_corpus, q, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      std::vector<scorex::TokenSequence> seqs;
      for (auto& [id, ts] : corpus) seqs.push_back(std::move(ts));
      auto model = scorex::train_markov(seqs, train_order);
      std::ofstream out(train_out, std::ios::binary | std::ios::trunc);
      if (!out) throw scorex::Error("cannot open " + train_out + " for writing");
      out << scorex::save_markov(model);
      std::cout << "trained order-" << train_order << " model on " << seqs.size() << " pieces ("
                << model.vocabulary().size() << " token types)\n";
      return kExitOk;
    }

    if (*tokens_cmd) {
      std::cout << scorex::to_text(load_tokens(tokens_file, q));
      return kExitOk;
    }
  } catch (const scorex::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
