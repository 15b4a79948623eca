/**
 * @file harness.h
 * @brief Batch expansion experiment over an annotated MIDI corpus.
 */

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scorex/expansion.h"
#include "scorex/markov.h"
#include "scorex/midi_io.h"

namespace scorex {

enum class InfillerKind { CopyPast, CopyFuture, Markov, Random };

struct InfillerSpec {
  InfillerKind kind = InfillerKind::CopyFuture;
  std::string model_path;  ///< Markov only; empty means "train on the corpus".
  int order = 2;           ///< Markov order used when training on the corpus.
};

/// Accepts copy-past, copy-future, markov and random.
InfillerKind parse_infiller_kind(const std::string& name);
std::string to_string(InfillerKind kind);

struct ExperimentConfig {
  std::string corpus_dir;
  std::string annotations;
  std::string output_dir;
  int gap_bars = 4;
  InfillerSpec infiller;
  std::uint64_t seed = 0;
  int positions_per_bar = kDefaultPositionsPerBar;
  int ticks_per_quarter = 480;  ///< Resolution of written MIDI files.
  int jobs = 1;
};

/// Reads a JSON config. Relative paths are resolved against the directory
/// holding the config file. Throws SchemaError on bad fields.
ExperimentConfig load_config(const std::string& path);

/// Throws SchemaError unless gap_bars >= 1, Q >= 1 and the input paths exist.
void validate_config(const ExperimentConfig& config);

/// `[{"file": "a.mid", "boundary_bar": 8}, ...]` -> {"a.mid": 8}.
/// Throws SchemaError (offending key) or EmptyAnnotations.
std::map<std::string, int> load_annotations(const std::string& path);
std::map<std::string, int> parse_annotations(const std::string& json_text);

struct PieceResult {
  std::string piece_id;
  int boundary_bar = 0;
  int bars_in = 0;
  int bars_out = 0;
  double gs1 = 0.0;
  double gs2 = 0.0;
  double delta_gs = 0.0;
  double rhs1 = 0.0;
  double rhs2 = 0.0;
  double delta_rhs = 0.0;
  std::optional<std::string> error;  ///< Set when the piece failed.

  bool ok() const { return !error.has_value(); }
};

struct RunReport {
  std::vector<PieceResult> results;  ///< Ordered by piece_id.
  std::vector<std::string> warnings;

  std::size_t failures() const;
};

/// global seed XOR FNV-1a(piece_id).
std::uint64_t piece_seed(std::uint64_t seed, const std::string& piece_id);

/// Builds the configured infiller. A Markov infiller without a model path is
/// trained on every parseable corpus file.
std::unique_ptr<Infiller> make_infiller(const ExperimentConfig& config);

/// Per piece: parse, quantize, encode, expand, analyse and write
/// `<output_dir>/<stem>_expanded.mid`. Failures become error rows.
RunReport run_experiment(const ExperimentConfig& config);

/// Loads every *.mid / *.midi file of a directory as token sequences,
/// sorted by file name. Unreadable files are reported through `warnings`.
std::vector<std::pair<std::string, TokenSequence>> load_corpus(const std::string& dir, int positions_per_bar,
                                                              std::vector<std::string>* warnings = nullptr);

inline constexpr const char* kCsvHeader =
    "piece_id,boundary_bar,bars_in,bars_out,gs1,gs2,delta_gs,rhs1,rhs2,delta_rhs";

std::string results_csv(const std::vector<PieceResult>& results);
std::string results_json(const std::vector<PieceResult>& results);
std::string summary_json(const std::vector<PieceResult>& results);

/// Writes results.csv, results.json and summary.json into output_dir.
void emit_results(const std::vector<PieceResult>& results, const std::string& output_dir);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace scorex
