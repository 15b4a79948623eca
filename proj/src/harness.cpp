/**
 * @file harness.cpp
 * @brief Corpus experiment runner and result emission.
 */

#include "scorex/harness.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "scorex/errors.h"
#include "scorex/metrics.h"
#include "scorex/rng.h"

namespace scorex {

namespace fs = std::filesystem;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

bool is_midi_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".mid" || ext == ".midi";
}

TokenSequence load_piece(const fs::path& path, int positions_per_bar, std::vector<std::string>* warnings) {
  auto bytes = read_file_bytes(path.string());
  std::vector<std::string> parse_warnings;
  Score score = parse_midi(bytes, &parse_warnings);
  if (warnings) {
    for (auto& w : parse_warnings) warnings->push_back(path.filename().string() + ": " + w);
  }
  return encode(quantize(score, positions_per_bar));
}

PieceResult run_piece(const ExperimentConfig& config, const Infiller& infiller, const std::string& piece_id,
                      int boundary_bar, std::vector<std::string>& warnings) {
  PieceResult r;
  r.piece_id = piece_id;
  r.boundary_bar = boundary_bar;
  try {
    fs::path path = fs::path(config.corpus_dir) / piece_id;
    if (!fs::exists(path)) throw Error("file not found in corpus: " + piece_id);
    TokenSequence ts = load_piece(path, config.positions_per_bar, &warnings);
    r.bars_in = static_cast<int>(bar_count(ts));

    const auto p = static_cast<std::size_t>(boundary_bar);
    TokenSequence expanded = expand(ts, p, config.gap_bars, infiller, piece_seed(config.seed, piece_id));
    r.bars_out = static_cast<int>(bar_count(expanded));

    const std::size_t n = bar_count(ts);
    const auto gap = static_cast<std::size_t>(config.gap_bars);
    BoundaryAnalysis a = boundary_analysis(slice_bars(expanded, 0, p), slice_bars(expanded, p, p + gap),
                                           slice_bars(expanded, p + gap, n + gap));
    r.gs1 = a.gs1;
    r.gs2 = a.gs2;
    r.delta_gs = a.delta_gs;
    r.rhs1 = a.rhs1;
    r.rhs2 = a.rhs2;
    r.delta_rhs = a.delta_rhs;

    fs::path out = fs::path(config.output_dir) / (fs::path(piece_id).stem().string() + "_expanded.mid");
    write_file_bytes(out.string(), write_midi(dequantize(decode(expanded), config.ticks_per_quarter)));
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  return r;
}

nlohmann::ordered_json result_to_json(const PieceResult& r) {
  nlohmann::ordered_json j;
  j["piece_id"] = r.piece_id;
  j["boundary_bar"] = r.boundary_bar;
  if (r.ok()) {
    j["bars_in"] = r.bars_in;
    j["bars_out"] = r.bars_out;
    j["gs1"] = r.gs1;
    j["gs2"] = r.gs2;
    j["delta_gs"] = r.delta_gs;
    j["rhs1"] = r.rhs1;
    j["rhs2"] = r.rhs2;
    j["delta_rhs"] = r.delta_rhs;
  } else {
    for (const char* key : {"bars_in", "bars_out", "gs1", "gs2", "delta_gs", "rhs1", "rhs2", "delta_rhs"}) {
      j[key] = nullptr;
    }
    j["error"] = *r.error;
  }
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

// ============================================================================
// Configuration
// ============================================================================

InfillerKind parse_infiller_kind(const std::string& name) {
  if (name == "copy-past") return InfillerKind::CopyPast;
  if (name == "copy-future") return InfillerKind::CopyFuture;
  if (name == "markov") return InfillerKind::Markov;
  if (name == "random") return InfillerKind::Random;
  throw SchemaError("infiller", "unknown infiller '" + name + "' (copy-past, copy-future, markov, random)");
}

std::string to_string(InfillerKind kind) {
  switch (kind) {
    case InfillerKind::CopyPast:
      return "copy-past";
    case InfillerKind::CopyFuture:
      return "copy-future";
    case InfillerKind::Markov:
      return "markov";
    case InfillerKind::Random:
      return "random";
  }
  return "?";
}

ExperimentConfig load_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("<root>", e.what());
  }
  if (!j.is_object()) throw SchemaError("<root>", "config must be a JSON object");

  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? p : (base / p).string(); };
  auto str = [&](const char* key, bool required) -> std::optional<std::string> {
    if (!j.contains(key)) {
      if (required) throw SchemaError(key, "missing");
      return std::nullopt;
    }
    if (!j[key].is_string()) throw SchemaError(key, "must be a string");
    return j[key].get<std::string>();
  };
  auto integer = [&](const char* key, long long lo) -> std::optional<long long> {
    if (!j.contains(key)) return std::nullopt;
    if (!j[key].is_number_integer()) throw SchemaError(key, "must be an integer");
    long long v = j[key].get<long long>();
    if (v < lo) throw SchemaError(key, "must be >= " + std::to_string(lo));
    return v;
  };

  ExperimentConfig c;
  c.corpus_dir = resolve(*str("corpus_dir", true));
  c.annotations = resolve(*str("annotations", true));
  c.output_dir = resolve(*str("output_dir", true));
  if (auto v = integer("gap_bars", 1)) c.gap_bars = static_cast<int>(*v);
  if (auto v = integer("positions_per_bar", 1)) c.positions_per_bar = static_cast<int>(*v);
  if (auto v = integer("ticks_per_quarter", 1)) c.ticks_per_quarter = static_cast<int>(*v);
  if (auto v = integer("jobs", 1)) c.jobs = static_cast<int>(*v);
  if (auto v = integer("order", 1)) c.infiller.order = static_cast<int>(*v);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw SchemaError("seed", "must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (auto name = str("infiller", false)) c.infiller.kind = parse_infiller_kind(*name);
  if (auto model = str("model", false)) c.infiller.model_path = resolve(*model);
  return c;
}

void validate_config(const ExperimentConfig& config) {
  if (config.gap_bars < 1) throw SchemaError("gap_bars", "must be >= 1");
  if (config.positions_per_bar < 1) throw SchemaError("positions_per_bar", "must be >= 1");
  if (config.ticks_per_quarter < 1) throw SchemaError("ticks_per_quarter", "must be >= 1");
  if (config.jobs < 1) throw SchemaError("jobs", "must be >= 1");
  if (!fs::is_directory(config.corpus_dir)) throw SchemaError("corpus_dir", "not a directory: " + config.corpus_dir);
  if (!fs::is_regular_file(config.annotations)) throw SchemaError("annotations", "not a file: " + config.annotations);
  if (config.output_dir.empty()) throw SchemaError("output_dir", "must not be empty");
  if (config.infiller.kind == InfillerKind::Markov && !config.infiller.model_path.empty() &&
      !fs::is_regular_file(config.infiller.model_path)) {
    throw SchemaError("model", "not a file: " + config.infiller.model_path);
  }
}

std::map<std::string, int> parse_annotations(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("<root>", e.what());
  }
  if (!j.is_array()) throw SchemaError("<root>", "annotations must be a JSON list");
  if (j.empty()) throw EmptyAnnotations();
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& entry = j[i];
    const std::string where = "[" + std::to_string(i) + "]";
    if (!entry.is_object()) throw SchemaError(where, "entries must be objects");
    if (!entry.contains("file") || !entry["file"].is_string() || entry["file"].get<std::string>().empty()) {
      throw SchemaError(where + ".file", "must be a non-empty string");
    }
    if (!entry.contains("boundary_bar") || !entry["boundary_bar"].is_number_integer()) {
      throw SchemaError(where + ".boundary_bar", "must be an integer");
    }
    auto file = entry["file"].get<std::string>();
    auto bar = entry["boundary_bar"].get<long long>();
    if (bar < 1 || bar > 1'000'000) throw SchemaError(where + ".boundary_bar", "must be >= 1");
    if (!out.emplace(file, static_cast<int>(bar)).second) throw SchemaError(where + ".file", "duplicate entry " + file);
  }
  return out;
}

std::map<std::string, int> load_annotations(const std::string& path) { return parse_annotations(read_text(path)); }

// ============================================================================
// Running
// ============================================================================

std::size_t RunReport::failures() const {
  return static_cast<std::size_t>(std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.ok(); }));
}

std::uint64_t piece_seed(std::uint64_t seed, const std::string& piece_id) { return seed ^ fnv1a64(piece_id); }

std::vector<std::pair<std::string, TokenSequence>> load_corpus(const std::string& dir, int positions_per_bar,
                                                              std::vector<std::string>* warnings) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_midi_file(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::pair<std::string, TokenSequence>> out;
  for (const auto& f : files) {
    try {
      out.emplace_back(f.filename().string(), load_piece(f, positions_per_bar, warnings));
    } catch (const std::exception& e) {
      if (warnings) warnings->push_back(f.filename().string() + ": skipped (" + e.what() + ")");
    }
  }
  return out;
}

std::unique_ptr<Infiller> make_infiller(const ExperimentConfig& config) {
  switch (config.infiller.kind) {
    case InfillerKind::CopyPast:
      return std::make_unique<CopyPastInfiller>();
    case InfillerKind::CopyFuture:
      return std::make_unique<CopyFutureInfiller>();
    case InfillerKind::Random:
      return std::make_unique<RandomInfiller>();
    case InfillerKind::Markov: {
      std::shared_ptr<const MarkovModel> model;
      if (!config.infiller.model_path.empty()) {
        model = std::make_shared<MarkovModel>(load_markov(read_text(config.infiller.model_path)));
      } else {
        std::vector<TokenSequence> corpus;
        for (auto& [id, ts] : load_corpus(config.corpus_dir, config.positions_per_bar)) corpus.push_back(std::move(ts));
        model = std::make_shared<MarkovModel>(train_markov(corpus, config.infiller.order));
      }
      return std::make_unique<MarkovInfiller>(std::move(model));
    }
  }
  throw std::logic_error("unhandled infiller kind");
}

RunReport run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  auto annotations = load_annotations(config.annotations);
  fs::create_directories(config.output_dir);

  RunReport report;
  for (const auto& entry : fs::directory_iterator(config.corpus_dir)) {
    if (!entry.is_regular_file() || !is_midi_file(entry.path())) continue;
    std::string name = entry.path().filename().string();
    if (!annotations.contains(name)) report.warnings.push_back(name + ": no boundary annotation; skipped");
  }
  std::sort(report.warnings.begin(), report.warnings.end());

  auto infiller = make_infiller(config);
  std::vector<std::pair<std::string, int>> pieces(annotations.begin(), annotations.end());
  std::vector<PieceResult> results(pieces.size());
  std::vector<std::vector<std::string>> piece_warnings(pieces.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < pieces.size(); i = next++) {
      results[i] = run_piece(config, *infiller, pieces[i].first, pieces[i].second, piece_warnings[i]);
    }
  };
  const auto threads = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), pieces.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < pieces.size(); ++i) {
    for (auto& w : piece_warnings[i]) report.warnings.push_back(std::move(w));
    if (!results[i].ok()) report.warnings.push_back(results[i].piece_id + ": " + *results[i].error);
  }
  report.results = std::move(results);
  return report;
}

// ============================================================================
// Output
// ============================================================================

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw std::runtime_error("cannot format double");
  return std::string(buf, ptr);
}

std::string results_csv(const std::vector<PieceResult>& results) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : results) {
    out += csv_field(r.piece_id) + "," + std::to_string(r.boundary_bar);
    if (r.ok()) {
      out += "," + std::to_string(r.bars_in) + "," + std::to_string(r.bars_out);
      for (double v : {r.gs1, r.gs2, r.delta_gs, r.rhs1, r.rhs2, r.delta_rhs}) out += "," + format_double(v);
    } else {
      out += ",,,,,,,,";
    }
    out += "\n";
  }
  return out;
}

std::string results_json(const std::vector<PieceResult>& results) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : results) j.push_back(result_to_json(r));
  return j.dump(2) + "\n";
}

std::string summary_json(const std::vector<PieceResult>& results) {
  std::vector<const PieceResult*> ok;
  for (const auto& r : results) {
    if (r.ok()) ok.push_back(&r);
  }
  auto stats = [&](double PieceResult::*field) {
    nlohmann::ordered_json s;
    const double n = static_cast<double>(ok.size());
    double sum = 0.0;
    int positive = 0;
    for (const auto* r : ok) {
      sum += r->*field;
      positive += (r->*field > 0.0) ? 1 : 0;
    }
    const double mean = ok.empty() ? 0.0 : sum / n;
    double ss = 0.0;
    for (const auto* r : ok) ss += (r->*field - mean) * (r->*field - mean);
    s["mean"] = mean;
    s["stddev"] = ok.empty() ? 0.0 : std::sqrt(ss / n);
    s["positive"] = positive;
    return s;
  };

  nlohmann::ordered_json j;
  j["count"] = ok.size();
  j["failed"] = results.size() - ok.size();
  j["delta_gs"] = stats(&PieceResult::delta_gs);
  j["delta_rhs"] = stats(&PieceResult::delta_rhs);
  return j.dump(2) + "\n";
}

void emit_results(const std::vector<PieceResult>& results, const std::string& output_dir) {
  if (results.empty()) throw std::invalid_argument("no results to emit");
  fs::create_directories(output_dir);
  write_text(fs::path(output_dir) / "results.csv", results_csv(results));
  write_text(fs::path(output_dir) / "results.json", results_json(results));
  write_text(fs::path(output_dir) / "summary.json", summary_json(results));
}

}  // namespace scorex
