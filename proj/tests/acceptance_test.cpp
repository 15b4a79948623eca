// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.
//
// Tolerances and sample counts are fixed here and are not tunable from the
// command line.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "scorex/expansion.h"
#include "scorex/harness.h"
#include "scorex/markov.h"
#include "scorex/metrics.h"
#include "scorex/midi_io.h"
#include "scorex/tokenizer.h"
#include "test_support.h"

namespace {

namespace fs = std::filesystem;
using namespace scorex;

const fs::path kData = SCOREX_DATA_DIR;

constexpr double kExactTol = 1e-9;
constexpr double kOracleTol = 1e-12;
constexpr int kOracleTrials = 1000;
constexpr int kGibbsOuter = 200;
constexpr int kGibbsInner = 200;
constexpr int kCodecTrials = 500;
constexpr int kFixturePieces = 20;
constexpr int kFixtureBars = 12;
constexpr int kGapBars = 4;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

struct Criterion {
  std::string name;
  double budget_seconds;  // 0 = no runtime bound
  std::function<Check()> body;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RegisterHistogram from_bins(const std::array<double, 7>& bins) {
  RegisterHistogram h;
  h.bins = bins;
  return h;
}

GroovingVector from_set(const std::set<int>& onsets, int q) {
  GroovingVector g;
  g.bits.assign(static_cast<std::size_t>(q), 0);
  for (int p : onsets) g.bits[static_cast<std::size_t>(p)] = 1;
  return g;
}

struct Fixture {
  std::string id;
  std::size_t boundary;
  TokenSequence tokens;
};

std::vector<Fixture> load_fixtures() {
  auto ann = load_annotations((kData / "annotations.json").string());
  std::vector<Fixture> out;
  for (const auto& [id, p] : ann) {
    auto bytes = read_file_bytes((kData / "fixtures" / id).string());
    out.push_back({id, static_cast<std::size_t>(p), encode(quantize(parse_midi(bytes), 16))});
  }
  return out;
}

TokenSequence midi_round_trip(const TokenSequence& ts) {
  auto bytes = write_midi(dequantize(decode(ts), 480));
  return encode(quantize(parse_midi(bytes), ts.positions_per_bar));
}

// ---------------------------------------------------------------------------

Check metric_exactness() {
  Check c;
  const double log2_7 = std::log2(7.0);
  double v = rhs(RegisterHistogram::uniform(), RegisterHistogram::uniform());
  c.require(std::abs(v + log2_7) <= kExactTol, "rhs(uniform, uniform) = " + format_double(v));
  v = rhs(from_bins({0, 0, 0, 1, 0, 0, 0}), RegisterHistogram::uniform());
  c.require(std::abs(v + log2_7) <= kExactTol, "rhs(one-hot, uniform) = " + format_double(v));

  GroovingVector a = from_set({0, 8}, 16);
  GroovingVector complement;
  for (auto bit : a.bits) complement.bits.push_back(bit ? 0 : 1);
  c.require(gs_pair(a, a) == 1.0, "gs identity != 1");
  c.require(gs_pair(a, complement) == 0.0, "gs complement != 0");
  c.require(gs_pair(a, from_set({0, 4}, 16)) == 0.875, "gs {0,8}x{0,4} != 0.875");
  return c;
}

Check oracle_equivalence() {
  Check c;
  std::mt19937_64 rng(20211107);
  std::uniform_int_distribution<int> bit(0, 1);
  double worst_rhs = 0.0, worst_gs = 0.0;
  for (int t = 0; t < kOracleTrials; ++t) {
    auto h1 = testing::random_distribution(rng);
    auto h2 = testing::random_distribution(rng);
    worst_rhs = std::max(worst_rhs, std::abs(rhs(from_bins(h1), from_bins(h2)) - testing::oracle_cross_entropy(h1, h2)));

    std::set<int> a, b;
    for (int i = 0; i < 16; ++i) {
      if (bit(rng)) a.insert(i);
      if (bit(rng)) b.insert(i);
    }
    worst_gs = std::max(worst_gs, std::abs(gs_pair(from_set(a, 16), from_set(b, 16)) - testing::oracle_gs(a, b, 16)));
  }
  c.require(worst_rhs <= kOracleTol, "rhs max error " + format_double(worst_rhs));
  c.require(worst_gs <= kOracleTol, "gs max error " + format_double(worst_gs));
  c.detail = c.ok ? "max |err| rhs " + format_double(worst_rhs) + ", gs " + format_double(worst_gs) : c.detail;
  return c;
}

Check gibbs_property() {
  Check c;
  std::mt19937_64 rng(1729);
  std::uniform_int_distribution<int> count(0, 12);
  auto random_smoothed = [&] {
    std::array<double, 7> w{};
    for (double& x : w) x = count(rng);
    return smoothed_histogram(w);
  };
  for (int i = 0; i < kGibbsOuter && c.ok; ++i) {
    RegisterHistogram h1 = random_smoothed();
    const double self = rhs(h1, h1);
    for (int j = 0; j < kGibbsInner; ++j) {
      RegisterHistogram h2 = random_smoothed();
      const double v = rhs(h1, h2);
      if (h2 == h1) {
        c.require(v == self, "equality case differs");
      } else {
        c.require(v < self, "rhs(h1,h2) >= rhs(h1,h1) for h2 != h1 at outer " + std::to_string(i));
      }
    }
  }
  return c;
}

Check codec_round_trips() {
  Check c;
  std::mt19937_64 rng(500);
  int failures = 0;
  for (int t = 0; t < kCodecTrials; ++t) {
    Score s = testing::random_score(rng, 100);
    if (parse_midi(write_midi(s)).notes != s.notes) ++failures;

    QuantizedScore qs = testing::random_quantized(rng, 100);
    TokenSequence ts = encode(qs);
    QuantizedScore back = decode(ts);
    bool same = back.bars.size() == qs.bars.size();
    for (std::size_t b = 0; same && b < qs.bars.size(); ++b) {
      same = back.bars[b].size() == qs.bars[b].size();
      for (std::size_t i = 0; same && i < qs.bars[b].size(); ++i) {
        const auto& x = qs.bars[b][i];
        const auto& y = back.bars[b][i];
        same = x.position == y.position && x.pitch == y.pitch && x.duration == y.duration &&
               velocity_bin(x.velocity) == velocity_bin(y.velocity);
      }
    }
    if (!same || encode(back) != ts) ++failures;
  }
  c.require(failures == 0, std::to_string(failures) + " round-trip failures");
  return c;
}

Check expansion_contract() {
  Check c;
  auto fixtures = load_fixtures();
  c.require(fixtures.size() == kFixturePieces, "expected 20 fixtures, found " + std::to_string(fixtures.size()));

  std::vector<TokenSequence> corpus;
  for (const auto& f : fixtures) corpus.push_back(f.tokens);
  auto model = std::make_shared<MarkovModel>(train_markov(corpus, 2));
  CopyPastInfiller copy_past;
  CopyFutureInfiller copy_future;
  RandomInfiller random;
  MarkovInfiller markov(model);
  const std::vector<const Infiller*> infillers = {&copy_past, &copy_future, &random, &markov};

  for (const auto& f : fixtures) {
    c.require(bar_count(f.tokens) == kFixtureBars, f.id + " is not 12 bars");
    const std::size_t n = bar_count(f.tokens);
    for (const auto* inf : infillers) {
      TokenSequence out = expand(f.tokens, f.boundary, kGapBars, *inf, piece_seed(2021, f.id));
      TokenSequence reread = midi_round_trip(out);
      const std::string tag = f.id + "/" + inf->name();
      c.require(bar_count(reread) == n + kGapBars, tag + ": output is not 16 bars");
      if (bar_count(reread) != n + kGapBars) continue;
      c.require(slice_bars(reread, 0, f.boundary) == slice_bars(f.tokens, 0, f.boundary), tag + ": past changed");
      c.require(slice_bars(reread, f.boundary + kGapBars, n + kGapBars) == slice_bars(f.tokens, f.boundary, n),
                tag + ": future changed");
    }
  }

  // Same contract through the batch runner and the files it writes.
  auto cfg = load_config((kData / "experiment.json").string());
  cfg.output_dir = (fs::temp_directory_path() / "scorex_acceptance_contract").string();
  fs::remove_all(cfg.output_dir);
  auto report = run_experiment(cfg);
  c.require(report.results.size() == kFixturePieces && report.failures() == 0, "batch run did not succeed");
  for (const auto& r : report.results) {
    c.require(r.bars_in == kFixtureBars && r.bars_out == kFixtureBars + kGapBars, r.piece_id + ": bars_out != 16");
    auto original = std::find_if(fixtures.begin(), fixtures.end(), [&](const Fixture& f) { return f.id == r.piece_id; });
    auto written = fs::path(cfg.output_dir) / (fs::path(r.piece_id).stem().string() + "_expanded.mid");
    TokenSequence ts = encode(quantize(parse_midi(read_file_bytes(written.string())), 16));
    const auto p = original->boundary;
    c.require(bar_count(ts) == 16, r.piece_id + ": written file is not 16 bars");
    if (bar_count(ts) != 16) continue;
    c.require(slice_bars(ts, 0, p) == slice_bars(original->tokens, 0, p), r.piece_id + ": written past changed");
    c.require(slice_bars(ts, p + kGapBars, 16) == slice_bars(original->tokens, p, 12),
              r.piece_id + ": written future changed");
  }
  fs::remove_all(cfg.output_dir);
  return c;
}

Check sign_properties() {
  Check c;
  CopyPastInfiller copy_past;
  CopyFutureInfiller copy_future;
  auto fixtures = load_fixtures();
  c.require(fixtures.size() == kFixturePieces, "expected 20 fixtures");
  for (const auto& f : fixtures) {
    const std::size_t n = bar_count(f.tokens);
    auto [past, future] = split_at_boundary(f.tokens, f.boundary);

    // Preconditions on the fixture itself.
    std::set<int> past_onsets, future_onsets, past_bins, future_bins;
    for (const auto& bar : decode(past).bars) {
      for (const auto& note : bar) {
        past_onsets.insert(note.position);
        past_bins.insert(register_bin(note.pitch));
      }
    }
    for (const auto& bar : decode(future).bars) {
      for (const auto& note : bar) {
        future_onsets.insert(note.position);
        future_bins.insert(register_bin(note.pitch));
      }
    }
    std::vector<int> shared;
    std::set_intersection(past_onsets.begin(), past_onsets.end(), future_onsets.begin(), future_onsets.end(),
                          std::back_inserter(shared));
    c.require(shared.empty(), f.id + ": past and future onsets overlap");
    c.require(*past_bins.rbegin() <= 1 && *future_bins.begin() >= 4 && *future_bins.rbegin() <= 5,
              f.id + ": registers are not octaves 1-2 vs 5-6");

    for (const auto* inf : std::vector<const Infiller*>{&copy_future, &copy_past}) {
      TokenSequence out = expand(f.tokens, f.boundary, kGapBars, *inf, 0);
      auto a = boundary_analysis(slice_bars(out, 0, f.boundary), slice_bars(out, f.boundary, f.boundary + kGapBars),
                                 slice_bars(out, f.boundary + kGapBars, n + kGapBars));
      if (inf == &copy_future) {
        c.require(a.delta_gs > 0.0, f.id + ": copy-future delta_gs = " + format_double(a.delta_gs));
        c.require(a.delta_rhs > 0.0, f.id + ": copy-future delta_rhs = " + format_double(a.delta_rhs));
      } else {
        c.require(a.delta_gs < 0.0, f.id + ": copy-past delta_gs = " + format_double(a.delta_gs));
        c.require(a.delta_rhs < 0.0, f.id + ": copy-past delta_rhs = " + format_double(a.delta_rhs));
      }
    }
  }
  return c;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(SCOREX_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Check determinism() {
  Check c;
  const fs::path base = fs::temp_directory_path() / "scorex_acceptance_determinism";
  fs::remove_all(base);
  const std::string config = (kData / "experiment.json").string();
  for (const char* infiller : {"markov", "random"}) {
    const fs::path a = base / (std::string(infiller) + "_a");
    const fs::path b = base / (std::string(infiller) + "_b");
    for (const auto& out : {a, b}) {
      int code = run_cli("run --config " + config + " --infiller " + infiller + " --out " + out.string());
      c.require(code == 0, std::string("run exited with ") + std::to_string(code));
    }
    std::vector<std::string> files = {"results.csv", "results.json"};
    for (int i = 1; i <= kFixturePieces; ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "piece_%02d_expanded.mid", i);
      files.emplace_back(name);
    }
    for (const auto& f : files) {
      c.require(fs::exists(a / f), std::string(infiller) + ": missing " + f);
      c.require(slurp(a / f) == slurp(b / f), std::string(infiller) + ": " + f + " differs between runs");
    }
  }
  fs::remove_all(base);
  return c;
}

Check markov_degenerate_corpus() {
  Check c;
  const std::vector<Token> bar = {Token::bar(),       Token::position(0), Token::pitch(60),
                                  Token::duration(4), Token::velocity(5), Token::position(8),
                                  Token::pitch(64),   Token::duration(2), Token::velocity(3)};
  TokenSequence repeated;
  for (int i = 0; i < 8; ++i) repeated.tokens.insert(repeated.tokens.end(), bar.begin(), bar.end());
  std::vector<TokenSequence> corpus = {repeated};
  auto model = std::make_shared<MarkovModel>(train_markov(corpus, 2));

  // Enumerate the order-2 table: every context must have a single successor,
  // so the walk from the past's last two tokens is unique.
  std::map<std::vector<Token>, Token> successor;
  for (const auto& [ctx, dist] : model->table(2)) {
    c.require(dist.size() == 1, "context with several successors");
    successor[ctx] = dist.begin()->first;
  }
  std::vector<Token> walk = {bar[bar.size() - 2], bar.back()};
  std::vector<Token> expected;
  for (std::size_t step = 0; step < bar.size(); ++step) {
    Token next = successor.at({walk[walk.size() - 2], walk.back()});
    expected.push_back(next);
    walk.push_back(next);
  }
  c.require(expected == bar, "enumerated path does not spell the pattern bar");

  MarkovInfiller inf(model);
  ExpansionRequest request;
  request.past.tokens.assign(bar.begin(), bar.end());
  request.future.tokens.assign(bar.begin(), bar.end());
  request.gap_bars = 1;
  for (std::uint64_t seed = 0; seed < 1000 && c.ok; ++seed) {
    c.require(inf.generate(request, seed * 0x9E3779B97F4A7C15ULL).tokens == expected,
              "seed " + std::to_string(seed) + " deviates from the pattern");
  }
  return c;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"metric exactness", 0.5, metric_exactness},
      {"oracle equivalence (1000 pairs, 1e-12)", 5.0, oracle_equivalence},
      {"Gibbs property (200 x 200)", 5.0, gibbs_property},
      {"codec round trips (500 scores)", 10.0, codec_round_trips},
      {"expansion contract (20 fixtures, 12 -> 16 bars)", 10.0, expansion_contract},
      {"sign properties (copy-future > 0, copy-past < 0)", 0.0, sign_properties},
      {"determinism of `run`", 0.0, determinism},
      {"Markov degenerate corpus", 0.0, markov_degenerate_corpus},
  };

  int failed = 0;
  for (const auto& criterion : criteria) {
    auto start = std::chrono::steady_clock::now();
    Check result;
    try {
      result = criterion.body();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (result.ok && criterion.budget_seconds > 0.0 && seconds > criterion.budget_seconds) {
      result.ok = false;
      result.detail = "exceeded runtime budget of " + format_double(criterion.budget_seconds) + " s";
    }
    failed += result.ok ? 0 : 1;
    std::cout << (result.ok ? "[PASS] " : "[FAIL] ") << criterion.name << " (" << std::fixed
              << std::setprecision(3) << seconds << " s)";
    if (!result.detail.empty()) std::cout << ": " << result.detail;
    std::cout << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " acceptance criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
