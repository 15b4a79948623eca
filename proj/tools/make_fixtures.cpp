/**
 * @file make_fixtures.cpp
 * @brief Regenerates the bundled 12-bar fixture corpus under data/.
 *
 * Each piece has a phrase boundary at bar p. Bars before p repeat one onset
 * pattern in octaves 1-2; bars from p on repeat a disjoint onset pattern in
 * octaves 5-6. Onsets and durations carry small timing jitter so that the
 * quantizer has real work to do.
 *
 * Usage: make_fixtures <data_dir>
 */

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"

#include "scorex/midi_io.h"
#include "scorex/rng.h"

namespace fs = std::filesystem;

namespace {

constexpr int kPieces = 20;
constexpr int kBars = 12;
constexpr int kTpq = 480;
constexpr int kQ = 16;
constexpr int kStep = 4 * kTpq / kQ;
constexpr int kJitter = 20;

std::vector<int> take_sorted(std::vector<int>& pool, int count) {
  std::vector<int> out(pool.begin(), pool.begin() + count);
  pool.erase(pool.begin(), pool.begin() + count);
  std::sort(out.begin(), out.end());
  return out;
}

void add_bar(scorex::Score& score, scorex::Rng& rng, int bar, const std::vector<int>& pattern, int low_pitch,
             int high_pitch) {
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    int next = (i + 1 < pattern.size()) ? pattern[i + 1] : kQ;
    int grid_len = std::max(1, next - pattern[i]);
    int chord = rng.between(1, 2);
    for (int c = 0; c < chord; ++c) {
      std::int64_t onset = static_cast<std::int64_t>(bar) * kQ * kStep + pattern[i] * kStep + rng.between(-kJitter, kJitter);
      std::int64_t duration = grid_len * kStep + rng.between(-kJitter, kJitter);
      scorex::NoteEvent n;
      n.pitch = rng.between(low_pitch, high_pitch);
      n.onset = std::max<std::int64_t>(0, onset);
      n.duration = std::max<std::int64_t>(1, duration);
      n.velocity = rng.between(40, 110);
      score.notes.push_back(n);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_fixtures <data_dir>\n";
    return 1;
  }
  const fs::path data = argv[1];
  const fs::path corpus = data / "fixtures";
  fs::create_directories(corpus);

  nlohmann::ordered_json annotations = nlohmann::ordered_json::array();
  for (int piece = 0; piece < kPieces; ++piece) {
    scorex::Rng rng(0x5C0E5EEDULL + static_cast<std::uint64_t>(piece));
    std::vector<int> pool(kQ);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = kQ - 1; i > 0; --i) std::swap(pool[i], pool[rng.between(0, i)]);
    auto past = take_sorted(pool, rng.between(3, 6));
    auto future = take_sorted(pool, rng.between(3, 6));

    const int boundary = 4 + piece % 5;
    scorex::Score score;
    score.ticks_per_quarter = kTpq;
    for (int bar = 0; bar < kBars; ++bar) {
      if (bar < boundary) {
        add_bar(score, rng, bar, past, 24, 47);
      } else {
        add_bar(score, rng, bar, future, 72, 95);
      }
    }
    std::sort(score.notes.begin(), score.notes.end());

    char name[32];
    std::snprintf(name, sizeof(name), "piece_%02d.mid", piece + 1);
    auto bytes = scorex::write_midi(score);
    scorex::write_file_bytes((corpus / name).string(), bytes);
    annotations.push_back({{"file", name}, {"boundary_bar", boundary}});
  }

  std::ofstream(data / "annotations.json") << annotations.dump(2) << "\n";

  nlohmann::ordered_json config;
  config["corpus_dir"] = "fixtures";
  config["annotations"] = "annotations.json";
  config["output_dir"] = "../out/experiment";
  config["gap_bars"] = 4;
  config["infiller"] = "copy-future";
  config["seed"] = 2021;
  config["positions_per_bar"] = kQ;
  std::ofstream(data / "experiment.json") << config.dump(2) << "\n";

  std::cout << "wrote " << kPieces << " pieces to " << corpus << "\n";
  return 0;
}
