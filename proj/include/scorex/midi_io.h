/**
 * @file midi_io.h
 * @brief Standard MIDI File reading/writing and grid quantization.
 *
 * All pieces are assumed to be in 4/4. A bar therefore spans
 * 4 * ticks_per_quarter ticks and is divided into Q grid positions.
 */

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace scorex {

inline constexpr int kDefaultPositionsPerBar = 16;

/// One sounding note. Onset and duration are in ticks.
struct NoteEvent {
  int pitch = 60;
  std::int64_t onset = 0;
  std::int64_t duration = 1;
  int velocity = 64;

  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
  friend auto operator<=>(const NoteEvent&, const NoteEvent&) = default;
};

/// A parsed piece: notes sorted by (onset, pitch, duration, velocity).
struct Score {
  int ticks_per_quarter = 480;
  std::vector<NoteEvent> notes;

  friend bool operator==(const Score&, const Score&) = default;
};

struct QuantizedNote {
  int position = 0;  ///< Grid position within the bar, [0, Q).
  int pitch = 60;
  int duration = 1;  ///< Grid units, [1, 2Q].
  int velocity = 64;

  friend bool operator==(const QuantizedNote&, const QuantizedNote&) = default;
  friend auto operator<=>(const QuantizedNote&, const QuantizedNote&) = default;
};

using QuantizedBar = std::vector<QuantizedNote>;

struct QuantizedScore {
  int positions_per_bar = kDefaultPositionsPerBar;
  std::vector<QuantizedBar> bars;  ///< Never empty.

  std::size_t note_count() const;

  friend bool operator==(const QuantizedScore&, const QuantizedScore&) = default;
};

/// Throws std::invalid_argument if a note violates NoteEvent invariants.
void validate_note(const NoteEvent& note);

/// Parses an SMF format 0 or 1 file. Tracks are merged, channel 10 is
/// dropped, tempo and program changes are ignored. Non-4/4 time signatures
/// raise MeterError; structural problems raise ParseError.
///
/// Notes still sounding at end of track are closed there and a message is
/// appended to `warnings` when it is non-null.
Score parse_midi(std::span<const std::uint8_t> bytes, std::vector<std::string>* warnings = nullptr);

/// Writes a format 0 file at 120 BPM in 4/4 with explicit note-off events.
/// Overlapping notes of the same pitch are spread over distinct channels so
/// that parse_midi recovers every note exactly.
std::vector<std::uint8_t> write_midi(const Score& score);

/// Snaps onsets to the nearest grid position (ties go to the later one) and
/// durations to the nearest positive multiple, clamped to [1, 2Q].
QuantizedScore quantize(const Score& score, int positions_per_bar = kDefaultPositionsPerBar);

/// Places every grid position back onto ticks. Exact inverse of quantize
/// on grid-aligned material.
Score dequantize(const QuantizedScore& qs, int ticks_per_quarter = 480);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace scorex
