/**
 * @file tokenizer.h
 * @brief Bar-structured event tokens (REMI-style, flat).
 *
 * Grammar: Bar (Position Pitch Duration Velocity)* per bar, bars in
 * temporal order, positions non-decreasing within a bar.
 */

#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "scorex/midi_io.h"

namespace scorex {

inline constexpr int kMinTokenPitch = 22;
inline constexpr int kMaxTokenPitch = 107;
inline constexpr int kVelocityBins = 8;

enum class TokenKind : int { Bar = 0, Position = 1, Pitch = 2, Duration = 3, Velocity = 4 };

/// A single event token. `value` is unused (zero) for Bar.
///
/// Ordering is (kind, value); it defines the fixed vocabulary order used by
/// samplers and model files.
struct Token {
  TokenKind kind = TokenKind::Bar;
  int value = 0;

  static constexpr Token bar() { return {TokenKind::Bar, 0}; }
  static constexpr Token position(int p) { return {TokenKind::Position, p}; }
  static constexpr Token pitch(int n) { return {TokenKind::Pitch, n}; }
  static constexpr Token duration(int d) { return {TokenKind::Duration, d}; }
  static constexpr Token velocity(int v) { return {TokenKind::Velocity, v}; }

  friend constexpr bool operator==(const Token&, const Token&) = default;
  friend constexpr auto operator<=>(const Token&, const Token&) = default;
};

/// Debug text form: `BAR`, `POS 0`, `PITCH 60`, `DUR 4`, `VEL 5`.
std::string to_string(const Token& token);

/// Inverse of to_string; throws GrammarError(0, ...) on unknown text.
Token token_from_string(std::string_view text);

/// True when the token payload lies in its legal range for grid size Q.
bool in_range(const Token& token, int positions_per_bar);

struct TokenSequence {
  int positions_per_bar = kDefaultPositionsPerBar;
  std::vector<Token> tokens;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

/// Velocity 1..127 to one of 8 equal-width bins: floor((v - 1) / 15.75).
int velocity_bin(int velocity);

/// Representative velocity of a bin (rounded bin midpoint).
int velocity_from_bin(int bin);

TokenSequence encode(const QuantizedScore& qs);

/// Throws GrammarError on malformed streams.
QuantizedScore decode(const TokenSequence& ts);

/// Throws GrammarError if `ts` violates the grammar or value ranges.
void validate(const TokenSequence& ts);

std::size_t bar_count(const TokenSequence& ts);

/// Bars [from, to). Throws RangeError unless 0 <= from < to <= bar_count.
TokenSequence slice_bars(const TokenSequence& ts, std::size_t from, std::size_t to);

/// Appends `tail` to `head`. Both must share the same grid size.
TokenSequence concat(const TokenSequence& head, const TokenSequence& tail);

std::string to_text(const TokenSequence& ts);
TokenSequence from_text(std::string_view text, int positions_per_bar = kDefaultPositionsPerBar);

// ----------------------------------------------------------------------------
// Grammar state machine, shared by the decoder and constrained samplers.
// ----------------------------------------------------------------------------

/// Incremental grammar checker. `accepts` answers whether a token may come
/// next; `push` advances (it does not re-check).
class GrammarState {
 public:
  explicit GrammarState(int positions_per_bar) : positions_per_bar_(positions_per_bar) {}

  bool accepts(const Token& token) const;
  void push(const Token& token);

  /// Next expected kind(s), for error messages.
  std::string expected() const;

  std::size_t bars() const { return bars_; }
  std::size_t notes_in_bar() const { return notes_in_bar_; }
  /// True between a complete note (or a Bar) and the next token.
  bool at_note_boundary() const { return next_ == Expect::BarOrPosition; }

 private:
  enum class Expect { Bar, BarOrPosition, Pitch, Duration, Velocity };

  int positions_per_bar_;
  Expect next_ = Expect::Bar;
  int last_position_ = 0;
  std::size_t bars_ = 0;
  std::size_t notes_in_bar_ = 0;
};

}  // namespace scorex
