/**
 * @file tokenizer.cpp
 * @brief Encoding, decoding and slicing of event-token sequences.
 */

#include "scorex/tokenizer.h"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "scorex/errors.h"

namespace scorex {

namespace {

std::string describe(const TokenSequence& ts, std::size_t i) {
  return i < ts.tokens.size() ? to_string(ts.tokens[i]) : std::string("end of sequence");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string to_string(const Token& token) {
  switch (token.kind) {
    case TokenKind::Bar:
      return "BAR";
    case TokenKind::Position:
      return "POS " + std::to_string(token.value);
    case TokenKind::Pitch:
      return "PITCH " + std::to_string(token.value);
    case TokenKind::Duration:
      return "DUR " + std::to_string(token.value);
    case TokenKind::Velocity:
      return "VEL " + std::to_string(token.value);
  }
  return "?";
}

Token token_from_string(std::string_view text) {
  text = trim(text);
  if (text == "BAR") return Token::bar();
  auto space = text.find(' ');
  if (space == std::string_view::npos) throw GrammarError(0, "token", std::string(text));
  std::string_view name = text.substr(0, space);
  std::string_view num = trim(text.substr(space + 1));
  int value = 0;
  auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
  if (ec != std::errc() || ptr != num.data() + num.size()) {
    throw GrammarError(0, "integer payload", std::string(text));
  }
  if (name == "POS") return Token::position(value);
  if (name == "PITCH") return Token::pitch(value);
  if (name == "DUR") return Token::duration(value);
  if (name == "VEL") return Token::velocity(value);
  throw GrammarError(0, "token", std::string(text));
}

bool in_range(const Token& token, int positions_per_bar) {
  switch (token.kind) {
    case TokenKind::Bar:
      return token.value == 0;
    case TokenKind::Position:
      return token.value >= 0 && token.value < positions_per_bar;
    case TokenKind::Pitch:
      return token.value >= kMinTokenPitch && token.value <= kMaxTokenPitch;
    case TokenKind::Duration:
      return token.value >= 1 && token.value <= 2 * positions_per_bar;
    case TokenKind::Velocity:
      return token.value >= 0 && token.value < kVelocityBins;
  }
  return false;
}

// ============================================================================
// GrammarState
// ============================================================================

bool GrammarState::accepts(const Token& token) const {
  if (!in_range(token, positions_per_bar_)) return false;
  switch (next_) {
    case Expect::Bar:
      return token.kind == TokenKind::Bar;
    case Expect::BarOrPosition:
      return token.kind == TokenKind::Bar ||
             (token.kind == TokenKind::Position && token.value >= last_position_);
    case Expect::Pitch:
      return token.kind == TokenKind::Pitch;
    case Expect::Duration:
      return token.kind == TokenKind::Duration;
    case Expect::Velocity:
      return token.kind == TokenKind::Velocity;
  }
  return false;
}

void GrammarState::push(const Token& token) {
  switch (token.kind) {
    case TokenKind::Bar:
      ++bars_;
      notes_in_bar_ = 0;
      last_position_ = 0;
      next_ = Expect::BarOrPosition;
      break;
    case TokenKind::Position:
      last_position_ = token.value;
      next_ = Expect::Pitch;
      break;
    case TokenKind::Pitch:
      next_ = Expect::Duration;
      break;
    case TokenKind::Duration:
      next_ = Expect::Velocity;
      break;
    case TokenKind::Velocity:
      ++notes_in_bar_;
      next_ = Expect::BarOrPosition;
      break;
  }
}

std::string GrammarState::expected() const {
  switch (next_) {
    case Expect::Bar:
      return "BAR";
    case Expect::BarOrPosition:
      return "BAR or POS >= " + std::to_string(last_position_);
    case Expect::Pitch:
      return "PITCH";
    case Expect::Duration:
      return "DUR";
    case Expect::Velocity:
      return "VEL";
  }
  return "?";
}

// ============================================================================
// Codec
// ============================================================================

int velocity_bin(int velocity) {
  int v = std::clamp(velocity, 1, 127);
  // floor((v - 1) / 15.75) in integers; v = 127 lands on 8 and folds into the top bin.
  return std::min(kVelocityBins - 1, 4 * (v - 1) / 63);
}

int velocity_from_bin(int bin) {
  int b = std::clamp(bin, 0, kVelocityBins - 1);
  // round(1 + 15.75 * (b + 0.5))
  return (8 + 63 * (2 * b + 1) + 4) / 8;
}

TokenSequence encode(const QuantizedScore& qs) {
  const int q = qs.positions_per_bar;
  TokenSequence ts;
  ts.positions_per_bar = q;
  ts.tokens.reserve(qs.bars.size() + 4 * qs.note_count());
  for (const auto& bar : qs.bars) {
    ts.tokens.push_back(Token::bar());
    QuantizedBar notes = bar;
    for (auto& n : notes) n.pitch = std::clamp(n.pitch, kMinTokenPitch, kMaxTokenPitch);
    std::sort(notes.begin(), notes.end());
    for (const auto& n : notes) {
      ts.tokens.push_back(Token::position(std::clamp(n.position, 0, q - 1)));
      ts.tokens.push_back(Token::pitch(n.pitch));
      ts.tokens.push_back(Token::duration(std::clamp(n.duration, 1, 2 * q)));
      ts.tokens.push_back(Token::velocity(velocity_bin(n.velocity)));
    }
  }
  if (ts.tokens.empty()) ts.tokens.push_back(Token::bar());
  return ts;
}

void validate(const TokenSequence& ts) {
  GrammarState state(ts.positions_per_bar);
  for (std::size_t i = 0; i < ts.tokens.size(); ++i) {
    if (!state.accepts(ts.tokens[i])) throw GrammarError(i, state.expected(), describe(ts, i));
    state.push(ts.tokens[i]);
  }
  if (ts.tokens.empty()) throw GrammarError(0, "BAR", describe(ts, 0));
  if (!state.at_note_boundary()) throw GrammarError(ts.tokens.size(), state.expected(), describe(ts, ts.tokens.size()));
}

QuantizedScore decode(const TokenSequence& ts) {
  validate(ts);
  QuantizedScore qs;
  qs.positions_per_bar = ts.positions_per_bar;
  QuantizedNote pending;
  for (const auto& t : ts.tokens) {
    switch (t.kind) {
      case TokenKind::Bar:
        qs.bars.emplace_back();
        break;
      case TokenKind::Position:
        pending.position = t.value;
        break;
      case TokenKind::Pitch:
        pending.pitch = t.value;
        break;
      case TokenKind::Duration:
        pending.duration = t.value;
        break;
      case TokenKind::Velocity:
        pending.velocity = velocity_from_bin(t.value);
        qs.bars.back().push_back(pending);
        break;
    }
  }
  for (auto& bar : qs.bars) std::sort(bar.begin(), bar.end());
  return qs;
}

std::size_t bar_count(const TokenSequence& ts) {
  return static_cast<std::size_t>(
      std::count_if(ts.tokens.begin(), ts.tokens.end(), [](const Token& t) { return t.kind == TokenKind::Bar; }));
}

TokenSequence slice_bars(const TokenSequence& ts, std::size_t from, std::size_t to) {
  const std::size_t n = bar_count(ts);
  if (from >= to || to > n) {
    throw RangeError("bar slice [" + std::to_string(from) + ", " + std::to_string(to) +
                     ") is invalid for a " + std::to_string(n) + "-bar sequence");
  }
  TokenSequence out;
  out.positions_per_bar = ts.positions_per_bar;
  std::size_t bar = 0;
  bool started = false;
  for (const auto& t : ts.tokens) {
    if (t.kind == TokenKind::Bar) {
      if (started) ++bar;
      started = true;
      if (bar == to) break;
    }
    if (started && bar >= from) out.tokens.push_back(t);
  }
  return out;
}

TokenSequence concat(const TokenSequence& head, const TokenSequence& tail) {
  if (head.positions_per_bar != tail.positions_per_bar) {
    throw RangeError("cannot concatenate sequences with different grid sizes");
  }
  TokenSequence out = head;
  out.tokens.insert(out.tokens.end(), tail.tokens.begin(), tail.tokens.end());
  return out;
}

std::string to_text(const TokenSequence& ts) {
  std::string out;
  for (const auto& t : ts.tokens) {
    out += to_string(t);
    out += '\n';
  }
  return out;
}

TokenSequence from_text(std::string_view text, int positions_per_bar) {
  TokenSequence ts;
  ts.positions_per_bar = positions_per_bar;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto eol = text.find('\n');
    std::string_view line = trim(text.substr(0, eol));
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    try {
      ts.tokens.push_back(token_from_string(line));
    } catch (const GrammarError& e) {
      throw GrammarError(ts.tokens.size(), e.expected() + " (line " + std::to_string(line_no) + ")", e.found());
    }
  }
  return ts;
}

}  // namespace scorex
