/**
 * @file expansion.cpp
 * @brief Boundary split, gap expansion and baseline infillers.
 */

#include "scorex/expansion.h"

#include <algorithm>
#include <vector>

#include "scorex/errors.h"
#include "scorex/rng.h"

namespace scorex {

namespace {

// Bars taken from `source` starting at bar `start`, wrapping cyclically.
TokenSequence cyclic_bars(const TokenSequence& source, std::size_t start, int count) {
  const std::size_t n = bar_count(source);
  TokenSequence out;
  out.positions_per_bar = source.positions_per_bar;
  for (int i = 0; i < count; ++i) {
    std::size_t b = (start + static_cast<std::size_t>(i)) % n;
    out = concat(out, slice_bars(source, b, b + 1));
  }
  return out;
}

}  // namespace

void validate_request(const ExpansionRequest& request) {
  if (request.gap_bars < 1) throw RangeError("gap_bars must be a positive integer");
  if (bar_count(request.past) < 1) throw RangeError("past context has no bars");
  if (bar_count(request.future) < 1) throw RangeError("future context has no bars");
  if (request.past.positions_per_bar != request.future.positions_per_bar) {
    throw RangeError("past and future use different grid sizes");
  }
}

TokenSequence CopyPastInfiller::generate(const ExpansionRequest& request, std::uint64_t /*seed*/) const {
  validate_request(request);
  const std::size_t n = bar_count(request.past);
  const auto gap = static_cast<std::size_t>(request.gap_bars);
  // Last gap bars in order; with n < gap the cycle starts at (n - gap) mod n.
  std::size_t start = (n >= gap) ? n - gap : (n - gap % n) % n;
  return cyclic_bars(request.past, start, request.gap_bars);
}

TokenSequence CopyFutureInfiller::generate(const ExpansionRequest& request, std::uint64_t /*seed*/) const {
  validate_request(request);
  return cyclic_bars(request.future, 0, request.gap_bars);
}

TokenSequence RandomInfiller::generate(const ExpansionRequest& request, std::uint64_t seed) const {
  validate_request(request);
  const int q = request.past.positions_per_bar;
  int lo = kMaxTokenPitch;
  int hi = kMinTokenPitch;
  for (const auto* ctx : {&request.past, &request.future}) {
    for (const auto& t : ctx->tokens) {
      if (t.kind != TokenKind::Pitch) continue;
      lo = std::min(lo, t.value);
      hi = std::max(hi, t.value);
    }
  }
  if (lo > hi) {
    lo = 48;
    hi = 84;
  }

  Rng rng(seed);
  TokenSequence out;
  out.positions_per_bar = q;
  for (int b = 0; b < request.gap_bars; ++b) {
    out.tokens.push_back(Token::bar());
    int notes = rng.between(0, 8);
    std::vector<int> positions(static_cast<std::size_t>(notes));
    for (auto& p : positions) p = rng.between(0, q - 1);
    std::sort(positions.begin(), positions.end());
    for (int p : positions) {
      out.tokens.push_back(Token::position(p));
      out.tokens.push_back(Token::pitch(rng.between(lo, hi)));
      out.tokens.push_back(Token::duration(rng.between(1, q)));
      out.tokens.push_back(Token::velocity(rng.between(0, kVelocityBins - 1)));
    }
  }
  return out;
}

std::pair<TokenSequence, TokenSequence> split_at_boundary(const TokenSequence& ts, std::size_t p) {
  const std::size_t n = bar_count(ts);
  if (p < 1 || p >= n) {
    throw RangeError("boundary bar " + std::to_string(p) + " must satisfy 1 <= p < " + std::to_string(n));
  }
  return {slice_bars(ts, 0, p), slice_bars(ts, p, n)};
}

TokenSequence expand(const TokenSequence& ts, std::size_t p, int gap_bars, const Infiller& infiller,
                     std::uint64_t seed) {
  auto [past, future] = split_at_boundary(ts, p);
  ExpansionRequest request{std::move(past), std::move(future), gap_bars};
  validate_request(request);

  TokenSequence fill = infiller.generate(request, seed);
  try {
    validate(fill);
  } catch (const GrammarError& e) {
    throw InfillError(infiller.name() + " produced an invalid sequence: " + e.what());
  }
  if (fill.positions_per_bar != ts.positions_per_bar) {
    throw InfillError(infiller.name() + " produced a sequence on a different grid");
  }
  if (bar_count(fill) != static_cast<std::size_t>(gap_bars)) {
    throw InfillError(infiller.name() + " produced " + std::to_string(bar_count(fill)) + " bars, expected " +
                      std::to_string(gap_bars));
  }
  return concat(concat(request.past, fill), request.future);
}

}  // namespace scorex
