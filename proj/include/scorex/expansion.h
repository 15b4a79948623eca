/**
 * @file expansion.h
 * @brief Splitting a piece at a boundary bar and filling an artificial gap.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>

#include "scorex/tokenizer.h"

namespace scorex {

struct ExpansionRequest {
  TokenSequence past;    ///< C_past
  TokenSequence future;  ///< C_future
  int gap_bars = 4;      ///< Context gap; must be >= 1.
};

/// Throws RangeError if the request breaks its invariants.
void validate_request(const ExpansionRequest& request);

/// Produces C_new for a request.
///
/// Implementations must return a grammar-valid sequence with exactly
/// request.gap_bars bars, be deterministic in (request, seed) and be safe to
/// call concurrently.
class Infiller {
 public:
  virtual ~Infiller() = default;
  virtual std::string name() const = 0;
  virtual TokenSequence generate(const ExpansionRequest& request, std::uint64_t seed) const = 0;
};

/// Repeats the last gap_bars bars of the past context (cyclically if short).
class CopyPastInfiller final : public Infiller {
 public:
  std::string name() const override { return "copy-past"; }
  TokenSequence generate(const ExpansionRequest& request, std::uint64_t seed) const override;
};

/// Repeats the first gap_bars bars of the future context (cyclically if short).
class CopyFutureInfiller final : public Infiller {
 public:
  std::string name() const override { return "copy-future"; }
  TokenSequence generate(const ExpansionRequest& request, std::uint64_t seed) const override;
};

/// Uniform random notes: 0..8 per bar at sorted random positions, pitches
/// drawn from the pitch span of both contexts, durations 1..Q.
class RandomInfiller final : public Infiller {
 public:
  std::string name() const override { return "random"; }
  TokenSequence generate(const ExpansionRequest& request, std::uint64_t seed) const override;
};

/// Returns (bars [0, p), bars [p, N)). Throws RangeError unless 1 <= p < N.
std::pair<TokenSequence, TokenSequence> split_at_boundary(const TokenSequence& ts, std::size_t p);

/// past ++ C_new ++ future, where C_new comes from `infiller`.
///
/// Inputs are never modified. Infiller output is checked against the gap
/// contract; a violation raises InfillError.
TokenSequence expand(const TokenSequence& ts, std::size_t p, int gap_bars, const Infiller& infiller,
                     std::uint64_t seed);

}  // namespace scorex
