/**
 * @file markov.h
 * @brief Order-k token Markov model and a grammar-constrained infiller.
 *
 * The model keeps counts for every context length 0..k so that unseen
 * k-grams can back off to shorter contexts, down to the unigram table.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "scorex/expansion.h"
#include "scorex/tokenizer.h"

namespace scorex {

inline constexpr std::size_t kMaxNotesPerGeneratedBar = 64;

class MarkovModel {
 public:
  using Context = std::vector<Token>;
  using Distribution = std::map<Token, std::uint64_t>;  ///< Iterates in vocabulary order.
  using Table = std::map<Context, Distribution>;

  MarkovModel() = default;

  int order() const { return order_; }
  int positions_per_bar() const { return positions_per_bar_; }

  /// Counts for contexts of exactly `length` tokens (0 = unigram). length <= order.
  const Table& table(int length) const { return tables_.at(static_cast<std::size_t>(length)); }

  /// Next-token counts after `context`, or nullptr if never observed.
  const Distribution* lookup(std::span<const Token> context) const;

  /// Sorted list of every token seen in training.
  std::vector<Token> vocabulary() const;

  friend MarkovModel train_markov(std::span<const TokenSequence> corpus, int order);
  friend MarkovModel load_markov(const std::string& text);

  friend bool operator==(const MarkovModel&, const MarkovModel&) = default;

 private:
  int order_ = 0;
  int positions_per_bar_ = kDefaultPositionsPerBar;
  std::vector<Table> tables_;  // tables_[m]: contexts of length m.
};

/// Counts every (context -> next token) occurrence for context lengths 0..k
/// inside each sequence. Throws EmptyCorpus for an empty corpus and
/// std::invalid_argument for k < 1 or mixed grid sizes.
MarkovModel train_markov(std::span<const TokenSequence> corpus, int order);

/// Versioned JSON dump; see docs/markov_format.md.
std::string save_markov(const MarkovModel& model);

/// Throws SchemaError on malformed input.
MarkovModel load_markov(const std::string& text);

/// Autoregressive sampler seeded with the tail of C_past.
///
/// At each step the longest observed context (k, k-1, ..., 0) with at least
/// one grammar-legal successor is used; illegal tokens are masked and the
/// rest sampled by inverse CDF over vocabulary order.
class MarkovInfiller final : public Infiller {
 public:
  explicit MarkovInfiller(std::shared_ptr<const MarkovModel> model);

  std::string name() const override { return "markov"; }
  TokenSequence generate(const ExpansionRequest& request, std::uint64_t seed) const override;

 private:
  std::shared_ptr<const MarkovModel> model_;
};

}  // namespace scorex
