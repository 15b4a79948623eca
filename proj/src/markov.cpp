/**
 * @file markov.cpp
 * @brief Markov training, serialization and constrained sampling.
 */

#include "scorex/markov.h"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "json.hpp"

#include "scorex/errors.h"
#include "scorex/rng.h"

namespace scorex {

namespace {

constexpr const char* kFormatName = "scorex-markov";
constexpr int kFormatVersion = 1;

}  // namespace

const MarkovModel::Distribution* MarkovModel::lookup(std::span<const Token> context) const {
  if (context.size() >= tables_.size()) return nullptr;
  const Table& t = tables_[context.size()];
  auto it = t.find(Context(context.begin(), context.end()));
  return it == t.end() ? nullptr : &it->second;
}

std::vector<Token> MarkovModel::vocabulary() const {
  std::set<Token> vocab;
  for (const auto& table : tables_) {
    for (const auto& [ctx, dist] : table) {
      vocab.insert(ctx.begin(), ctx.end());
      for (const auto& [tok, count] : dist) vocab.insert(tok);
    }
  }
  return {vocab.begin(), vocab.end()};
}

MarkovModel train_markov(std::span<const TokenSequence> corpus, int order) {
  if (corpus.empty()) throw EmptyCorpus();
  if (order < 1) throw std::invalid_argument("Markov order must be >= 1");
  MarkovModel model;
  model.order_ = order;
  model.positions_per_bar_ = corpus.front().positions_per_bar;
  model.tables_.resize(static_cast<std::size_t>(order) + 1);
  for (const auto& seq : corpus) {
    if (seq.positions_per_bar != model.positions_per_bar_) {
      throw std::invalid_argument("corpus mixes grid sizes");
    }
    const auto& toks = seq.tokens;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      for (std::size_t m = 0; m <= static_cast<std::size_t>(order) && m <= i; ++m) {
        MarkovModel::Context ctx(toks.begin() + static_cast<std::ptrdiff_t>(i - m),
                                 toks.begin() + static_cast<std::ptrdiff_t>(i));
        ++model.tables_[m][ctx][toks[i]];
      }
    }
  }
  bool any = std::any_of(model.tables_[0].begin(), model.tables_[0].end(),
                         [](const auto& kv) { return !kv.second.empty(); });
  if (!any) throw EmptyCorpus();
  return model;
}

// ============================================================================
// Serialization
// ============================================================================

std::string save_markov(const MarkovModel& model) {
  std::vector<Token> vocab = model.vocabulary();
  auto id_of = [&](const Token& t) {
    return static_cast<std::size_t>(std::lower_bound(vocab.begin(), vocab.end(), t) - vocab.begin());
  };

  nlohmann::ordered_json j;
  j["format"] = kFormatName;
  j["version"] = kFormatVersion;
  j["order"] = model.order();
  j["positions_per_bar"] = model.positions_per_bar();
  j["vocabulary"] = nlohmann::json::array();
  for (const auto& t : vocab) j["vocabulary"].push_back(to_string(t));
  j["counts"] = nlohmann::json::array();
  for (int m = 0; m <= model.order(); ++m) {
    for (const auto& [ctx, dist] : model.table(m)) {
      nlohmann::ordered_json row;
      row["context"] = nlohmann::json::array();
      for (const auto& t : ctx) row["context"].push_back(id_of(t));
      row["next"] = nlohmann::json::array();
      for (const auto& [tok, count] : dist) row["next"].push_back({id_of(tok), count});
      j["counts"].push_back(std::move(row));
    }
  }
  return j.dump(1) + "\n";
}

MarkovModel load_markov(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("<root>", e.what());
  }
  auto require = [&](const char* key) -> const nlohmann::json& {
    if (!j.is_object() || !j.contains(key)) throw SchemaError(key, "missing");
    return j.at(key);
  };
  if (require("format") != kFormatName) throw SchemaError("format", "not a scorex Markov model");
  if (require("version") != kFormatVersion) throw SchemaError("version", "unsupported version");

  MarkovModel model;
  const auto& order = require("order");
  const auto& q = require("positions_per_bar");
  if (!order.is_number_integer() || order.get<int>() < 1) throw SchemaError("order", "must be an integer >= 1");
  if (!q.is_number_integer() || q.get<int>() < 1) throw SchemaError("positions_per_bar", "must be an integer >= 1");
  model.order_ = order.get<int>();
  model.positions_per_bar_ = q.get<int>();
  model.tables_.resize(static_cast<std::size_t>(model.order_) + 1);

  std::vector<Token> vocab;
  const auto& vocab_json = require("vocabulary");
  if (!vocab_json.is_array()) throw SchemaError("vocabulary", "must be an array");
  for (const auto& v : vocab_json) {
    if (!v.is_string()) throw SchemaError("vocabulary", "entries must be strings");
    try {
      vocab.push_back(token_from_string(v.get<std::string>()));
    } catch (const GrammarError&) {
      throw SchemaError("vocabulary", "bad token '" + v.get<std::string>() + "'");
    }
    if (!in_range(vocab.back(), model.positions_per_bar_)) {
      throw SchemaError("vocabulary", "token '" + v.get<std::string>() + "' is off the model grid");
    }
  }
  auto token_at = [&](const nlohmann::json& id, const char* key) {
    if (!id.is_number_unsigned() || id.get<std::size_t>() >= vocab.size()) {
      throw SchemaError(key, "token id out of range");
    }
    return vocab[id.get<std::size_t>()];
  };

  const auto& counts = require("counts");
  if (!counts.is_array()) throw SchemaError("counts", "must be an array");
  for (const auto& row : counts) {
    if (!row.is_object() || !row.contains("context") || !row.contains("next")) {
      throw SchemaError("counts", "rows need 'context' and 'next'");
    }
    MarkovModel::Context ctx;
    for (const auto& id : row["context"]) ctx.push_back(token_at(id, "counts.context"));
    if (ctx.size() > static_cast<std::size_t>(model.order_)) throw SchemaError("counts.context", "longer than order");
    auto& dist = model.tables_[ctx.size()][ctx];
    for (const auto& pair : row["next"]) {
      if (!pair.is_array() || pair.size() != 2 || !pair[1].is_number_unsigned() || pair[1].get<std::uint64_t>() == 0) {
        throw SchemaError("counts.next", "entries must be [token id, positive count]");
      }
      dist[token_at(pair[0], "counts.next")] += pair[1].get<std::uint64_t>();
    }
    if (dist.empty()) throw SchemaError("counts.next", "empty distribution");
  }
  return model;
}

// ============================================================================
// Sampling
// ============================================================================

MarkovInfiller::MarkovInfiller(std::shared_ptr<const MarkovModel> model) : model_(std::move(model)) {
  if (!model_) throw std::invalid_argument("MarkovInfiller needs a model");
}

TokenSequence MarkovInfiller::generate(const ExpansionRequest& request, std::uint64_t seed) const {
  validate_request(request);
  const int q = request.past.positions_per_bar;
  if (q != model_->positions_per_bar()) {
    throw InfillError("model grid size " + std::to_string(model_->positions_per_bar()) +
                      " does not match request grid size " + std::to_string(q));
  }
  const auto gap = static_cast<std::size_t>(request.gap_bars);

  Rng rng(seed);
  std::vector<Token> history = request.past.tokens;
  TokenSequence out;
  out.positions_per_bar = q;
  GrammarState state(q);
  std::vector<std::pair<Token, std::uint64_t>> legal;

  while (true) {
    Token next;
    if (state.bars() > 0 && state.at_note_boundary() && state.notes_in_bar() >= kMaxNotesPerGeneratedBar) {
      next = Token::bar();
    } else {
      bool found = false;
      const auto longest = std::min<std::size_t>(static_cast<std::size_t>(model_->order()), history.size());
      for (std::size_t len = longest + 1; len-- > 0 && !found;) {
        const auto* dist = model_->lookup(std::span<const Token>(history).last(len));
        if (!dist) continue;
        legal.clear();
        std::uint64_t common = 0;
        for (const auto& [tok, count] : *dist) {
          if (!state.accepts(tok)) continue;
          legal.emplace_back(tok, count);
          common = std::gcd(common, count);
        }
        if (common == 0) continue;
        // Reduce by the common divisor so a uniformly scaled table samples identically.
        std::uint64_t total = 0;
        for (auto& entry : legal) total += (entry.second /= common);
        std::uint64_t r = rng.below(total);
        for (const auto& [tok, count] : legal) {
          if (r < count) {
            next = tok;
            break;
          }
          r -= count;
        }
        found = true;
      }
      if (!found) {
        throw InfillError("no grammar-legal token after backing off to the unigram distribution (expected " +
                          state.expected() + ")");
      }
    }
    if (next.kind == TokenKind::Bar && state.bars() == gap) break;
    state.push(next);
    history.push_back(next);
    out.tokens.push_back(next);
  }
  return out;
}

}  // namespace scorex
