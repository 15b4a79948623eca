/**
 * @file metrics.h
 * @brief Rhythm and register similarity between token segments.
 *
 * Grooving pattern similarity (GS) compares per-bar binary onset vectors:
 *   GS(a, b) = 1 - (1/Q) * sum_i XOR(a_i, b_i)
 * and a segment pair is scored by the mean over all cross pairs of bars.
 *
 * Register histogram similarity (RHS) is the negative cross entropy of two
 * 7-bin octave histograms (C1..B1 through C7..B7):
 *   RHS(h1, h2) = sum_i h1_i * log2(h2_i)   (<= 0)
 * It is not symmetric in its arguments.
 */

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "scorex/midi_io.h"
#include "scorex/tokenizer.h"

namespace scorex {

inline constexpr int kRegisterBins = 7;
inline constexpr int kRegisterLowestPitch = 24;  // C1
inline constexpr double kHistogramEpsilon = 1e-6;

struct GroovingVector {
  std::vector<std::uint8_t> bits;  ///< One entry per grid position, each 0 or 1.

  std::size_t size() const { return bits.size(); }
  friend bool operator==(const GroovingVector&, const GroovingVector&) = default;
};

struct RegisterHistogram {
  std::array<double, kRegisterBins> bins{};

  static RegisterHistogram uniform();
  friend bool operator==(const RegisterHistogram&, const RegisterHistogram&) = default;
};

struct BoundaryAnalysis {
  double gs1 = 0.0;   ///< GS(C_past, C_new)
  double gs2 = 0.0;   ///< GS(C_new, C_future)
  double rhs1 = 0.0;  ///< RHS(h(C_past), h(C_new))
  double rhs2 = 0.0;  ///< RHS(h(C_new), h(C_future))
  double delta_gs = 0.0;   ///< gs2 - gs1; positive means C_new is rhythmically closer to C_future.
  double delta_rhs = 0.0;  ///< rhs2 - rhs1
};

GroovingVector grooving_vector(const QuantizedBar& bar, int positions_per_bar);

/// Throws LengthMismatch for vectors of different length.
double gs_pair(const GroovingVector& a, const GroovingVector& b);

/// Mean gs_pair over every (bar of a, bar of b). Empty bars are zero vectors.
double gs_segments(const TokenSequence& a, const TokenSequence& b);

/// Octave bin of a pitch; pitches outside C1..B7 go to the edge bins.
int register_bin(int pitch);

/// Normalizes non-negative weights and applies epsilon smoothing.
/// All-zero weights give the uniform histogram.
RegisterHistogram smoothed_histogram(const std::array<double, kRegisterBins>& weights);

RegisterHistogram register_histogram(const TokenSequence& segment);

/// Throws DomainError when a bin of h2 is not strictly positive.
double rhs(const RegisterHistogram& h1, const RegisterHistogram& h2);

BoundaryAnalysis boundary_analysis(const TokenSequence& past, const TokenSequence& fill, const TokenSequence& future);

}  // namespace scorex
