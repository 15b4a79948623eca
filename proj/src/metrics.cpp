/**
 * @file metrics.cpp
 * @brief GS, RHS and the boundary subtraction analysis.
 */

#include "scorex/metrics.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "scorex/errors.h"

namespace scorex {

namespace {

std::vector<GroovingVector> grooving_vectors(const TokenSequence& segment) {
  QuantizedScore qs = decode(segment);
  std::vector<GroovingVector> out;
  out.reserve(qs.bars.size());
  for (const auto& bar : qs.bars) out.push_back(grooving_vector(bar, qs.positions_per_bar));
  return out;
}

}  // namespace

RegisterHistogram RegisterHistogram::uniform() {
  RegisterHistogram h;
  h.bins.fill(1.0 / kRegisterBins);
  return h;
}

GroovingVector grooving_vector(const QuantizedBar& bar, int positions_per_bar) {
  GroovingVector g;
  g.bits.assign(static_cast<std::size_t>(positions_per_bar), 0);
  for (const auto& n : bar) {
    if (n.position < 0 || n.position >= positions_per_bar) {
      throw RangeError("onset position " + std::to_string(n.position) + " outside [0, " +
                       std::to_string(positions_per_bar) + ")");
    }
    g.bits[static_cast<std::size_t>(n.position)] = 1;
  }
  return g;
}

double gs_pair(const GroovingVector& a, const GroovingVector& b) {
  if (a.size() != b.size()) {
    throw LengthMismatch("grooving vectors of length " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  }
  if (a.size() == 0) throw LengthMismatch("grooving vectors must not be empty");
  std::size_t differing = 0;
  for (std::size_t i = 0; i < a.size(); ++i) differing += (a.bits[i] != b.bits[i]) ? 1 : 0;
  return 1.0 - static_cast<double>(differing) / static_cast<double>(a.size());
}

double gs_segments(const TokenSequence& a, const TokenSequence& b) {
  auto ga = grooving_vectors(a);
  auto gb = grooving_vectors(b);
  double sum = 0.0;
  for (const auto& x : ga) {
    for (const auto& y : gb) sum += gs_pair(x, y);
  }
  return sum / static_cast<double>(ga.size() * gb.size());
}

int register_bin(int pitch) {
  if (pitch < kRegisterLowestPitch) return 0;
  return std::min(kRegisterBins - 1, (pitch - kRegisterLowestPitch) / 12);
}

RegisterHistogram smoothed_histogram(const std::array<double, kRegisterBins>& weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DomainError("histogram weights must be non-negative");
    total += w;
  }
  if (total == 0.0) return RegisterHistogram::uniform();

  RegisterHistogram h;
  double smoothed_total = 0.0;
  for (int i = 0; i < kRegisterBins; ++i) {
    h.bins[i] = weights[i] / total + kHistogramEpsilon;
    smoothed_total += h.bins[i];
  }
  for (double& b : h.bins) b /= smoothed_total;
  return h;
}

RegisterHistogram register_histogram(const TokenSequence& segment) {
  std::array<double, kRegisterBins> counts{};
  for (const auto& t : segment.tokens) {
    if (t.kind == TokenKind::Pitch) counts[static_cast<std::size_t>(register_bin(t.value))] += 1.0;
  }
  return smoothed_histogram(counts);
}

double rhs(const RegisterHistogram& h1, const RegisterHistogram& h2) {
  double sum = 0.0;
  for (int i = 0; i < kRegisterBins; ++i) {
    if (!(h2.bins[i] > 0.0)) {
      throw DomainError("register histogram bin " + std::to_string(i) + " must be positive for log2");
    }
    sum += h1.bins[i] * std::log2(h2.bins[i]);
  }
  return sum;
}

BoundaryAnalysis boundary_analysis(const TokenSequence& past, const TokenSequence& fill, const TokenSequence& future) {
  for (const auto* seg : {&past, &fill, &future}) {
    if (bar_count(*seg) < 1) throw RangeError("boundary analysis needs at least one bar per segment");
  }
  const RegisterHistogram h_past = register_histogram(past);
  const RegisterHistogram h_new = register_histogram(fill);
  const RegisterHistogram h_future = register_histogram(future);

  BoundaryAnalysis r;
  r.gs1 = gs_segments(past, fill);
  r.gs2 = gs_segments(fill, future);
  r.rhs1 = rhs(h_past, h_new);
  r.rhs2 = rhs(h_new, h_future);
  r.delta_gs = r.gs2 - r.gs1;
  r.delta_rhs = r.rhs2 - r.rhs1;
  return r;
}

}  // namespace scorex
