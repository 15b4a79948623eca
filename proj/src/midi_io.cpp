/**
 * @file midi_io.cpp
 * @brief SMF parser/writer and bar grid quantization.
 */

#include "scorex/midi_io.h"

#include <algorithm>
#include <array>
#include <deque>
#include <fstream>
#include <iterator>
#include <map>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "scorex/errors.h"

namespace scorex {

namespace {

constexpr int kPercussionChannel = 9;
constexpr int kMaxChannels = 16;

// ============================================================================
// Byte reader
// ============================================================================

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::size_t base = 0) : bytes_(bytes), base_(base) {}

  bool done() const { return pos_ >= bytes_.size(); }
  std::size_t offset() const { return base_ + pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }

  std::uint8_t peek() {
    need(1);
    return bytes_[pos_];
  }

  std::uint32_t be(int width) {
    need(static_cast<std::size_t>(width));
    std::uint32_t v = 0;
    for (int i = 0; i < width; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }

  std::uint32_t vlq() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      std::uint8_t b = u8();
      v = (v << 7) | (b & 0x7F);
      if ((b & 0x80) == 0) return v;
    }
    throw ParseError(offset(), "variable-length quantity longer than 4 bytes");
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw ParseError(offset(), "unexpected end of data");
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

struct OpenNote {
  std::int64_t onset;
  int velocity;
};

void parse_track(ByteReader& in, std::vector<NoteEvent>& out, std::vector<std::string>* warnings,
                 int track_index) {
  std::map<std::pair<int, int>, std::deque<OpenNote>> open;
  std::int64_t tick = 0;
  int running = 0;

  auto close_note = [&](int channel, int pitch) {
    auto it = open.find({channel, pitch});
    if (it == open.end() || it->second.empty()) return;
    OpenNote n = it->second.front();
    it->second.pop_front();
    out.push_back({pitch, n.onset, std::max<std::int64_t>(1, tick - n.onset), n.velocity});
  };

  bool ended = false;
  while (!in.done() && !ended) {
    tick += in.vlq();
    std::size_t status_offset = in.offset();
    int status = in.peek();
    if (status & 0x80) {
      in.u8();
    } else {
      if (running == 0) throw ParseError(status_offset, "data byte without running status");
      status = running;
    }

    if (status == 0xFF) {
      int type = in.u8();
      std::uint32_t len = in.vlq();
      auto data = in.take(len);
      if (type == 0x2F) {
        ended = true;
      } else if (type == 0x58) {
        if (len < 2) throw ParseError(status_offset, "short time signature event");
        if (data[0] != 4 || data[1] != 2) {
          throw MeterError("unsupported time signature " + std::to_string(data[0]) + "/" +
                           std::to_string(1 << data[1]) + " (only 4/4 is supported)");
        }
      }
      continue;
    }
    if (status == 0xF0 || status == 0xF7) {
      in.take(in.vlq());
      running = 0;
      continue;
    }
    if (status >= 0xF0) throw ParseError(status_offset, "unexpected system message in track");

    running = status;
    int kind = status & 0xF0;
    int channel = status & 0x0F;
    int data1 = in.u8();
    int data2 = (kind == 0xC0 || kind == 0xD0) ? 0 : in.u8();
    if ((data1 | data2) & 0x80) throw ParseError(status_offset, "data byte with high bit set");
    if (channel == kPercussionChannel) continue;

    if (kind == 0x90 && data2 > 0) {
      open[{channel, data1}].push_back({tick, data2});
    } else if (kind == 0x80 || kind == 0x90) {
      close_note(channel, data1);
    }
  }

  for (auto& [key, queue] : open) {
    while (!queue.empty()) {
      if (warnings) {
        warnings->push_back("track " + std::to_string(track_index) + ": note " +
                            std::to_string(key.second) + " at tick " +
                            std::to_string(queue.front().onset) +
                            " has no note-off; closed at end of track");
      }
      close_note(key.first, key.second);
    }
  }
}

// ============================================================================
// Writer helpers
// ============================================================================

void put_be(std::vector<std::uint8_t>& out, std::uint32_t v, int width) {
  for (int i = width - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_vlq(std::vector<std::uint8_t>& out, std::uint32_t v) {
  std::array<std::uint8_t, 5> buf{};
  int n = 0;
  buf[n++] = v & 0x7F;
  while ((v >>= 7) != 0) buf[n++] = static_cast<std::uint8_t>(0x80 | (v & 0x7F));
  while (n > 0) out.push_back(buf[--n]);
}

struct WireEvent {
  std::int64_t tick;
  int order;  // 0 = note-off, 1 = note-on; offs first at equal ticks.
  std::size_t seq;
  std::uint8_t status;
  std::uint8_t data1;
  std::uint8_t data2;
};

// floor(num / den) for den > 0.
std::int64_t floor_div(std::int64_t num, std::int64_t den) {
  std::int64_t q = num / den;
  if ((num % den != 0) && (num < 0)) --q;
  return q;
}

}  // namespace

std::size_t QuantizedScore::note_count() const {
  std::size_t n = 0;
  for (const auto& bar : bars) n += bar.size();
  return n;
}

void validate_note(const NoteEvent& note) {
  if (note.pitch < 0 || note.pitch > 127) throw std::invalid_argument("pitch out of range 0..127");
  if (note.onset < 0) throw std::invalid_argument("negative onset");
  if (note.duration < 1) throw std::invalid_argument("duration must be at least 1 tick");
  if (note.velocity < 1 || note.velocity > 127) throw std::invalid_argument("velocity out of range 1..127");
}

Score parse_midi(std::span<const std::uint8_t> bytes, std::vector<std::string>* warnings) {
  ByteReader in(bytes);
  if (in.remaining() < 14) throw ParseError(0, "file too short for an MThd chunk");
  auto magic = in.take(4);
  if (!std::equal(magic.begin(), magic.end(), "MThd")) throw ParseError(0, "missing MThd signature");
  std::uint32_t header_len = in.be(4);
  if (header_len < 6) throw ParseError(4, "MThd length below 6");
  std::size_t header_start = in.offset();
  int format = static_cast<int>(in.be(2));
  int ntracks = static_cast<int>(in.be(2));
  std::uint32_t division = in.be(2);
  if (format > 1) throw ParseError(header_start, "unsupported SMF format " + std::to_string(format));
  if (division & 0x8000) throw ParseError(header_start + 4, "SMPTE time division is not supported");
  if (division == 0) throw ParseError(header_start + 4, "ticks per quarter must be positive");
  if (format == 0 && ntracks != 1) throw ParseError(header_start + 2, "format 0 requires exactly one track");
  in.take(header_len - 6);

  Score score;
  score.ticks_per_quarter = static_cast<int>(division);

  int tracks_seen = 0;
  while (!in.done() && tracks_seen < ntracks) {
    std::size_t chunk_start = in.offset();
    auto id = in.take(4);
    std::uint32_t len = in.be(4);
    if (in.remaining() < len) throw ParseError(chunk_start, "chunk length exceeds file size");
    std::size_t body_start = in.offset();
    auto body = in.take(len);
    if (!std::equal(id.begin(), id.end(), "MTrk")) continue;
    ByteReader track(body, body_start);
    parse_track(track, score.notes, warnings, tracks_seen);
    ++tracks_seen;
  }
  if (tracks_seen < ntracks) {
    throw ParseError(in.offset(), "expected " + std::to_string(ntracks) + " tracks, found " +
                                      std::to_string(tracks_seen));
  }

  std::sort(score.notes.begin(), score.notes.end());
  return score;
}

std::vector<std::uint8_t> write_midi(const Score& score) {
  if (score.ticks_per_quarter < 1 || score.ticks_per_quarter > 0x7FFF) {
    throw std::invalid_argument("ticks_per_quarter must be in 1..32767");
  }
  std::vector<NoteEvent> notes = score.notes;
  std::sort(notes.begin(), notes.end());

  // busy[channel][pitch] holds the tick at which that slot becomes free.
  std::vector<std::array<std::int64_t, 128>> busy(kMaxChannels);
  for (auto& row : busy) row.fill(0);

  std::vector<WireEvent> events;
  events.reserve(notes.size() * 2);
  std::size_t seq = 0;
  for (const auto& note : notes) {
    validate_note(note);
    int channel = -1;
    for (int c = 0; c < kMaxChannels; ++c) {
      if (c == kPercussionChannel) continue;
      if (busy[c][note.pitch] <= note.onset) {
        channel = c;
        break;
      }
    }
    if (channel < 0) {
      throw std::invalid_argument("more than 15 overlapping notes of pitch " + std::to_string(note.pitch));
    }
    std::int64_t end = note.onset + note.duration;
    busy[channel][note.pitch] = end;
    auto ch = static_cast<std::uint8_t>(channel);
    auto pitch = static_cast<std::uint8_t>(note.pitch);
    events.push_back({note.onset, 1, seq++, static_cast<std::uint8_t>(0x90 | ch), pitch,
                      static_cast<std::uint8_t>(note.velocity)});
    events.push_back({end, 0, seq++, static_cast<std::uint8_t>(0x80 | ch), pitch, 64});
  }
  std::sort(events.begin(), events.end(), [](const WireEvent& a, const WireEvent& b) {
    return std::tie(a.tick, a.order, a.seq) < std::tie(b.tick, b.order, b.seq);
  });

  std::vector<std::uint8_t> track;
  // Tempo 500000 us per quarter (120 BPM).
  track.insert(track.end(), {0x00, 0xFF, 0x51, 0x03, 0x07, 0xA1, 0x20});
  // Time signature 4/4, 24 clocks per click, 8 32nds per quarter.
  track.insert(track.end(), {0x00, 0xFF, 0x58, 0x04, 0x04, 0x02, 0x18, 0x08});
  std::int64_t last = 0;
  for (const auto& e : events) {
    std::int64_t delta = e.tick - last;
    if (delta > 0x0FFFFFFF) throw std::invalid_argument("delta time exceeds SMF range");
    put_vlq(track, static_cast<std::uint32_t>(delta));
    track.insert(track.end(), {e.status, e.data1, e.data2});
    last = e.tick;
  }
  track.insert(track.end(), {0x00, 0xFF, 0x2F, 0x00});

  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'M', 'T', 'h', 'd'});
  put_be(out, 6, 4);
  put_be(out, 0, 2);
  put_be(out, 1, 2);
  put_be(out, static_cast<std::uint32_t>(score.ticks_per_quarter), 2);
  out.insert(out.end(), {'M', 'T', 'r', 'k'});
  put_be(out, static_cast<std::uint32_t>(track.size()), 4);
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

QuantizedScore quantize(const Score& score, int positions_per_bar) {
  if (positions_per_bar < 1) throw std::invalid_argument("positions_per_bar must be >= 1");
  if (score.ticks_per_quarter < 1) throw std::invalid_argument("ticks_per_quarter must be >= 1");
  const std::int64_t q = positions_per_bar;
  const std::int64_t bar_ticks = 4LL * score.ticks_per_quarter;

  // Nearest grid index of `ticks`, ties rounding up: floor(ticks*Q/bar_ticks + 1/2).
  auto snap = [&](std::int64_t ticks) { return floor_div(2 * ticks * q + bar_ticks, 2 * bar_ticks); };

  QuantizedScore qs;
  qs.positions_per_bar = positions_per_bar;
  qs.bars.resize(1);
  for (const auto& note : score.notes) {
    std::int64_t grid = snap(note.onset);
    auto bar = static_cast<std::size_t>(grid / q);
    int pos = static_cast<int>(grid % q);
    int dur = static_cast<int>(std::clamp<std::int64_t>(snap(note.duration), 1, 2 * q));
    if (qs.bars.size() <= bar) qs.bars.resize(bar + 1);
    qs.bars[bar].push_back({pos, note.pitch, dur, note.velocity});
  }
  for (auto& bar : qs.bars) std::sort(bar.begin(), bar.end());
  return qs;
}

Score dequantize(const QuantizedScore& qs, int ticks_per_quarter) {
  if (ticks_per_quarter < 1) throw std::invalid_argument("ticks_per_quarter must be >= 1");
  const std::int64_t q = qs.positions_per_bar;
  const std::int64_t bar_ticks = 4LL * ticks_per_quarter;
  auto to_ticks = [&](std::int64_t grid) { return floor_div(2 * grid * bar_ticks + q, 2 * q); };

  Score score;
  score.ticks_per_quarter = ticks_per_quarter;
  for (std::size_t b = 0; b < qs.bars.size(); ++b) {
    for (const auto& n : qs.bars[b]) {
      std::int64_t grid = static_cast<std::int64_t>(b) * q + n.position;
      score.notes.push_back({n.pitch, to_ticks(grid), std::max<std::int64_t>(1, to_ticks(n.duration)),
                             n.velocity});
    }
  }
  std::sort(score.notes.begin(), score.notes.end());
  return score;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path);
}

}  // namespace scorex
