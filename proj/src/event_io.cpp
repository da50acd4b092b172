#include "evtrack/event_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <string>

#include "evtrack/error.hpp"
#include "evtrack/text.hpp"

namespace evtrack {
namespace {

constexpr std::array<char, 4> kMagic = {'E', 'V', 'S', '0'};
constexpr std::size_t kChunkRecords = 1 << 16;

template <typename T>
T load_le(const unsigned char* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
  return v;
}

template <typename T>
void store_le(unsigned char* p, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) p[i] = static_cast<unsigned char>(v >> (8 * i));
}

EventStream read_binary(std::istream& in, std::optional<SensorGeometry> geometry_override) {
  std::array<unsigned char, kEvsHeaderSize> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  if (static_cast<std::size_t>(in.gcount()) != header.size()) {
    throw Error(Errc::malformed_header, "file shorter than the 16-byte EVS0 header");
  }
  if (std::memcmp(header.data(), kMagic.data(), kMagic.size()) != 0) {
    throw Error(Errc::malformed_header, "bad magic, expected \"EVS0\"");
  }
  SensorGeometry geometry{load_le<std::uint16_t>(&header[4]), load_le<std::uint16_t>(&header[6])};
  if (load_le<std::uint32_t>(&header[8]) != 0) {
    throw Error(Errc::malformed_header, "reserved header field is not zero");
  }
  const std::uint32_t count = load_le<std::uint32_t>(&header[12]);
  if (geometry.width == 0 || geometry.height == 0) {
    throw Error(Errc::malformed_header, "zero sensor dimension");
  }
  if (geometry_override) geometry = *geometry_override;

  std::vector<Event> events;
  events.reserve(std::min<std::size_t>(count, kChunkRecords));
  std::vector<unsigned char> buf(kChunkRecords * kEvsRecordSize);
  std::size_t remaining = count;
  while (remaining > 0) {
    const std::size_t n = std::min(remaining, kChunkRecords);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * kEvsRecordSize));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got != n * kEvsRecordSize) {
      throw Error(Errc::truncated_record, "expected " + std::to_string(count) + " records, input ends inside record " +
                                              std::to_string(count - remaining + got / kEvsRecordSize));
    }
    for (std::size_t i = 0; i < n; ++i) {
      const unsigned char* r = buf.data() + i * kEvsRecordSize;
      if (r[13] != 0 || r[14] != 0 || r[15] != 0) {
        throw Error(Errc::malformed_record, "nonzero reserved bytes in record " +
                                                std::to_string(events.size()));
      }
      events.push_back(Event{load_le<std::uint64_t>(r), load_le<std::uint16_t>(r + 8),
                             load_le<std::uint16_t>(r + 10), r[12]});
    }
    remaining -= n;
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw Error(Errc::malformed_header, "trailing bytes after the declared record count");
  }
  return EventStream(geometry, std::move(events));
}

EventStream read_csv(std::istream& in, std::optional<SensorGeometry> geometry_override) {
  if (!geometry_override) {
    throw Error(Errc::malformed_header, "CSV event input requires an explicit sensor geometry");
  }
  std::string line;
  if (!text::read_line(in, line) || line != kEventCsvHeader) {
    throw Error(Errc::malformed_header, "expected CSV header \"t_us,x,y,p\"");
  }
  std::vector<Event> events;
  std::size_t line_no = 1;
  while (text::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = text::split(line);
    std::uint64_t t = 0, x = 0, y = 0, p = 0;
    if (f.size() != 4 || !text::parse_u64(f[0], t) || !text::parse_u64(f[1], x) ||
        !text::parse_u64(f[2], y) || !text::parse_u64(f[3], p)) {
      throw Error(Errc::malformed_record, "line " + std::to_string(line_no) + ": \"" + line + "\"");
    }
    if (x > 0xFFFF || y > 0xFFFF) {
      throw Error(Errc::out_of_bounds_event, "line " + std::to_string(line_no));
    }
    if (p > 1) {
      throw Error(Errc::malformed_record, "line " + std::to_string(line_no) + ": polarity must be 0 or 1");
    }
    events.push_back(Event{t, static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y),
                           static_cast<std::uint8_t>(p)});
  }
  return EventStream(*geometry_override, std::move(events));
}

void write_binary(const EventStream& stream, std::ostream& out) {
  if (stream.size() > 0xFFFFFFFFull) {
    throw Error(Errc::io_failure, "EVS0 holds at most 2^32-1 records");
  }
  std::array<unsigned char, kEvsHeaderSize> header{};
  std::memcpy(header.data(), kMagic.data(), kMagic.size());
  store_le<std::uint16_t>(&header[4], static_cast<std::uint16_t>(stream.geometry().width));
  store_le<std::uint16_t>(&header[6], static_cast<std::uint16_t>(stream.geometry().height));
  store_le<std::uint32_t>(&header[8], 0);
  store_le<std::uint32_t>(&header[12], static_cast<std::uint32_t>(stream.size()));
  out.write(reinterpret_cast<const char*>(header.data()), header.size());

  std::vector<unsigned char> buf;
  buf.reserve(kChunkRecords * kEvsRecordSize);
  auto events = stream.events();
  for (std::size_t i = 0; i < events.size(); ++i) {
    unsigned char r[kEvsRecordSize] = {};
    store_le<std::uint64_t>(r, events[i].t);
    store_le<std::uint16_t>(r + 8, events[i].x);
    store_le<std::uint16_t>(r + 10, events[i].y);
    r[12] = events[i].p;
    buf.insert(buf.end(), r, r + kEvsRecordSize);
    if (buf.size() == kChunkRecords * kEvsRecordSize) {
      out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(Errc::io_failure, "write failed");
}

void write_csv(const EventStream& stream, std::ostream& out) {
  std::string buf;
  buf.append(kEventCsvHeader).push_back('\n');
  for (const Event& e : stream.events()) {
    buf += std::to_string(e.t);
    buf += ',';
    buf += std::to_string(e.x);
    buf += ',';
    buf += std::to_string(e.y);
    buf += ',';
    buf += static_cast<char>('0' + e.p);
    buf += '\n';
    if (buf.size() > (1 << 20)) {
      out << buf;
      buf.clear();
    }
  }
  out << buf;
  if (!out) throw Error(Errc::io_failure, "write failed");
}

TrackState parse_state(std::string_view s, std::size_t line_no) {
  if (s == "tracking") return TrackState::tracking;
  if (s == "locked") return TrackState::locked;
  throw Error(Errc::malformed_row, "line " + std::to_string(line_no) + ": state must be tracking or locked");
}

}  // namespace

EventFormat format_from_path(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? EventFormat::csv : EventFormat::binary;
}

EventStream read_events(std::istream& in, EventFormat format,
                        std::optional<SensorGeometry> geometry_override) {
  return format == EventFormat::binary ? read_binary(in, geometry_override)
                                       : read_csv(in, geometry_override);
}

EventStream read_events_file(const std::filesystem::path& path, EventFormat format,
                             std::optional<SensorGeometry> geometry_override) {
  auto in = text::open_in(path);
  return read_events(in, format, geometry_override);
}

void write_events(const EventStream& stream, std::ostream& out, EventFormat format) {
  if (format == EventFormat::binary) {
    write_binary(stream, out);
  } else {
    write_csv(stream, out);
  }
}

void write_events_file(const EventStream& stream, const std::filesystem::path& path,
                       EventFormat format) {
  auto out = text::open_out(path);
  write_events(stream, out, format);
}

std::vector<TrackSnapshot> read_tracks(std::istream& in) {
  std::string line;
  if (!text::read_line(in, line) || line != kTrackCsvHeader) {
    throw Error(Errc::malformed_row, "expected track CSV header \"" + std::string(kTrackCsvHeader) + "\"");
  }
  std::vector<TrackSnapshot> tracks;
  std::size_t line_no = 1;
  while (text::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = text::split(line);
    TrackSnapshot s;
    if (f.size() != 9 || !text::parse_i64(f[0], s.id) || !text::parse_u64(f[1], s.t) ||
        !text::parse_double(f[2], s.box.x) || !text::parse_double(f[3], s.box.y) ||
        !text::parse_double(f[4], s.box.w) || !text::parse_double(f[5], s.box.h) ||
        !text::parse_double(f[7], s.vx) || !text::parse_double(f[8], s.vy)) {
      throw Error(Errc::malformed_row, "line " + std::to_string(line_no) + ": \"" + line + "\"");
    }
    if (s.box.w < 0 || s.box.h < 0) {
      throw Error(Errc::malformed_row, "line " + std::to_string(line_no) + ": negative extent");
    }
    s.state = parse_state(f[6], line_no);
    tracks.push_back(s);
  }
  return tracks;
}

std::vector<TrackSnapshot> read_tracks_file(const std::filesystem::path& path) {
  auto in = text::open_in(path);
  return read_tracks(in);
}

void write_tracks(std::span<const TrackSnapshot> tracks, std::ostream& out) {
  std::string buf;
  buf.append(kTrackCsvHeader).push_back('\n');
  for (const TrackSnapshot& s : tracks) {
    buf += std::to_string(s.id);
    buf += ',';
    buf += std::to_string(s.t);
    for (double v : {s.box.x, s.box.y, s.box.w, s.box.h}) {
      buf += ',';
      text::append_fixed(buf, v, 4);
    }
    buf += ',';
    buf += to_string(s.state);
    buf += ',';
    text::append_fixed(buf, s.vx, 4);
    buf += ',';
    text::append_fixed(buf, s.vy, 4);
    buf += '\n';
  }
  out << buf;
  if (!out) throw Error(Errc::io_failure, "write failed");
}

void write_tracks_file(std::span<const TrackSnapshot> tracks, const std::filesystem::path& path) {
  auto out = text::open_out(path);
  write_tracks(tracks, out);
}

}  // namespace evtrack
