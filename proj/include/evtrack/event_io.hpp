#pragma once

// Event-stream and track-output serialization.
//
// EVS0 binary layout (all integers little-endian):
//
//   header (16 bytes)   "EVS0" | u16 width | u16 height | u32 reserved=0 | u32 count
//   record (16 bytes)   u64 t_us | u16 x | u16 y | u8 p | 3 zero bytes
//
// Event CSV:  header "t_us,x,y,p", one decimal-integer event per line.
// Track CSV:  header "track_id,t_us,x,y,w,h,state,vx,vy", floats with 4 decimals.

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "evtrack/types.hpp"

namespace evtrack {

enum class EventFormat { binary, csv };

inline constexpr std::size_t kEvsHeaderSize = 16;
inline constexpr std::size_t kEvsRecordSize = 16;
inline constexpr std::string_view kEventCsvHeader = "t_us,x,y,p";
inline constexpr std::string_view kTrackCsvHeader = "track_id,t_us,x,y,w,h,state,vx,vy";

// Picks the format from the file extension: ".csv" is CSV, anything else EVS0.
EventFormat format_from_path(const std::filesystem::path& path);

// Binary input carries its own geometry; `geometry_override` replaces it when
// given. CSV input requires `geometry_override`.
EventStream read_events(std::istream& in, EventFormat format,
                        std::optional<SensorGeometry> geometry_override = std::nullopt);
EventStream read_events_file(const std::filesystem::path& path, EventFormat format,
                             std::optional<SensorGeometry> geometry_override = std::nullopt);

void write_events(const EventStream& stream, std::ostream& out, EventFormat format);
void write_events_file(const EventStream& stream, const std::filesystem::path& path,
                       EventFormat format);

std::vector<TrackSnapshot> read_tracks(std::istream& in);
std::vector<TrackSnapshot> read_tracks_file(const std::filesystem::path& path);

void write_tracks(std::span<const TrackSnapshot> tracks, std::ostream& out);
void write_tracks_file(std::span<const TrackSnapshot> tracks, const std::filesystem::path& path);

}  // namespace evtrack
