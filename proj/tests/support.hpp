#pragma once

// Independent oracles and fixtures for the unit tests.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "evtrack/types.hpp"

namespace evtest {

// Unit pixels shared by two integer-cornered boxes, counted one by one.
inline long pixel_intersection(int ax, int ay, int aw, int ah, int bx, int by, int bw, int bh) {
  long n = 0;
  for (int y = ay; y < ay + ah; ++y) {
    for (int x = ax; x < ax + aw; ++x) {
      if (x >= bx && x < bx + bw && y >= by && y < by + bh) ++n;
    }
  }
  return n;
}

inline evtrack::EventStream random_stream(std::mt19937_64& rng, std::size_t n, evtrack::SensorGeometry g) {
  std::uniform_int_distribution<int> gap(0, 50);
  std::uniform_int_distribution<std::uint32_t> xs(0, g.width - 1), ys(0, g.height - 1);
  std::uniform_int_distribution<int> pol(0, 1);
  std::vector<evtrack::Event> ev;
  ev.reserve(n);
  std::uint64_t t = std::uniform_int_distribution<std::uint64_t>(0, 1'000'000)(rng);
  for (std::size_t i = 0; i < n; ++i) {
    t += static_cast<std::uint64_t>(gap(rng));
    ev.push_back({t, static_cast<std::uint16_t>(xs(rng)), static_cast<std::uint16_t>(ys(rng)),
                  static_cast<std::uint8_t>(pol(rng))});
  }
  return evtrack::EventStream(g, std::move(ev));
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("evtrack-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace evtest
