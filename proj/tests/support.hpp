#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include <fmt/format.h>

#include "bwi/common/rng.hpp"
#include "bwi/movement_ingest.hpp"

namespace bwi::test {

namespace fs = std::filesystem;

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            fmt::format("bwi_test_{}_{}", ::getpid(), counter.fetch_add(1));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline Timestamp ts(const std::string& s) { return *parse_rfc3339(s); }

inline VoyageRecord voyage(std::string id, std::string vessel, std::string from, std::string to,
                           const std::string& depart = "2011-03-01T00:00:00Z",
                           double days = 10.0) {
  VoyageRecord v;
  v.voyage_id = std::move(id);
  v.vessel_id = std::move(vessel);
  v.origin_port = from + "P";
  v.dest_port = to + "P";
  v.origin_country = std::move(from);
  v.dest_country = std::move(to);
  v.depart_time = ts(depart);
  v.arrive_time = v.depart_time + std::chrono::microseconds(
                                      static_cast<long long>(days * 86400.0 * 1e6));
  v.duration_days = days;
  return v;
}

}  // namespace bwi::test
