#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include <unistd.h>

#include "tdho/errors.hpp"

namespace tdho::harness {

inline constexpr const char* kOutputDirEnv = "TDHO_OUTPUT_DIR";
inline constexpr const char* kDefaultOutputDir = "tdho-out";

class OutputError : public Error {
 public:
  using Error::Error;
};

/// Explicit flag value, then $TDHO_OUTPUT_DIR, then ./tdho-out.
inline std::filesystem::path resolve_output_dir(const std::string& flag_value = {}) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return kDefaultOutputDir;
}

/// Writes `content` to a sibling temporary and renames it over `target`, so
/// readers never observe a partially written file.
inline void atomic_write(const std::filesystem::path& target, std::string_view content) {
  static std::atomic<unsigned long> counter{0};
  namespace fs = std::filesystem;
  std::error_code ec;
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw OutputError("cannot create directory " + target.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw OutputError("write to " + tmp.string() + " failed");
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code ignore;
    fs::remove(tmp, ignore);
    throw OutputError("cannot rename onto " + target.string() + ": " + ec.message());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Fixed 17-significant-digit rendering used for every CSV number.
inline std::string format_g17(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace tdho::harness
