#pragma once

// Minimal stderr diagnostics controlled by OAKIT_LOG={error|info|debug}.

#include <cstdio>
#include <cstdlib>
#include <string_view>

namespace oakit::diag {

enum class Level { error = 0, info = 1, debug = 2 };

inline Level level_from_env() {
  const char* v = std::getenv("OAKIT_LOG");
  if (v == nullptr) return Level::error;
  std::string_view s{v};
  if (s == "debug") return Level::debug;
  if (s == "info") return Level::info;
  return Level::error;
}

inline Level& current_level() {
  static Level lvl = level_from_env();
  return lvl;
}

inline bool enabled(Level l) { return static_cast<int>(l) <= static_cast<int>(current_level()); }

template <typename... Args>
void write(Level l, const char* fmt, Args... args) {
  if (!enabled(l)) return;
  static constexpr const char* tags[] = {"error", "info", "debug"};
  std::fprintf(stderr, "[oakit:%s] ", tags[static_cast<int>(l)]);
  if constexpr (sizeof...(Args) == 0) {
    std::fputs(fmt, stderr);
  } else {
    std::fprintf(stderr, fmt, args...);
  }
  std::fputc('\n', stderr);
}

template <typename... Args>
void info(const char* fmt, Args... args) {
  write(Level::info, fmt, args...);
}

template <typename... Args>
void debug(const char* fmt, Args... args) {
  write(Level::debug, fmt, args...);
}

template <typename... Args>
void error(const char* fmt, Args... args) {
  write(Level::error, fmt, args...);
}

}  // namespace oakit::diag
