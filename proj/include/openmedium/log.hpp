#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace openmedium {

enum class LogLevel : int { error = 0, info = 1, debug = 2 };

// Console verbosity, from OPENMEDIUM_LOG_LEVEL. Affects stderr chatter only;
// canonical outputs (events.log, metrics.csv, checkpoints) ignore it.
inline LogLevel& log_level() {
    static LogLevel lvl = [] {
        const char* env = std::getenv("OPENMEDIUM_LOG_LEVEL");
        if (!env || !*env) return LogLevel::info;
        if (std::strcmp(env, "error") == 0) return LogLevel::error;
        if (std::strcmp(env, "info") == 0) return LogLevel::info;
        if (std::strcmp(env, "debug") == 0) return LogLevel::debug;
        throw std::runtime_error(
            "invalid OPENMEDIUM_LOG_LEVEL (expected error|info|debug)");
    }();
    return lvl;
}

template <typename... Args>
inline void log_at(LogLevel lvl, const char* fmt, Args... args) {
    if (int(lvl) > int(log_level())) return;
    const char* tag = lvl == LogLevel::error ? "error"
                      : lvl == LogLevel::info ? "info"
                                              : "debug";
    std::fprintf(stderr, "[%s] ", tag);
    std::fprintf(stderr, fmt, args...);
    std::fputc('\n', stderr);
}

inline void log_info(const char* fmt) { log_at(LogLevel::info, "%s", fmt); }
inline void log_error(const char* fmt) { log_at(LogLevel::error, "%s", fmt); }

}  // namespace openmedium
