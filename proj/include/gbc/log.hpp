#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace gbc::log {

enum class Level { error = 0, info = 1, debug = 2 };

// Threshold parsed once from GBC_LOG (error|info|debug); anything else, or an
// unset variable, means errors only.
inline Level threshold() {
    static const Level lvl = [] {
        const char* env = std::getenv("GBC_LOG");
        if (env == nullptr) return Level::error;
        if (std::strcmp(env, "debug") == 0) return Level::debug;
        if (std::strcmp(env, "info") == 0) return Level::info;
        return Level::error;
    }();
    return lvl;
}

inline void write(Level level, const std::string& msg) {
    if (level > threshold()) return;
    const char* tag = level == Level::error ? "error" : level == Level::info ? "info" : "debug";
    std::fprintf(stderr, "[gbc:%s] %s\n", tag, msg.c_str());
}

inline void error(const std::string& msg) { write(Level::error, msg); }
inline void info(const std::string& msg) { write(Level::info, msg); }
inline void debug(const std::string& msg) { write(Level::debug, msg); }

}  // namespace gbc::log
