#include "nbplan/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace nbplan::log {

namespace {
std::atomic<Level> g_level{Level::Warning};
std::mutex g_mutex;

const char* tag(Level level) {
    switch (level) {
        case Level::Debug: return "debug";
        case Level::Info: return "info";
        case Level::Warning: return "warning";
        case Level::Error: return "error";
        case Level::Off: break;
    }
    return "";
}
}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

void write(Level level, std::string_view message) {
    if (level < g_level.load() || level == Level::Off) return;
    std::lock_guard lock(g_mutex);
    std::cerr << "[nbplan " << tag(level) << "] " << message << '\n';
}

}  // namespace nbplan::log
