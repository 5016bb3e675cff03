#include "guardrec/common.hpp"

#include <cstdio>
#include <cstdlib>
#include <mutex>

namespace guardrec {

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed) {
    return fnv1a64(s.data(), s.size(), seed);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t master, std::string_view stream, std::uint64_t salt) {
    return splitmix64(splitmix64(master ^ fnv1a64(stream)) ^ salt);
}

namespace {

LogLevel parse_level_env() {
    const char* v = std::getenv("GUARDREC_LOG");
    if (!v) return LogLevel::warn;
    std::string s(v);
    if (s == "debug") return LogLevel::debug;
    if (s == "info") return LogLevel::info;
    if (s == "warn") return LogLevel::warn;
    if (s == "error") return LogLevel::error;
    if (s == "off") return LogLevel::off;
    return LogLevel::warn;
}

LogLevel g_level = parse_level_env();
std::mutex g_log_mutex;

}  // namespace

LogLevel log_level() { return g_level; }

void set_log_level(LogLevel level) { g_level = level; }

void log_message(LogLevel level, const std::string& msg) {
    if (static_cast<int>(level) < static_cast<int>(g_level)) return;
    static const char* names[] = {"debug", "info", "warn", "error"};
    std::lock_guard<std::mutex> lock(g_log_mutex);
    std::fprintf(stderr, "[guardrec:%s] %s\n", names[static_cast<int>(level)], msg.c_str());
}

}  // namespace guardrec
