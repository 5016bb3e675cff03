#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace guardrec {

using Index = std::int32_t;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parse failures carry the offending file and 1-based line number.
struct ParseError : Error {
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : Error(path + ":" + std::to_string(line) + ": " + what), path(path), line(line) {}
    std::string path;
    std::size_t line;
};

// Optimizer blew up; iteration tells where.
struct DivergenceError : Error {
    DivergenceError(int iteration, const std::string& what)
        : Error("iteration " + std::to_string(iteration) + ": " + what), iteration(iteration) {}
    int iteration;
};

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ull);

// Derives an independent sub-seed from a master seed and a stream name, so one
// --seed flag reproduces every random choice in a run.
std::uint64_t mix_seed(std::uint64_t master, std::string_view stream, std::uint64_t salt = 0);

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

// Level comes from GUARDREC_LOG (debug|info|warn|error|off); default warn.
LogLevel log_level();
void set_log_level(LogLevel level);
void log_message(LogLevel level, const std::string& msg);

inline void log_debug(const std::string& msg) { log_message(LogLevel::debug, msg); }
inline void log_info(const std::string& msg) { log_message(LogLevel::info, msg); }
inline void log_warn(const std::string& msg) { log_message(LogLevel::warn, msg); }

}  // namespace guardrec
