#ifndef LOTAD_ERROR_HPP
#define LOTAD_ERROR_HPP

#include <stdexcept>
#include <string>

namespace lotad {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed RM text, bad map file, bad config value.
struct ParseError : Error {
    ParseError(const std::string& msg, int line = 0)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line_no(line) {}
    int line_no;
};

// An LES whose quotient cannot be executed as a deterministic sub-task RM.
struct ProjectionError : Error {
    explicit ProjectionError(const std::string& msg) : Error(msg) {}
};

struct NoValidDecomposition : Error {
    explicit NoValidDecomposition(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace lotad

#endif
