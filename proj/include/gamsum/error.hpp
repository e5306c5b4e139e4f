#ifndef GAMSUM_ERROR_HPP
#define GAMSUM_ERROR_HPP

#include <stdexcept>
#include <string>

namespace gamsum {

// Data-level failures (bad records, broken invariants). The CLI maps these
// to exit code 1; usage problems are handled by the flag parser (exit 2).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public DataError {
public:
    explicit ParseError(const std::string& msg) : DataError(msg) {}
};

class ValidationError : public DataError {
public:
    explicit ValidationError(const std::string& msg) : DataError(msg) {}
};

// Model file carries a version stamp we refuse to read past.
class VersionError : public DataError {
public:
    explicit VersionError(const std::string& msg) : DataError(msg) {}
};

// Model file payload fails its checksum or is structurally truncated.
class IntegrityError : public DataError {
public:
    explicit IntegrityError(const std::string& msg) : DataError(msg) {}
};

class TrainingError : public DataError {
public:
    explicit TrainingError(const std::string& msg) : DataError(msg) {}
};

} // namespace gamsum

#endif
