#pragma once
#include <stdexcept>
#include <string>

namespace airwaynav {

// Malformed or inconsistent input: bad documents, dimension mismatches,
// violated invariants. The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A file could not be read or written. The CLI maps this to exit code 2.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace airwaynav
