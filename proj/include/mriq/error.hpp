#ifndef MRIQ_ERROR_HPP
#define MRIQ_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mriq {

// File/format problems: unreadable paths, malformed headers, truncated payloads.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Valid request over invalid data: dimension mismatches, out-of-contract volumes.
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Parameter-range violations throw std::invalid_argument.

} // namespace mriq

#endif
