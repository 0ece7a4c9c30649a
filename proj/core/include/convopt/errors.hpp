#pragma once

#include <stdexcept>
#include <string>

namespace convopt {

// Error taxonomy shared by the library and the CLI exit codes:
// validation -> 1, io -> 2, capability (e.g. enumeration guard) -> 3.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

class capability_error : public std::runtime_error {
public:
    explicit capability_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace convopt
