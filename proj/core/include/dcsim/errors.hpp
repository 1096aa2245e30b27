#pragma once

#include <stdexcept>
#include <string>

namespace dcsim {

// Error taxonomy maps onto CLI exit codes:
//   usage_error -> 2, config_error -> 3, data_error -> 4, sim_fault -> 5.

struct usage_error : std::runtime_error {
    explicit usage_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct data_error : std::runtime_error {
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when the electrical simulation leaves its validity region
// (collapsed DC link, non-finite state, ...).  Carries enough context to
// locate the failing sample.
struct sim_fault : std::runtime_error {
    explicit sim_fault(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace dcsim
