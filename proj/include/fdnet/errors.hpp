#pragma once

#include <stdexcept>
#include <string>

namespace fdnet {

// Invalid configuration values (bad band limit, step sizes, radii).
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Dataset problems: missing samples, empty inputs, unreadable files.
struct data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// CSV parsing failure; carries the 1-based line number.
struct parse_error : data_error {
    parse_error(const std::string& msg, std::size_t line_no)
        : data_error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
    std::size_t line;
};

// Sample grid too coarse to resolve the requested frequency band.
struct resolution_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mismatched array dimensions.
struct shape_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numerical failure: iteration did not converge, or training diverged.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fdnet
