#pragma once

#include <stdexcept>
#include <string>

namespace morreylab {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid parameters (exponent ranges, dimension mismatch, ...).
struct param_error : error {
    using error::error;
};

// Requested scale below what the grid resolves.
struct scale_error : error {
    using error::error;
};

// Region does not meet the domain / contains no cell centers.
struct region_error : error {
    using error::error;
};

// Config file failed to parse or validate (fail-closed).
struct config_error : error {
    using error::error;
};

// A computed lower bound exceeded its upper bound: internal inconsistency.
struct bracket_violation : error {
    using error::error;
};

} // namespace morreylab
