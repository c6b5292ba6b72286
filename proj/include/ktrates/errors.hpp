// Copyright the ktrates authors
// SPDX-License-Identifier: MIT

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ktrates {

// Base class for all library errors. Everything thrown on purpose derives
// from this, so callers can catch one type at the CLI boundary.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An interval [a, b] with a >= b where a < b was required.
struct invalid_interval_error : error {
    using error::error;
};

// A scalar parameter outside its documented domain (eps, widths, orders...).
struct invalid_parameter_error : error {
    using error::error;
};

// A construction whose estimated piece count exceeds the configured budget.
struct construction_too_large_error : error {
    std::size_t estimated_pieces;
    construction_too_large_error(const std::string& msg, std::size_t estimate)
        : error(msg), estimated_pieces(estimate) {}
};

// A resolvent was requested at a point of the spectrum.
struct spectrum_hit_error : error {
    using error::error;
};

// An operator model violating the assumptions of the requested computation
// (e.g. peripheral spectrum not contained in {1}).
struct invalid_model_error : error {
    using error::error;
};

// Bump half-widths that overlap on the circle: 4*delta must stay below the
// minimal circular gap between distinct angles.
struct invalid_delta_error : error {
    using error::error;
};

// A truncation radius that would exceed the configured budget.
struct truncation_infeasible_error : error {
    std::size_t required_terms;
    truncation_infeasible_error(const std::string& msg, std::size_t required)
        : error(msg), required_terms(required) {}
};

// Not enough usable data points for a fit or envelope.
struct insufficient_data_error : error {
    using error::error;
};

// A rational value was requested where only a numeric one is defined
// (irrational offsets inside a transition region).
struct inexact_evaluation_error : error {
    using error::error;
};

// File read/write failures and malformed documents.
struct io_error : error {
    using error::error;
};

} // namespace ktrates
