#pragma once

#include <stdexcept>
#include <string>

namespace ivproc {

/// Invalid combination or shape of arguments (mismatched dimensions,
/// non-disjoint index sets, malformed weight matrix, ...).
struct argument_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A value lies outside its admissible domain (node index out of range,
/// lag beyond the series length, ...).
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

/// A matrix that must be inverted is singular or too ill-conditioned.
struct singularity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A model violates its stability/subcriticality condition.
struct instability_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The instrument block of the covariance matrix is rank deficient or
/// numerically too close to zero for identification.
struct weak_instrument_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A configured resource cap was exceeded (event cap, rejection-sampler cap).
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ivproc
