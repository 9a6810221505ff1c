#pragma once

#include <stdexcept>
#include <string>

namespace stpd {

// Input that is well-formed but numerically degenerate (zero norm, empty
// marginal slice, zero denominator).
class degenerate_input : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A mode or boosted momentum that cannot be represented on the grid without
// aliasing.
class aliasing_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A region or probe whose Lorentz image leaves the target box.
class coverage_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Fock-space creation beyond the configured particle ceiling.
class truncation_overflow : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

namespace detail {

inline void require(bool condition, const std::string& message)
{
    if (!condition) throw std::invalid_argument(message);
}

} // namespace detail
} // namespace stpd
