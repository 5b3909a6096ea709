#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace gou {

/// Bad argument or precondition violation; the CLI maps it to exit code 2.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not reach its accuracy target (exit code 3).
class NumericFailure : public std::runtime_error {
public:
    explicit NumericFailure(const std::string& what, double partial = 0.0)
        : std::runtime_error(what), partial_(partial) {}

    /// Best value available when the routine gave up (e.g. a series partial sum).
    double partial() const noexcept { return partial_; }

private:
    double partial_;
};

namespace detail {

/// Short scientific rendering for error messages.
inline std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidArgument(msg);
}

} // namespace detail
} // namespace gou
