#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace gou {

using WarningSink = std::function<void(std::string_view)>;

namespace detail {

struct WarningState {
    std::mutex mu;
    WarningSink sink = [](std::string_view m) { std::cerr << "warning: " << m << '\n'; };
};

inline WarningState& warning_state() {
    static WarningState s;
    return s;
}

} // namespace detail

/// Replace the warning sink; returns the previous one so callers can restore it.
inline WarningSink set_warning_sink(WarningSink sink) {
    auto& s = detail::warning_state();
    std::lock_guard lock(s.mu);
    std::swap(s.sink, sink);
    return sink;
}

inline void warn(std::string_view msg) {
    auto& s = detail::warning_state();
    std::lock_guard lock(s.mu);
    if (s.sink) s.sink(msg);
}

} // namespace gou
