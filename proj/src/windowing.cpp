#include "synchroflow/windowing.hpp"

#include "synchroflow/error.hpp"

namespace synchroflow::events {

WindowAssigner::WindowAssigner(uint64_t window_width_ms, uint64_t skew_allowance_ms)
    : window_width_ms_(window_width_ms), skew_allowance_ms_(skew_allowance_ms) {
    if (window_width_ms_ == 0)
        throw Error(Errc::bad_config, "window width must be positive");
}

WindowRange WindowAssigner::advance_watermark(uint64_t ts_ms) {
    uint64_t candidate = ts_ms > skew_allowance_ms_ ? ts_ms - skew_allowance_ms_ : 0;
    if (candidate > watermark_ms_) watermark_ms_ = candidate;

    uint64_t finalized_now = watermark_ms_ / window_width_ms_;
    WindowRange newly{finalized_count_, finalized_now};
    if (finalized_now > finalized_count_) finalized_count_ = finalized_now;
    return newly.empty() ? WindowRange{finalized_count_, finalized_count_} : newly;
}

RoutedWindow WindowAssigner::route(uint64_t ts_ms) const {
    uint64_t window = assign_window(ts_ms);
    if (is_finalized(window)) return RoutedWindow{first_open_window(), true};
    return RoutedWindow{window, false};
}

}  // namespace synchroflow::events
