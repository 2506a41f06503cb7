#pragma once

#include <cstdint>

namespace synchroflow::events {

// Half-open range of window indices [begin, end).
struct WindowRange {
    uint64_t begin = 0;
    uint64_t end = 0;

    bool empty() const { return begin >= end; }
    uint64_t count() const { return empty() ? 0 : end - begin; }
};

struct RoutedWindow {
    uint64_t window = 0;
    bool late = false;
};

// Assigns sampling windows by floor division of the sender timestamp and
// tracks a monotone watermark (highest observed ts minus the skew allowance).
// A window w is final once watermark >= (w+1) * width; finalized windows
// never reopen.
class WindowAssigner {
public:
    WindowAssigner() = default;
    WindowAssigner(uint64_t window_width_ms, uint64_t skew_allowance_ms);

    uint64_t assign_window(uint64_t ts_ms) const { return ts_ms / window_width_ms_; }

    // Raises the watermark to max(current, ts - skew) and returns the windows
    // newly finalized by this advance (possibly empty).
    WindowRange advance_watermark(uint64_t ts_ms);

    // Routes an event timestamp: events whose window is already final are
    // redirected to the first open window so no mass is ever dropped.
    RoutedWindow route(uint64_t ts_ms) const;

    bool is_finalized(uint64_t window) const { return window < finalized_count_; }
    uint64_t first_open_window() const { return finalized_count_; }
    uint64_t finalized_count() const { return finalized_count_; }
    uint64_t watermark_ms() const { return watermark_ms_; }
    uint64_t window_width_ms() const { return window_width_ms_; }
    uint64_t skew_allowance_ms() const { return skew_allowance_ms_; }

private:
    uint64_t window_width_ms_ = 60'000;
    uint64_t skew_allowance_ms_ = 5'000;
    uint64_t watermark_ms_ = 0;
    uint64_t finalized_count_ = 0;
};

}  // namespace synchroflow::events
