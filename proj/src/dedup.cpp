#include "synchroflow/dedup.hpp"

#include <limits>

namespace synchroflow::events {

bool SeqRangeSet::insert(uint64_t seq) {
    // Range at or before seq that could contain or abut it.
    auto next = ranges_.upper_bound(seq);
    auto prev = next == ranges_.begin() ? ranges_.end() : std::prev(next);

    if (prev != ranges_.end() && seq <= prev->second) return false;  // duplicate

    bool joins_prev =
        prev != ranges_.end() && prev->second != std::numeric_limits<uint64_t>::max() &&
        prev->second + 1 == seq;
    bool joins_next = next != ranges_.end() && seq + 1 == next->first;

    if (joins_prev && joins_next) {
        prev->second = next->second;
        ranges_.erase(next);
    } else if (joins_prev) {
        prev->second = seq;
    } else if (joins_next) {
        uint64_t end = next->second;
        ranges_.erase(next);
        ranges_.emplace(seq, end);
    } else {
        ranges_.emplace(seq, seq);
    }
    ++size_;
    return true;
}

bool SeqRangeSet::contains(uint64_t seq) const {
    auto next = ranges_.upper_bound(seq);
    if (next == ranges_.begin()) return false;
    auto prev = std::prev(next);
    return seq >= prev->first && seq <= prev->second;
}

DedupIndex::Outcome DedupIndex::accept(const std::string& node_id, uint64_t seq) {
    if (per_node_[node_id].insert(seq)) {
        ++accepted_;
        return Outcome::fresh;
    }
    return Outcome::duplicate;
}

bool DedupIndex::seen(const std::string& node_id, uint64_t seq) const {
    auto it = per_node_.find(node_id);
    return it != per_node_.end() && it->second.contains(seq);
}

}  // namespace synchroflow::events
