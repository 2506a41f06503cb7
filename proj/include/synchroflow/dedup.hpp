#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>

namespace synchroflow::events {

// Set of accepted sequence numbers stored as merged inclusive ranges, so a
// node delivering mostly-contiguous seqs costs O(1) ranges regardless of
// volume.
class SeqRangeSet {
public:
    // Returns true when seq was not present (fresh), false for a duplicate.
    bool insert(uint64_t seq);
    bool contains(uint64_t seq) const;

    size_t range_count() const { return ranges_.size(); }
    uint64_t size() const { return size_; }
    const std::map<uint64_t, uint64_t>& ranges() const { return ranges_; }

private:
    std::map<uint64_t, uint64_t> ranges_;  // start -> end, inclusive
    uint64_t size_ = 0;
};

// Per-node accepted-seq index. An event is fresh exactly on first sight of
// its (node_id, seq); every later sighting is a duplicate.
class DedupIndex {
public:
    enum class Outcome { fresh, duplicate };

    Outcome accept(const std::string& node_id, uint64_t seq);
    bool seen(const std::string& node_id, uint64_t seq) const;
    uint64_t accepted_count() const { return accepted_; }

private:
    std::unordered_map<std::string, SeqRangeSet> per_node_;
    uint64_t accepted_ = 0;
};

}  // namespace synchroflow::events
