#pragma once

#include <string>
#include <string_view>

namespace synchroflow::agg {

// Append-only write-ahead journal of applied wire lines, one per line. A
// line is journaled after it passes every acceptance check and before it
// mutates the ledger, so replaying the journal reconstructs exactly the
// applied history.
class JournalWriter {
public:
    JournalWriter() = default;
    ~JournalWriter();

    JournalWriter(const JournalWriter&) = delete;
    JournalWriter& operator=(const JournalWriter&) = delete;

    // Opens (creating if needed) for append. fsync_each makes every append
    // durable before returning. Throws Error(io_error).
    void open(const std::string& path, bool fsync_each);
    void close();

    bool enabled() const { return fd_ >= 0; }
    const std::string& path() const { return path_; }

    // Writes line + '\n'. Throws Error(io_error) on short or failed writes.
    void append(std::string_view line);
    void sync();

private:
    int fd_ = -1;
    bool fsync_each_ = true;
    std::string path_;
};

}  // namespace synchroflow::agg
