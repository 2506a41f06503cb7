#include "synchroflow/journal.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "synchroflow/error.hpp"

namespace synchroflow::agg {

JournalWriter::~JournalWriter() {
    if (fd_ >= 0) ::close(fd_);
}

void JournalWriter::open(const std::string& path, bool fsync_each) {
    close();
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) {
        throw Error(Errc::io_error,
                    "cannot open journal " + path + ": " + std::strerror(errno));
    }
    fd_ = fd;
    fsync_each_ = fsync_each;
    path_ = path;
}

void JournalWriter::close() {
    if (fd_ >= 0) {
        ::fsync(fd_);
        ::close(fd_);
        fd_ = -1;
    }
    path_.clear();
}

void JournalWriter::append(std::string_view line) {
    if (fd_ < 0) return;
    std::string buffer;
    buffer.reserve(line.size() + 1);
    buffer.append(line);
    buffer.push_back('\n');
    size_t written = 0;
    while (written < buffer.size()) {
        ssize_t n = ::write(fd_, buffer.data() + written, buffer.size() - written);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(Errc::io_error,
                        "journal write failed: " + std::string(std::strerror(errno)));
        }
        written += static_cast<size_t>(n);
    }
    if (fsync_each_ && ::fsync(fd_) != 0) {
        throw Error(Errc::io_error,
                    "journal fsync failed: " + std::string(std::strerror(errno)));
    }
}

void JournalWriter::sync() {
    if (fd_ >= 0) ::fsync(fd_);
}

}  // namespace synchroflow::agg
