// Copyright 2026 the groundqa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fileio.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "groundqa/error.hpp"

namespace groundqa::fileio {

namespace {

[[noreturn]] void io_fail(const std::string& what, const std::filesystem::path& path) {
    raise(ErrorCode::kIoError, what + " " + path.string() + ": " + std::strerror(errno));
}

class Fd {
  public:
    Fd(const std::filesystem::path& path, int flags) : fd_(::open(path.c_str(), flags | O_CLOEXEC, 0644)) {
        if (fd_ < 0) io_fail("cannot open", path);
    }
    ~Fd() {
        if (fd_ >= 0) ::close(fd_);
    }
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;

    int get() const { return fd_; }

  private:
    int fd_;
};

void write_all(int fd, std::string_view data, const std::filesystem::path& path) {
    const char* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
        ssize_t n = ::write(fd, p, left);
        if (n < 0) {
            if (errno == EINTR) continue;
            io_fail("write failed for", path);
        }
        p += n;
        left -= static_cast<std::size_t>(n);
    }
}

void sync_dir(const std::filesystem::path& dir) {
    int fd = ::open(dir.empty() ? "." : dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
    if (fd >= 0) {
        ::fsync(fd);
        ::close(fd);
    }
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::kIoError, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void write_atomic(const std::filesystem::path& path, std::string_view data) {
    auto tmp = path;
    tmp += ".tmp";
    {
        Fd fd(tmp, O_WRONLY | O_CREAT | O_TRUNC);
        write_all(fd.get(), data, tmp);
        if (::fsync(fd.get()) != 0) io_fail("fsync failed for", tmp);
    }
    if (::rename(tmp.c_str(), path.c_str()) != 0) io_fail("rename failed for", path);
    sync_dir(path.parent_path());
}

void append_durable(const std::filesystem::path& path, std::string_view data) {
    Fd fd(path, O_WRONLY | O_CREAT | O_APPEND);
    write_all(fd.get(), data, path);
    if (::fsync(fd.get()) != 0) io_fail("fsync failed for", path);
}

void truncate_file(const std::filesystem::path& path, std::size_t size) {
    if (::truncate(path.c_str(), static_cast<off_t>(size)) != 0) io_fail("truncate failed for", path);
}

}  // namespace groundqa::fileio
