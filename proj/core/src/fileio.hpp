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

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

// POSIX file helpers with explicit durability: appends and atomic rewrites
// are fsync'ed before returning.
namespace groundqa::fileio {

std::string read_file(const std::filesystem::path& path);

/// Writes to path.tmp, fsyncs, renames over path and fsyncs the directory.
void write_atomic(const std::filesystem::path& path, std::string_view data);

/// Appends data and fsyncs. Creates the file when missing.
void append_durable(const std::filesystem::path& path, std::string_view data);

void truncate_file(const std::filesystem::path& path, std::size_t size);

}  // namespace groundqa::fileio
