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

#include <filesystem>
#include <memory>
#include <string>

#include "groundqa/engine.hpp"

namespace groundqa {

struct ServiceOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  ///< 0 picks a free port
    std::filesystem::path static_dir;
    std::string cors_origin = "*";
    std::size_t max_upload_bytes = 64u << 20;
};

/// JSON HTTP API over an Engine:
///
///   POST   /api/documents                  multipart "file" or {"name","text"}
///   GET    /api/documents
///   GET    /api/documents/{id}
///   DELETE /api/documents/{id}
///   POST   /api/conversations
///   GET    /api/conversations/{id}
///   POST   /api/conversations/{id}/query   {"question","document_id"?,"debug"?}
///   GET    /api/health
///
/// Failures are {"error": {"code","message","detail"}} with code one of
/// bad_request, not_found, backend_unavailable, internal. There is no
/// authentication; bind to loopback or put a proxy in front.
class Service {
  public:
    Service(Engine& engine, ServiceOptions options);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Binds the listening socket and returns the bound port. Throws IoError.
    int bind();

    /// Serves until stop(); binds first if needed.
    void run();

    void stop();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace groundqa
