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

#include "groundqa/error.hpp"

namespace groundqa {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::kInvalidArgument: return "InvalidArgument";
        case ErrorCode::kMalformedDocument: return "MalformedDocument";
        case ErrorCode::kEmptyDocument: return "EmptyDocument";
        case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
        case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
        case ErrorCode::kContextOverflow: return "ContextOverflow";
        case ErrorCode::kZeroVector: return "ZeroVector";
        case ErrorCode::kDuplicateId: return "DuplicateId";
        case ErrorCode::kEmptyIndex: return "EmptyIndex";
        case ErrorCode::kFormatVersionMismatch: return "FormatVersionMismatch";
        case ErrorCode::kCorruptFile: return "CorruptFile";
        case ErrorCode::kNotFound: return "NotFound";
        case ErrorCode::kEmptyCandidates: return "EmptyCandidates";
        case ErrorCode::kFormatError: return "FormatError";
        case ErrorCode::kMissingLabel: return "MissingLabel";
        case ErrorCode::kIoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void raise(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace groundqa
