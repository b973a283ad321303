// Copyright 2026 The TraceGraph Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tracegraph {

enum class ErrorCode {
  kInvalidArgument,
  kEmptyDocument,
  kDuplicateDocument,
  kProviderUnavailable,
  kScriptMiss,
  kEmptyGraph,
  kNoContext,
  kNoMatch,
  kEmptyIndex,
  kDanglingProvenance,
  kUnknownMetric,
  kUnknownMethod,
  kNotFound,
  kStoreCorrupt,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

/// All library failures are reported through this exception type. The code
/// is stable and maps onto HTTP statuses and CLI exit codes in the service.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string const& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tracegraph
