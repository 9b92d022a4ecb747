// Copyright 2026 The instgame Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
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

namespace instgame {

enum class ErrorCode {
  kInvalidArgument,
  kUnsatisfiableConfig,
  kNotMember,
  kMissingExperience,
  kRoomFull,
  kStaleSeat,
  kDuplicateMove,
  kEmptyCell,
  kEmptySample,
  kMissingLabel,
  kMissingPair,
  kEmptyDataset,
  kServiceNotReady,
  kUnknownSession,
  kWrongStage,
  kDuplicateSubmission,
  kInvalidChoice,
  kSessionClosed,
  kParse,
  kIo,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kUnsatisfiableConfig: return "UnsatisfiableConfig";
    case ErrorCode::kNotMember: return "NotMember";
    case ErrorCode::kMissingExperience: return "MissingExperience";
    case ErrorCode::kRoomFull: return "RoomFull";
    case ErrorCode::kStaleSeat: return "StaleSeat";
    case ErrorCode::kDuplicateMove: return "DuplicateMove";
    case ErrorCode::kEmptyCell: return "EmptyCell";
    case ErrorCode::kEmptySample: return "EmptySample";
    case ErrorCode::kMissingLabel: return "MissingLabel";
    case ErrorCode::kMissingPair: return "MissingPair";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kServiceNotReady: return "ServiceNotReady";
    case ErrorCode::kUnknownSession: return "UnknownSession";
    case ErrorCode::kWrongStage: return "WrongStage";
    case ErrorCode::kDuplicateSubmission: return "DuplicateSubmission";
    case ErrorCode::kInvalidChoice: return "InvalidChoice";
    case ErrorCode::kSessionClosed: return "SessionClosed";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

// Every recoverable failure in the library is reported as an Error carrying
// a machine-readable code; the HTTP layer maps codes to status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace instgame
