// Copyright 2026 The qrecon Authors
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

namespace qrecon {

enum class ErrorKind {
    DimensionMismatch,
    NotHermitian,
    InvariantViolation,
    IncompleteFamily,
    NonCommutingFamily,
    SizeLimit,
    NonPureConditioning,
    InvalidPOVM,
    InvalidArgument,
    IndexOutOfRange,
    BranchCut,
    ZeroTime,
    ParseError,
    ValidationError,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NotHermitian: return "NotHermitian";
        case ErrorKind::InvariantViolation: return "InvariantViolation";
        case ErrorKind::IncompleteFamily: return "IncompleteFamily";
        case ErrorKind::NonCommutingFamily: return "NonCommutingFamily";
        case ErrorKind::SizeLimit: return "SizeLimit";
        case ErrorKind::NonPureConditioning: return "NonPureConditioning";
        case ErrorKind::InvalidPOVM: return "InvalidPOVM";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::BranchCut: return "BranchCut";
        case ErrorKind::ZeroTime: return "ZeroTime";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::ValidationError: return "ValidationError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the scenario runner) can dispatch on it without parsing text.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
    /// The message without the kind prefix.
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

private:
    ErrorKind kind_;
    std::string message_;
};

}  // namespace qrecon
