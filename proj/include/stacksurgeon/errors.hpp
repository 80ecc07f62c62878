/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stacksurgeon {

enum class ErrorCode {
    InvalidSpec,
    TargetNotFound,
    PermissionDenied,
    UnsupportedPlatform,
    SessionClosed,
    FileNotFound,
    MalformedReplay,
    EmptyChain,
    ZeroTotal,
    SchemaViolation,
    SyntaxError,
    MissingRoot,
    UncategorizedFound,
    DirNotFound,
    EmptyInput,
    DuplicateLabel,
    IoError,
};

/// Single exception type crossing module boundaries. `details` carries
/// per-item context when a failure concerns a list (e.g. the uncategorized
/// function names behind UncategorizedFound).
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    Error(ErrorCode code, std::string message, std::vector<std::string> details)
        : std::runtime_error(std::move(message)), code_(code), details_(std::move(details)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::vector<std::string>& details() const noexcept { return details_; }

  private:
    ErrorCode code_;
    std::vector<std::string> details_;
};

const char* error_code_name(ErrorCode code) noexcept;

}  // namespace stacksurgeon
