/*
 * Copyright The stacksurgeon authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "stacksurgeon/errors.hpp"

namespace stacksurgeon {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::TargetNotFound: return "TargetNotFound";
        case ErrorCode::PermissionDenied: return "PermissionDenied";
        case ErrorCode::UnsupportedPlatform: return "UnsupportedPlatform";
        case ErrorCode::SessionClosed: return "SessionClosed";
        case ErrorCode::FileNotFound: return "FileNotFound";
        case ErrorCode::MalformedReplay: return "MalformedReplay";
        case ErrorCode::EmptyChain: return "EmptyChain";
        case ErrorCode::ZeroTotal: return "ZeroTotal";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::MissingRoot: return "MissingRoot";
        case ErrorCode::UncategorizedFound: return "UncategorizedFound";
        case ErrorCode::DirNotFound: return "DirNotFound";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::DuplicateLabel: return "DuplicateLabel";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace stacksurgeon
