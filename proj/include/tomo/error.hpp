// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tomo {

enum class ErrorKind {
    // shared
    EmptyInput,
    DimMismatch,
    ShapeMismatch,
    LengthMismatch,
    Io,
    Parse,
    Usage,
    // study / embeddings
    MissingView,
    CorruptHeader,
    MissingKey,
    // ingest
    AuthError,
    PolicyError,
    TransportError,
    CapacityError,
    EmptyImage,
    NoMatch,
    Ambiguous,
    // density
    EmptyClass,
    EmptyTestSet,
    // risk
    InvalidEventYear,
    Unusable,
    AllMasked,
    DegenerateSplit,
    SingleClassYear,
    // detect
    BadGrid,
    DegenerateAnchor,
    NoVolumes,
    NoAnnotations,
    // stats
    SingleClass,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace tomo
