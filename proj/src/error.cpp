// Copyright 2026 The tomo Authors
// SPDX-License-Identifier: Apache-2.0

#include "tomo/error.hpp"

namespace tomo {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::DimMismatch: return "DimMismatch";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::Io: return "Io";
        case ErrorKind::Parse: return "Parse";
        case ErrorKind::Usage: return "Usage";
        case ErrorKind::MissingView: return "MissingView";
        case ErrorKind::CorruptHeader: return "CorruptHeader";
        case ErrorKind::MissingKey: return "MissingKey";
        case ErrorKind::AuthError: return "AuthError";
        case ErrorKind::PolicyError: return "PolicyError";
        case ErrorKind::TransportError: return "TransportError";
        case ErrorKind::CapacityError: return "CapacityError";
        case ErrorKind::EmptyImage: return "EmptyImage";
        case ErrorKind::NoMatch: return "NoMatch";
        case ErrorKind::Ambiguous: return "Ambiguous";
        case ErrorKind::EmptyClass: return "EmptyClass";
        case ErrorKind::EmptyTestSet: return "EmptyTestSet";
        case ErrorKind::InvalidEventYear: return "InvalidEventYear";
        case ErrorKind::Unusable: return "Unusable";
        case ErrorKind::AllMasked: return "AllMasked";
        case ErrorKind::DegenerateSplit: return "DegenerateSplit";
        case ErrorKind::SingleClassYear: return "SingleClassYear";
        case ErrorKind::BadGrid: return "BadGrid";
        case ErrorKind::DegenerateAnchor: return "DegenerateAnchor";
        case ErrorKind::NoVolumes: return "NoVolumes";
        case ErrorKind::NoAnnotations: return "NoAnnotations";
        case ErrorKind::SingleClass: return "SingleClass";
    }
    return "Unknown";
}

}  // namespace tomo
