// SPDX-License-Identifier: Apache-2.0
//
// uavsec: secrecy-rate simulation and solvers for multi-UAV RSMA downlinks
// Copyright (C) 2026 The uavsec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
#include "uavsec/error.hpp"

namespace uavsec {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::SingularTriangular: return "SingularTriangular";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::StaleCache: return "StaleCache";
    case ErrorCode::EpisodeFinished: return "EpisodeFinished";
    case ErrorCode::BufferUnderfull: return "BufferUnderfull";
    case ErrorCode::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorCode::NoFeasiblePath: return "NoFeasiblePath";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::EmptySamples: return "EmptySamples";
    case ErrorCode::MissingRun: return "MissingRun";
    }
    return "Unknown";
}

} // namespace uavsec
