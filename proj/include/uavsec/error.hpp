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
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace uavsec {

enum class ErrorCode {
    InvalidArgument,
    ShapeMismatch,
    NonFinite,
    NotHermitian,
    NotPositiveDefinite,
    NoConvergence,
    SingularTriangular,
    InvalidConfig,
    DegenerateGeometry,
    StaleCache,
    EpisodeFinished,
    BufferUnderfull,
    SearchSpaceTooLarge,
    NoFeasiblePath,
    ConfigError,
    IoError,
    EmptySamples,
    MissingRun,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(format(code, what)), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    static std::string format(ErrorCode code, const std::string& what) {
        return std::string(to_string(code)) + ": " + what;
    }

    ErrorCode code_;
};

} // namespace uavsec
