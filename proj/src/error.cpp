// Copyright 2026 The facesweep Authors
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

#include "facesweep/error.hpp"

namespace facesweep {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kDimensionMismatch: return "dimension_mismatch";
    case ErrorKind::kNonFinite: return "non_finite";
    case ErrorKind::kSchema: return "schema_violation";
    case ErrorKind::kIo: return "io_error";
    case ErrorKind::kProjection: return "projection_failure";
    case ErrorKind::kSingularSystem: return "singular_system";
    case ErrorKind::kBackendExited: return "backend_exited";
    case ErrorKind::kBackendMalformed: return "backend_malformed_response";
    case ErrorKind::kBackendDimensionDrift: return "backend_dimension_drift";
    case ErrorKind::kBackendReported: return "backend_error";
    case ErrorKind::kMissingIdentity: return "missing_identity";
    case ErrorKind::kEmptyInput: return "empty_input";
    case ErrorKind::kCollision: return "id_collision";
  }
  return "unknown";
}

}  // namespace facesweep
