// Copyright 2026 The qrstab authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace qrstab {

/// Base class for all qrstab errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define QRSTAB_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
  }

// System construction and validation.
QRSTAB_DEFINE_ERROR(InvalidArgument);
QRSTAB_DEFINE_ERROR(ShapeMismatch);
QRSTAB_DEFINE_ERROR(SymmetryViolation);
QRSTAB_DEFINE_ERROR(SingularTheta);
QRSTAB_DEFINE_ERROR(NotHurwitz);
QRSTAB_DEFINE_ERROR(PhysicallyInconsistent);
QRSTAB_DEFINE_ERROR(NumericalFailure);

// Perturbation envelopes.
QRSTAB_DEFINE_ERROR(InvalidPerturbation);
QRSTAB_DEFINE_ERROR(MissingParameter);
QRSTAB_DEFINE_ERROR(NonPositiveMu1);

// LMI feasibility.
QRSTAB_DEFINE_ERROR(Infeasible);
QRSTAB_DEFINE_ERROR(IndefinitePi);
QRSTAB_DEFINE_ERROR(AllInfeasible);

// Fock-space oracle.
QRSTAB_DEFINE_ERROR(NonCanonicalTheta);
QRSTAB_DEFINE_ERROR(TraceDrift);
QRSTAB_DEFINE_ERROR(CutoffLeak);

// Configuration / CLI.
QRSTAB_DEFINE_ERROR(ConfigError);

#undef QRSTAB_DEFINE_ERROR

}  // namespace qrstab
