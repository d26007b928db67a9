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

#include "qrstab/config.hpp"
#include "qrstab/errors.hpp"
#include "qrstab/fock.hpp"
#include "qrstab/linalg.hpp"
#include "qrstab/lmi.hpp"
#include "qrstab/perturbation.hpp"
#include "qrstab/pipeline.hpp"
#include "qrstab/report.hpp"
#include "qrstab/rng.hpp"
#include "qrstab/system.hpp"
