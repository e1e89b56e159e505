// Copyright 2026 The csgd Authors. All Rights Reserved.
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
// =============================================================================

#pragma once

#include "csgd/algorithms.hpp"
#include "csgd/analysis.hpp"
#include "csgd/compressors.hpp"
#include "csgd/config.hpp"
#include "csgd/experiment.hpp"
#include "csgd/problems.hpp"
#include "csgd/rng.hpp"
#include "csgd/suite_io.hpp"
#include "csgd/trace.hpp"
#include "csgd/tuning.hpp"
#include "csgd/types.hpp"
