// Copyright 2026 The Carve Authors
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

#ifndef CARVE_CARVE_HPP_
#define CARVE_CARVE_HPP_

#include "carve/bench.hpp"
#include "carve/decompose.hpp"
#include "carve/error.hpp"
#include "carve/gateway.hpp"
#include "carve/heuristics.hpp"
#include "carve/instance.hpp"
#include "carve/orchestrator.hpp"
#include "carve/reconstruct.hpp"
#include "carve/rng.hpp"
#include "carve/selection.hpp"
#include "carve/solution.hpp"
#include "carve/subproblem.hpp"

#endif  // CARVE_CARVE_HPP_
