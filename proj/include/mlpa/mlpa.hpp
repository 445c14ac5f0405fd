// Copyright 2026 The mlpa Authors.
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

#include "mlpa/crp.hpp"
#include "mlpa/errors.hpp"
#include "mlpa/harness.hpp"
#include "mlpa/ml_chain.hpp"
#include "mlpa/pa_sim.hpp"
#include "mlpa/rng.hpp"
#include "mlpa/samplers.hpp"
#include "mlpa/special_fn.hpp"
#include "mlpa/stats.hpp"
