// Copyright 2026 The DQGM Authors
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

// Everything except the CLI harness, which needs OpenSSL and json.hpp.

#include "dqgm/ansatz.hpp"
#include "dqgm/circuit.hpp"
#include "dqgm/copula.hpp"
#include "dqgm/evolution.hpp"
#include "dqgm/experiments.hpp"
#include "dqgm/feature_map.hpp"
#include "dqgm/fidelity.hpp"
#include "dqgm/model.hpp"
#include "dqgm/parallel.hpp"
#include "dqgm/pauli.hpp"
#include "dqgm/qft.hpp"
#include "dqgm/rng.hpp"
#include "dqgm/sampling.hpp"
#include "dqgm/state_prep.hpp"
#include "dqgm/state_vector.hpp"
#include "dqgm/stochastics.hpp"
#include "dqgm/training.hpp"
