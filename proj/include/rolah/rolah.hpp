// Copyright 2026 The ROLAH Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Umbrella header pulling in the whole library.

#pragma once

#include "rolah/checkpoint.hpp"
#include "rolah/config.hpp"
#include "rolah/env.hpp"
#include "rolah/errors.hpp"
#include "rolah/eval.hpp"
#include "rolah/herd.hpp"
#include "rolah/parallel.hpp"
#include "rolah/policy.hpp"
#include "rolah/rng.hpp"
#include "rolah/rollout.hpp"
#include "rolah/rundir.hpp"
#include "rolah/textio.hpp"
#include "rolah/theory.hpp"
#include "rolah/trainers.hpp"
