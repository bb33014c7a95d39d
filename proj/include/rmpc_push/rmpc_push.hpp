// Copyright 2026 The rmpc_push Authors
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

#ifndef RMPC_PUSH_RMPC_PUSH_HPP_
#define RMPC_PUSH_RMPC_PUSH_HPP_

#include "rmpc_push/config.hpp"
#include "rmpc_push/core.hpp"
#include "rmpc_push/eval.hpp"
#include "rmpc_push/physics.hpp"
#include "rmpc_push/planners.hpp"
#include "rmpc_push/random.hpp"
#include "rmpc_push/reward.hpp"
#include "rmpc_push/rmp.hpp"
#include "rmpc_push/scene_io.hpp"
#include "rmpc_push/scenegen.hpp"

#endif  // RMPC_PUSH_RMPC_PUSH_HPP_
