// Copyright 2026 The instgame Authors
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

#pragma once

#include "instgame/agents.hpp"
#include "instgame/analysis.hpp"
#include "instgame/driver.hpp"
#include "instgame/error.hpp"
#include "instgame/event_log.hpp"
#include "instgame/feature_space.hpp"
#include "instgame/game_core.hpp"
#include "instgame/matchmaking.hpp"
#include "instgame/platform.hpp"
#include "instgame/rational.hpp"
#include "instgame/records.hpp"
#include "instgame/rng.hpp"
