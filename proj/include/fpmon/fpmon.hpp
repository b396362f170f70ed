// Copyright 2026 The fpmon Authors.
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

#include "fpmon/bench.hpp"
#include "fpmon/core.hpp"
#include "fpmon/diagnostics.hpp"
#include "fpmon/hardgen.hpp"
#include "fpmon/harness.hpp"
#include "fpmon/monitor.hpp"
#include "fpmon/params.hpp"
#include "fpmon/random.hpp"
#include "fpmon/reductions.hpp"
#include "fpmon/sampling.hpp"
#include "fpmon/streams.hpp"
#include "fpmon/threshold.hpp"
