// Copyright 2026 The tabmark Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "tabmark/analysis.hpp"
#include "tabmark/attacks.hpp"
#include "tabmark/detect.hpp"
#include "tabmark/embed.hpp"
#include "tabmark/error.hpp"
#include "tabmark/eval.hpp"
#include "tabmark/matching.hpp"
#include "tabmark/partition.hpp"
#include "tabmark/rng.hpp"
#include "tabmark/stats.hpp"
#include "tabmark/synth.hpp"
#include "tabmark/tabular.hpp"
