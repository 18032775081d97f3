// Copyright 2026 The kbembed Authors.
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

#include "kbembed/belief.hpp"
#include "kbembed/error.hpp"
#include "kbembed/evaluation.hpp"
#include "kbembed/gradient.hpp"
#include "kbembed/ids.hpp"
#include "kbembed/io.hpp"
#include "kbembed/model.hpp"
#include "kbembed/negative_sampling.hpp"
#include "kbembed/random.hpp"
#include "kbembed/report.hpp"
#include "kbembed/serialization.hpp"
#include "kbembed/tokenize.hpp"
#include "kbembed/training.hpp"
#include "kbembed/vocabulary.hpp"
