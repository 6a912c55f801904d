// Copyright 2026 The SBC Authors
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

#ifndef SBC_SBC_HPP
#define SBC_SBC_HPP

#include <sbc/artifact_io.hpp>
#include <sbc/config.hpp>
#include <sbc/error.hpp>
#include <sbc/ess.hpp>
#include <sbc/model.hpp>
#include <sbc/models.hpp>
#include <sbc/random.hpp>
#include <sbc/rank_stats.hpp>
#include <sbc/report.hpp>
#include <sbc/runner.hpp>
#include <sbc/samplers.hpp>

#endif
