//
// Copyright 2026 The dplr Authors
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

// Umbrella header for the dplr library.

#ifndef DPLR_DPLR_HPP_
#define DPLR_DPLR_HPP_

#include "dplr/baselines.hpp"
#include "dplr/conditions.hpp"
#include "dplr/csv.hpp"
#include "dplr/dataset.hpp"
#include "dplr/dpgd.hpp"
#include "dplr/errors.hpp"
#include "dplr/experiment_config.hpp"
#include "dplr/experiments.hpp"
#include "dplr/intervals.hpp"
#include "dplr/privacy.hpp"
#include "dplr/result_table.hpp"
#include "dplr/rng.hpp"
#include "dplr/student_t.hpp"

#endif  // DPLR_DPLR_HPP_
