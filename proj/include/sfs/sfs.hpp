/*
 * Copyright 2026 The sfsel Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include "sfs/bench.hpp"
#include "sfs/csv.hpp"
#include "sfs/error.hpp"
#include "sfs/eventlog.hpp"
#include "sfs/feature_io.hpp"
#include "sfs/features.hpp"
#include "sfs/gbm.hpp"
#include "sfs/kmeans.hpp"
#include "sfs/label_io.hpp"
#include "sfs/lasso.hpp"
#include "sfs/metrics.hpp"
#include "sfs/mutual_information.hpp"
#include "sfs/rng.hpp"
#include "sfs/selection.hpp"
#include "sfs/selection_io.hpp"
#include "sfs/timeutil.hpp"
