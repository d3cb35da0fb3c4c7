// Copyright 2026 The miplgp Authors. All Rights Reserved.
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

#include "miplgp/baselines.hpp"
#include "miplgp/data_model.hpp"
#include "miplgp/dataset_io.hpp"
#include "miplgp/disambiguation.hpp"
#include "miplgp/errors.hpp"
#include "miplgp/evaluation.hpp"
#include "miplgp/gp_regression.hpp"
#include "miplgp/kernel.hpp"
#include "miplgp/model.hpp"
#include "miplgp/model_io.hpp"
#include "miplgp/parallel.hpp"
#include "miplgp/predictor.hpp"
#include "miplgp/synthesis.hpp"
#include "miplgp/trainer.hpp"

namespace miplgp {

inline constexpr char kVersion[] = "0.1.0";

}  // namespace miplgp
