//
// Copyright 2026 The edPLS Authors
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

// Umbrella header.
#pragma once

#include "edpls/attack.hpp"
#include "edpls/datagen.hpp"
#include "edpls/dataset.hpp"
#include "edpls/error.hpp"
#include "edpls/eval.hpp"
#include "edpls/io.hpp"
#include "edpls/linalg.hpp"
#include "edpls/mechanism.hpp"
#include "edpls/pls.hpp"
#include "edpls/preprocess.hpp"
#include "edpls/privacy.hpp"
#include "edpls/random.hpp"
#include "edpls/types.hpp"
