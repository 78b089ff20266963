// Copyright 2026 The qwalk Authors
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

#include <qwalk/analysis.hpp>
#include <qwalk/ensemble.hpp>
#include <qwalk/errors.hpp>
#include <qwalk/imperfections.hpp>
#include <qwalk/mesh.hpp>
#include <qwalk/rng.hpp>
#include <qwalk/serialize.hpp>
#include <qwalk/sweep.hpp>
#include <qwalk/walk_programs.hpp>
