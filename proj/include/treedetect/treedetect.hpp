/*
 * Copyright 2026 The treedetect Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.

*/
#pragma once

#include <treedetect/channel.hpp>
#include <treedetect/config.hpp>
#include <treedetect/constellation.hpp>
#include <treedetect/csv.hpp>
#include <treedetect/detection_tree.hpp>
#include <treedetect/detectors.hpp>
#include <treedetect/errors.hpp>
#include <treedetect/linalg.hpp>
#include <treedetect/montecarlo.hpp>
#include <treedetect/verify.hpp>
