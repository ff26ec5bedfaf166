// Copyright 2026 The mfgc Authors
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

#ifndef MFGC_EXECUTION_HPP_
#define MFGC_EXECUTION_HPP_

namespace mfgc {

// kSerial is the reference path; kParallel distributes independent work
// items with OpenMP and must produce identical results.
enum class ExecutionPolicy { kSerial, kParallel };

// Number of OpenMP threads available to kParallel (1 without OpenMP).
int max_threads();
// Sets the OpenMP thread count; values < 1 are ignored.
void set_threads(int threads);

}  // namespace mfgc

#endif  // MFGC_EXECUTION_HPP_
