// Copyright 2026 The spikesot Authors.
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

// The ten end-to-end acceptance checks. Shared by the acceptance binary and
// `spikesot selftest`.

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace spikesot {

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::set<int> only;  // empty: all
  std::uint64_t seed = 2026;
  std::string data_dir;  // holds sfr_base256_t3_template.csv; empty: build default
  std::function<void(const CheckResult&)> on_result;
};

std::vector<CheckResult> run_acceptance(const AcceptanceOptions& opt = {});

/// "PASS 3 neuron-conservation (0.41 s): detail"
std::string format_result(const CheckResult& r);

}  // namespace spikesot
