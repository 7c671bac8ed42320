/*
 * Copyright 2026 The dngd Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <functional>
#include <string>
#include <vector>

namespace dngd::exp {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct CheckInfo {
  std::string name;
  std::string description;
};

// Oracle and property checks on small instances; each takes well under a
// second.
std::vector<CheckInfo> list_checks();

// Runs every check, reporting each as it finishes. A check that throws is
// reported as failed with the exception text.
std::vector<CheckResult> run_checks(const std::function<void(const CheckResult&)>& report = {});

}  // namespace dngd::exp
