/*
 * Copyright (c) 2026 the tango authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tango/counters.hpp"

namespace tango {

const char* to_string(OpCategory c) {
  switch (c) {
    case OpCategory::add: return "add";
    case OpCategory::mul: return "mul";
    case OpCategory::mad: return "mad";
    case OpCategory::max_cmp: return "max_cmp";
    case OpCategory::div: return "div";
    case OpCategory::exp_tanh: return "exp_tanh";
    case OpCategory::load: return "load";
    case OpCategory::store: return "store";
  }
  return "?";
}

}  // namespace tango
