/*
 * Copyright 2026 The draftnmt Authors.
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

#include "test_support.hpp"

#include <random>

namespace draftnmt::testing {

IdSeq random_ids(std::mt19937_64& rng, std::size_t length, std::size_t vocab) {
  std::uniform_int_distribution<TokenId> word(kFirstWordId, static_cast<TokenId>(vocab - 1));
  IdSeq out(length);
  for (auto& id : out) id = word(rng);
  return out;
}

}  // namespace draftnmt::testing
