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

#include "draftnmt/vocabulary.hpp"

#include "draftnmt/errors.hpp"

namespace draftnmt {

Vocabulary::Vocabulary() {
  for (std::string_view w : {kPadToken, kBosToken, kEosToken, kUnkToken}) {
    ids_.emplace(std::string(w), static_cast<TokenId>(words_.size()));
    words_.emplace_back(w);
  }
}

Vocabulary Vocabulary::from_words(std::span<const std::string> words) {
  Vocabulary v;
  for (const auto& w : words) v.add(w);
  return v;
}

TokenId Vocabulary::add(const std::string& word) {
  if (auto it = ids_.find(word); it != ids_.end()) return it->second;
  const auto id = static_cast<TokenId>(words_.size());
  ids_.emplace(word, id);
  words_.push_back(word);
  return id;
}

bool Vocabulary::contains(std::string_view word) const {
  return ids_.find(std::string(word)) != ids_.end();
}

TokenId Vocabulary::id(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::word(TokenId id) const {
  if (id >= words_.size()) {
    throw Error(ErrorClass::kRange, "token id " + std::to_string(id) + " outside vocabulary of " +
                                        std::to_string(words_.size()));
  }
  return words_[id];
}

IdSeq Vocabulary::encode(std::span<const std::string> tokens) const {
  IdSeq out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

TokenSeq Vocabulary::decode(std::span<const TokenId> ids) const {
  TokenSeq out;
  out.reserve(ids.size());
  for (TokenId id : ids) {
    if (id == kUnkId || id >= kFirstWordId) out.push_back(word(id));
  }
  return out;
}

std::vector<std::string> Vocabulary::words() const {
  return {words_.begin() + kFirstWordId, words_.end()};
}

}  // namespace draftnmt
