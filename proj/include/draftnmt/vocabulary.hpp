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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace draftnmt {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<std::string>;
using IdSeq = std::vector<TokenId>;

inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kBosId = 1;
inline constexpr TokenId kEosId = 2;
inline constexpr TokenId kUnkId = 3;
inline constexpr TokenId kFirstWordId = 4;

/// Token ↔ id bijection with ids 0..3 reserved for padding, begin, end and
/// unknown. Corpus tokens get ids from 4 upward in insertion order.
class Vocabulary {
 public:
  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kBosToken = "<s>";
  static constexpr std::string_view kEosToken = "</s>";
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary();

  /// Builds from words in the given order, skipping duplicates and reserved
  /// spellings.
  static Vocabulary from_words(std::span<const std::string> words);

  /// Adds a word if new and returns its id.
  TokenId add(const std::string& word);

  std::size_t size() const noexcept { return words_.size(); }
  bool contains(std::string_view word) const;

  TokenId id(std::string_view word) const;
  const std::string& word(TokenId id) const;

  IdSeq encode(std::span<const std::string> tokens) const;
  /// Reserved ids are dropped, except unknown which prints as "<unk>".
  TokenSeq decode(std::span<const TokenId> ids) const;

  /// Non-reserved words, in id order.
  std::vector<std::string> words() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_;
  }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> ids_;
};

}  // namespace draftnmt
