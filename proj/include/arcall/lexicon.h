// arcall/lexicon.h

// Copyright 2026  The arcall Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef ARCALL_LEXICON_H_
#define ARCALL_LEXICON_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace arcall {

// The 44-symbol Arabic inventory, SIL first. Long vowels AE:, AA:, AH:, IX:
// are spelled with a trailing colon in text form.
enum class Phoneme : std::uint8_t {
  SIL,
  AE, AA, AH, UH, UX, IH, IX,
  AE_L, AA_L, AH_L, UW, IY, IX_L,
  DH2, TT, DD, SS,
  F, TH, DH, S, Z, SH, KH, GH, AI, HH, H,
  B, T, D, JH, K, Q, E,
  M, N,
  R, L,
  W, Y, AW, AY,
};

inline constexpr std::size_t kPhonemeCount = 44;

enum class PhonemeCategory : std::uint8_t {
  kSilence,
  kShortVowel,
  kLongVowel,
  kEmphatic,
  kFricative,
  kOcclusive,
  kNasal,
  kLiquid,
  kSemivowel,
};

using PhonemeSequence = std::vector<Phoneme>;

inline std::size_t index_of(Phoneme p) { return static_cast<std::size_t>(p); }

std::string_view symbol(Phoneme p);
std::optional<Phoneme> parse_phoneme(std::string_view symbol);
PhonemeCategory category(Phoneme p);
std::string_view category_name(PhonemeCategory c);

bool is_vowel(Phoneme p);
bool is_long_vowel(Phoneme p);

// Space-separated symbols.
std::string to_string(const PhonemeSequence& phonemes);
// Throws kUnknownPhonemeSymbol on any token outside the inventory.
PhonemeSequence parse_phoneme_list(std::string_view text);

class PhonemeInventory {
 public:
  struct Entry {
    Phoneme id;
    PhonemeCategory category;
  };

  static const PhonemeInventory& standard();

  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool contains(Phoneme p) const { return index_of(p) < entries_.size(); }

 private:
  PhonemeInventory();
  std::vector<Entry> entries_;
};

// Which letters (in Unicode code points of the input word) produced each
// phoneme; used to highlight faulty letters.
struct PhonemeSpan {
  Phoneme phoneme;
  std::size_t grapheme_begin;  // code-point offset, inclusive
  std::size_t grapheme_end;    // exclusive
};

// Rule-based G2P for fully diacritized Arabic. Throws kUnvocalizedConsonant
// or kUnknownCharacter.
PhonemeSequence phonetize(std::string_view word);
std::vector<PhonemeSpan> phonetize_with_spans(std::string_view word);

// True if the text contains at least one Arabic letter.
bool looks_arabic(std::string_view text);

struct PronunciationEntry {
  std::string word;
  int variant_index = 1;
  PhonemeSequence phonemes;

  bool operator==(const PronunciationEntry&) const = default;
};

// Canonical container: words in byte-lexicographic order, variants 1..k.
class Lexicon {
 public:
  Lexicon() = default;

  // Throws kDuplicateVariant on a repeated (word, variant) or an orphan
  // variant (n >= 2 without variant 1).
  explicit Lexicon(std::vector<PronunciationEntry> entries);

  void add(const std::string& word, PhonemeSequence phonemes);

  const std::vector<PhonemeSequence>* lookup(std::string_view word) const;
  std::vector<PronunciationEntry> entries() const;
  std::vector<std::string> words() const;
  std::size_t word_count() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  bool operator==(const Lexicon&) const = default;

 private:
  std::map<std::string, std::vector<PhonemeSequence>, std::less<>> words_;
};

Lexicon parse_dictionary(std::string_view text);
std::string write_dictionary(const Lexicon& lexicon);
Lexicon build_dictionary(const std::vector<std::string>& words);

}  // namespace arcall

#endif  // ARCALL_LEXICON_H_
