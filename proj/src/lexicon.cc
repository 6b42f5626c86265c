// src/lexicon.cc

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

#include "arcall/lexicon.h"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "arcall/error.h"

namespace arcall {

namespace {

struct PhonemeInfo {
  std::string_view symbol;
  PhonemeCategory category;
};

using enum PhonemeCategory;

constexpr std::array<PhonemeInfo, kPhonemeCount> kPhonemes = {{
    {"SIL", kSilence},
    {"AE", kShortVowel}, {"AA", kShortVowel}, {"AH", kShortVowel},
    {"UH", kShortVowel}, {"UX", kShortVowel}, {"IH", kShortVowel},
    {"IX", kShortVowel},
    {"AE:", kLongVowel}, {"AA:", kLongVowel}, {"AH:", kLongVowel},
    {"UW", kLongVowel}, {"IY", kLongVowel}, {"IX:", kLongVowel},
    {"DH2", kEmphatic}, {"TT", kEmphatic}, {"DD", kEmphatic}, {"SS", kEmphatic},
    {"F", kFricative}, {"TH", kFricative}, {"DH", kFricative},
    {"S", kFricative}, {"Z", kFricative}, {"SH", kFricative},
    {"KH", kFricative}, {"GH", kFricative}, {"AI", kFricative},
    {"HH", kFricative}, {"H", kFricative},
    {"B", kOcclusive}, {"T", kOcclusive}, {"D", kOcclusive},
    {"JH", kOcclusive}, {"K", kOcclusive}, {"Q", kOcclusive},
    {"E", kOcclusive},
    {"M", kNasal}, {"N", kNasal},
    {"R", kLiquid}, {"L", kLiquid},
    {"W", kSemivowel}, {"Y", kSemivowel}, {"AW", kSemivowel},
    {"AY", kSemivowel},
}};

// ---------------------------------------------------------------------------
// G2P

enum class Vowel { kNone, kFatha, kDamma, kKasra };

// Vowel coloring depends only on the immediately preceding consonant.
enum class Color { kPlain, kHeavyAh, kHeavyAa };

Color color_after(Phoneme consonant) {
  switch (consonant) {
    case Phoneme::TT:
    case Phoneme::DD:
    case Phoneme::SS:
    case Phoneme::DH2:
    case Phoneme::KH:
    case Phoneme::GH:
      return Color::kHeavyAh;
    case Phoneme::R:
    case Phoneme::Q:
      return Color::kHeavyAa;
    default:
      return Color::kPlain;
  }
}

Phoneme vowel_phoneme(Vowel v, Color c, bool is_long) {
  const bool heavy = c != Color::kPlain;
  switch (v) {
    case Vowel::kFatha:
      if (c == Color::kHeavyAa) return is_long ? Phoneme::AA_L : Phoneme::AA;
      if (c == Color::kHeavyAh) return is_long ? Phoneme::AH_L : Phoneme::AH;
      return is_long ? Phoneme::AE_L : Phoneme::AE;
    case Vowel::kDamma:
      if (is_long) return Phoneme::UW;
      return heavy ? Phoneme::UX : Phoneme::UH;
    case Vowel::kKasra:
      if (is_long) return heavy ? Phoneme::IX_L : Phoneme::IY;
      return heavy ? Phoneme::IX : Phoneme::IH;
    case Vowel::kNone:
      break;
  }
  throw Error(ErrorCode::kInvalidArgument, "no vowel to realize");
}

constexpr char32_t kHamza = U'ء';
constexpr char32_t kAlifMadda = U'آ';
constexpr char32_t kAlifHamzaAbove = U'أ';
constexpr char32_t kWawHamza = U'ؤ';
constexpr char32_t kAlifHamzaBelow = U'إ';
constexpr char32_t kYehHamza = U'ئ';
constexpr char32_t kAlif = U'ا';
constexpr char32_t kTehMarbuta = U'ة';
constexpr char32_t kLam = U'ل';
constexpr char32_t kWaw = U'و';
constexpr char32_t kAlifMaksura = U'ى';
constexpr char32_t kYeh = U'ي';
constexpr char32_t kTatweel = U'ـ';

constexpr char32_t kFathatan = U'ً';
constexpr char32_t kDammatan = U'ٌ';
constexpr char32_t kKasratan = U'ٍ';
constexpr char32_t kFatha = U'َ';
constexpr char32_t kDamma = U'ُ';
constexpr char32_t kKasra = U'ِ';
constexpr char32_t kShadda = U'ّ';
constexpr char32_t kSukun = U'ْ';
constexpr char32_t kMaddahAbove = U'ٓ';
constexpr char32_t kHamzaAbove = U'ٔ';
constexpr char32_t kHamzaBelow = U'ٕ';
constexpr char32_t kDaggerAlif = U'ٰ';

std::optional<Phoneme> consonant_of(char32_t c) {
  switch (c) {
    case kHamza: case kAlifHamzaAbove: case kAlifHamzaBelow: case kAlif:
      return Phoneme::E;
    case kWawHamza: return Phoneme::AW;
    case kYehHamza: return Phoneme::AY;
    case U'ب': return Phoneme::B;
    case kTehMarbuta: return Phoneme::T;
    case U'ت': return Phoneme::T;
    case U'ث': return Phoneme::TH;
    case U'ج': return Phoneme::JH;
    case U'ح': return Phoneme::HH;
    case U'خ': return Phoneme::KH;
    case U'د': return Phoneme::D;
    case U'ذ': return Phoneme::DH;
    case U'ر': return Phoneme::R;
    case U'ز': return Phoneme::Z;
    case U'س': return Phoneme::S;
    case U'ش': return Phoneme::SH;
    case U'ص': return Phoneme::SS;
    case U'ض': return Phoneme::DD;
    case U'ط': return Phoneme::TT;
    case U'ظ': return Phoneme::DH2;
    case U'ع': return Phoneme::AI;
    case U'غ': return Phoneme::GH;
    case U'ف': return Phoneme::F;
    case U'ق': return Phoneme::Q;
    case U'ك': return Phoneme::K;
    case kLam: return Phoneme::L;
    case U'م': return Phoneme::M;
    case U'ن': return Phoneme::N;
    case U'ه': return Phoneme::H;
    case kWaw: return Phoneme::W;
    case kYeh: return Phoneme::Y;
    default: return std::nullopt;
  }
}

bool is_letter(char32_t c) {
  return consonant_of(c).has_value() || c == kAlifMadda || c == kAlifMaksura;
}

bool is_mark(char32_t c) {
  return (c >= kFathatan && c <= kHamzaBelow) || c == kDaggerAlif;
}

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int extra = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      extra = 1;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      extra = 2;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      extra = 3;
    } else {
      throw Error(ErrorCode::kUnknownCharacter, "invalid UTF-8");
    }
    for (int k = 1; k <= extra; ++k) {
      if (i + k >= s.size())
        throw Error(ErrorCode::kUnknownCharacter, "truncated UTF-8");
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) throw Error(ErrorCode::kUnknownCharacter, "invalid UTF-8");
      cp = (cp << 6) | (b & 0x3F);
    }
    out.push_back(cp);
    i += std::size_t(extra) + 1;
  }
  return out;
}

std::string hex(char32_t c) {
  std::ostringstream os;
  os << "U+" << std::uppercase << std::hex << std::uint32_t(c);
  return os.str();
}

struct LetterUnit {
  char32_t letter;
  std::size_t begin;
  std::size_t end;
  Vowel vowel = Vowel::kNone;
  bool tanwin = false;
  bool shadda = false;
  bool sukun = false;
  bool dagger_alif = false;

  bool vocalized() const { return vowel != Vowel::kNone || shadda || sukun; }
};

std::vector<LetterUnit> segment_letters(const std::u32string& text) {
  std::vector<LetterUnit> units;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char32_t c = text[i];
    if (c == kTatweel) {
      if (!units.empty()) units.back().end = i + 1;
      continue;
    }
    if (is_letter(c)) {
      units.push_back(LetterUnit{c, i, i + 1});
      continue;
    }
    if (!is_mark(c))
      throw Error(ErrorCode::kUnknownCharacter,
                  hex(c) + " at position " + std::to_string(i) + " is not Arabic");
    if (units.empty())
      throw Error(ErrorCode::kUnknownCharacter,
                  "diacritic " + hex(c) + " with no base letter");
    auto& u = units.back();
    u.end = i + 1;
    auto set_vowel = [&](Vowel v, bool tanwin) {
      if (u.vowel != Vowel::kNone)
        throw Error(ErrorCode::kUnknownCharacter,
                    "two vowel marks on one letter at position " + std::to_string(u.begin));
      u.vowel = v;
      u.tanwin = tanwin;
    };
    switch (c) {
      case kFatha: set_vowel(Vowel::kFatha, false); break;
      case kDamma: set_vowel(Vowel::kDamma, false); break;
      case kKasra: set_vowel(Vowel::kKasra, false); break;
      case kFathatan: set_vowel(Vowel::kFatha, true); break;
      case kDammatan: set_vowel(Vowel::kDamma, true); break;
      case kKasratan: set_vowel(Vowel::kKasra, true); break;
      case kShadda: u.shadda = true; break;
      case kSukun: u.sukun = true; break;
      case kDaggerAlif: u.dagger_alif = true; break;
      case kMaddahAbove:
        if (u.letter == kAlif) u.letter = kAlifMadda;
        break;
      case kHamzaAbove:
        if (u.letter == kAlif) u.letter = kAlifHamzaAbove;
        else if (u.letter == kWaw) u.letter = kWawHamza;
        else if (u.letter == kYeh || u.letter == kAlifMaksura) u.letter = kYehHamza;
        break;
      case kHamzaBelow:
        if (u.letter == kAlif) u.letter = kAlifHamzaBelow;
        break;
      default:
        break;
    }
  }
  return units;
}

class Transducer {
 public:
  explicit Transducer(std::vector<LetterUnit> units) : units_(std::move(units)) {}

  std::vector<PhonemeSpan> run() {
    for (i_ = 0; i_ < units_.size(); ++i_) step(units_[i_]);
    return std::move(out_);
  }

 private:
  void emit(Phoneme p, const LetterUnit& u) {
    out_.push_back(PhonemeSpan{p, u.begin, u.end});
  }

  // Replaces the trailing short vowel with its long counterpart.
  void lengthen(const LetterUnit& madd) {
    auto& back = out_.back();
    back.phoneme = vowel_phoneme(last_vowel_, last_color_, true);
    back.grapheme_end = madd.end;
    last_vowel_ = Vowel::kNone;
    after_madd_ = true;
  }

  void fail_unvocalized(const LetterUnit& u) const {
    throw Error(ErrorCode::kUnvocalizedConsonant,
                "letter " + hex(u.letter) + " at position " + std::to_string(u.begin) +
                    " carries no vowel, sukun or shadda");
  }

  void step(const LetterUnit& u) {
    const bool bare = !u.vocalized();
    const bool was_tanwin_fatha = after_tanwin_fatha_;
    const bool was_madd = after_madd_;
    after_tanwin_fatha_ = false;
    after_madd_ = false;

    if ((u.letter == kAlif || u.letter == kAlifMaksura) && bare) {
      if (last_vowel_ == Vowel::kFatha) {
        lengthen(u);
      } else if (was_tanwin_fatha || was_madd) {
        // Silent orthographic alif.
        if (!out_.empty()) out_.back().grapheme_end = u.end;
      } else if (i_ == 0 && u.letter == kAlif) {
        // Word-initial hamzat al-wasl: /a/ before the article, /i/ otherwise.
        emit(Phoneme::E, u);
        const bool article = units_.size() > 1 && units_[1].letter == kLam;
        emit(article ? Phoneme::AE : Phoneme::IH, u);
        last_vowel_ = Vowel::kNone;
      } else {
        fail_unvocalized(u);
      }
      return;
    }

    if (u.letter == kAlifMadda) {
      emit(Phoneme::E, u);
      emit(Phoneme::AE_L, u);
      last_vowel_ = Vowel::kNone;
      return;
    }

    if ((u.letter == kWaw || u.letter == kYeh) && !u.shadda && u.vowel == Vowel::kNone) {
      const Vowel match = u.letter == kWaw ? Vowel::kDamma : Vowel::kKasra;
      if (last_vowel_ == match) {
        lengthen(u);
        return;
      }
    }

    // Sun-letter assimilation of the article: the bare lam is silent when the
    // next letter is doubled.
    if (u.letter == kLam && bare && i_ == 1 && units_[0].letter == kAlif &&
        !units_[0].vocalized()) {
      if (i_ + 1 < units_.size() && units_[i_ + 1].shadda) {
        last_vowel_ = Vowel::kNone;
        return;
      }
      emit(Phoneme::L, u);
      last_vowel_ = Vowel::kNone;
      return;
    }

    if (u.letter == kTehMarbuta && bare && i_ + 1 == units_.size()) {
      emit(Phoneme::H, u);
      last_vowel_ = Vowel::kNone;
      return;
    }

    const auto consonant = consonant_of(u.letter);
    if (!consonant) fail_unvocalized(u);
    if (bare && !u.dagger_alif) fail_unvocalized(u);

    emit(*consonant, u);
    if (u.shadda) emit(*consonant, u);
    last_vowel_ = Vowel::kNone;

    const Color color = color_after(*consonant);
    if (u.dagger_alif && (u.vowel == Vowel::kFatha || u.vowel == Vowel::kNone)) {
      emit(vowel_phoneme(Vowel::kFatha, color, true), u);
      return;
    }
    if (u.vowel != Vowel::kNone) {
      emit(vowel_phoneme(u.vowel, color, false), u);
      if (u.tanwin) {
        emit(Phoneme::N, u);
        after_tanwin_fatha_ = u.vowel == Vowel::kFatha;
      } else {
        last_vowel_ = u.vowel;
        last_color_ = color;
      }
    }
  }

  std::vector<LetterUnit> units_;
  std::size_t i_ = 0;
  std::vector<PhonemeSpan> out_;
  Vowel last_vowel_ = Vowel::kNone;
  Color last_color_ = Color::kPlain;
  bool after_tanwin_fatha_ = false;
  bool after_madd_ = false;
};

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::string_view symbol(Phoneme p) { return kPhonemes.at(index_of(p)).symbol; }

std::optional<Phoneme> parse_phoneme(std::string_view sym) {
  for (std::size_t i = 0; i < kPhonemes.size(); ++i)
    if (kPhonemes[i].symbol == sym) return static_cast<Phoneme>(i);
  return std::nullopt;
}

PhonemeCategory category(Phoneme p) { return kPhonemes.at(index_of(p)).category; }

std::string_view category_name(PhonemeCategory c) {
  switch (c) {
    case kSilence: return "Silence";
    case kShortVowel: return "ShortVowel";
    case kLongVowel: return "LongVowel";
    case kEmphatic: return "Emphatic";
    case kFricative: return "Fricative";
    case kOcclusive: return "Occlusive";
    case kNasal: return "Nasal";
    case kLiquid: return "Liquid";
    case kSemivowel: return "Semivowel";
  }
  return "?";
}

bool is_vowel(Phoneme p) {
  const auto c = category(p);
  return c == kShortVowel || c == kLongVowel;
}

bool is_long_vowel(Phoneme p) { return category(p) == kLongVowel; }

std::string to_string(const PhonemeSequence& phonemes) {
  std::string out;
  for (std::size_t i = 0; i < phonemes.size(); ++i) {
    if (i) out += ' ';
    out += symbol(phonemes[i]);
  }
  return out;
}

PhonemeSequence parse_phoneme_list(std::string_view text) {
  PhonemeSequence out;
  for (auto tok : split_ws(text)) {
    auto p = parse_phoneme(tok);
    if (!p)
      throw Error(ErrorCode::kUnknownPhonemeSymbol,
                  "'" + std::string(tok) + "' is not in the phoneme inventory");
    out.push_back(*p);
  }
  return out;
}

PhonemeInventory::PhonemeInventory() {
  for (std::size_t i = 0; i < kPhonemes.size(); ++i)
    entries_.push_back(Entry{static_cast<Phoneme>(i), kPhonemes[i].category});
}

const PhonemeInventory& PhonemeInventory::standard() {
  static const PhonemeInventory inventory;
  return inventory;
}

std::vector<PhonemeSpan> phonetize_with_spans(std::string_view word) {
  const auto text = decode_utf8(word);
  auto units = segment_letters(text);
  if (units.empty()) throw Error(ErrorCode::kInvalidArgument, "empty word");
  return Transducer(std::move(units)).run();
}

PhonemeSequence phonetize(std::string_view word) {
  PhonemeSequence out;
  for (const auto& span : phonetize_with_spans(word)) out.push_back(span.phoneme);
  return out;
}

bool looks_arabic(std::string_view text) {
  try {
    for (char32_t c : decode_utf8(text))
      if (c >= 0x0600 && c <= 0x06FF) return true;
  } catch (const Error&) {
  }
  return false;
}

// ---------------------------------------------------------------------------
// Lexicon

Lexicon::Lexicon(std::vector<PronunciationEntry> entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.variant_index < b.variant_index;
  });
  for (auto& e : entries) {
    if (e.phonemes.empty())
      throw Error(ErrorCode::kInvalidArgument, "empty pronunciation for " + e.word);
    auto& variants = words_[e.word];
    const auto n = std::size_t(e.variant_index);
    if (e.variant_index < 1 || n <= variants.size())
      throw Error(ErrorCode::kDuplicateVariant,
                  e.word + "(" + std::to_string(e.variant_index) + ") is repeated");
    if (n != variants.size() + 1)
      throw Error(ErrorCode::kDuplicateVariant,
                  e.word + "(" + std::to_string(e.variant_index) +
                      ") has no preceding variant " + std::to_string(variants.size() + 1));
    variants.push_back(std::move(e.phonemes));
  }
}

void Lexicon::add(const std::string& word, PhonemeSequence phonemes) {
  if (phonemes.empty())
    throw Error(ErrorCode::kInvalidArgument, "empty pronunciation for " + word);
  auto& variants = words_[word];
  if (std::find(variants.begin(), variants.end(), phonemes) == variants.end())
    variants.push_back(std::move(phonemes));
}

const std::vector<PhonemeSequence>* Lexicon::lookup(std::string_view word) const {
  auto it = words_.find(word);
  return it == words_.end() ? nullptr : &it->second;
}

std::vector<PronunciationEntry> Lexicon::entries() const {
  std::vector<PronunciationEntry> out;
  for (const auto& [word, variants] : words_)
    for (std::size_t v = 0; v < variants.size(); ++v)
      out.push_back(PronunciationEntry{word, int(v + 1), variants[v]});
  return out;
}

std::vector<std::string> Lexicon::words() const {
  std::vector<std::string> out;
  for (const auto& kv : words_) out.push_back(kv.first);
  return out;
}

Lexicon parse_dictionary(std::string_view text) {
  std::vector<PronunciationEntry> entries;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                   : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    const auto where = " (line " + std::to_string(line_no) + ")";
    auto tokens = split_ws(line);
    if (tokens.size() < 2)
      throw Error(ErrorCode::kInvalidArgument, "entry has no phonemes" + where);

    std::string_view head = tokens[0];
    int variant = 1;
    if (head.back() == ')') {
      const auto open = head.rfind('(');
      if (open == std::string_view::npos || open == 0)
        throw Error(ErrorCode::kInvalidArgument, "malformed variant marker" + where);
      const auto digits = head.substr(open + 1, head.size() - open - 2);
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), variant);
      if (ec != std::errc() || p != digits.data() + digits.size() || variant < 2)
        throw Error(ErrorCode::kInvalidArgument,
                    "variant marker must be (n) with n >= 2" + where);
      head = head.substr(0, open);
    }

    PronunciationEntry entry{std::string(head), variant, {}};
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      auto p = parse_phoneme(tokens[i]);
      if (!p)
        throw Error(ErrorCode::kUnknownPhonemeSymbol,
                    "'" + std::string(tokens[i]) + "'" + where);
      entry.phonemes.push_back(*p);
    }
    entries.push_back(std::move(entry));
  }
  return Lexicon(std::move(entries));
}

std::string write_dictionary(const Lexicon& lexicon) {
  std::string out;
  for (const auto& e : lexicon.entries()) {
    out += e.word;
    if (e.variant_index > 1) out += "(" + std::to_string(e.variant_index) + ")";
    out += ' ';
    out += to_string(e.phonemes);
    out += '\n';
  }
  return out;
}

Lexicon build_dictionary(const std::vector<std::string>& words) {
  if (words.empty()) throw Error(ErrorCode::kInvalidArgument, "no words to phonetize");
  Lexicon lexicon;
  for (const auto& w : words) {
    try {
      lexicon.add(w, phonetize(w));
    } catch (const Error& e) {
      throw Error(e.code(), "while phonetizing '" + w + "': " + e.what());
    }
  }
  return lexicon;
}

}  // namespace arcall
