#pragma once

#include <compare>
#include <string>

namespace qonto {

/// Chapter-and-verse address ("sura:aya").
struct VerseRef {
  int sura = 0;
  int aya = 0;

  friend auto operator<=>(const VerseRef&, const VerseRef&) = default;

  std::string str() const { return std::to_string(sura) + ":" + std::to_string(aya); }
};

struct Verse {
  int sura = 0;
  int aya = 0;
  std::string text;

  VerseRef ref() const { return {sura, aya}; }

  friend bool operator==(const Verse&, const Verse&) = default;
};

inline constexpr int kMaxSura = 114;

}  // namespace qonto
