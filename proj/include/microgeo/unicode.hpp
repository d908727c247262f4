#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "microgeo/error.hpp"

namespace microgeo::unicode {

inline bool is_ascii(std::string_view s) noexcept {
    for (unsigned char c : s) {
        if (c >= 0x80) return false;
    }
    return true;
}

/// Canonical composition (NFC), optionally with full case folding applied in between.
inline std::string normalize(std::string_view text, bool casefold) {
    if (is_ascii(text)) {
        std::string out(text);
        if (casefold) {
            for (auto& c : out) {
                if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            }
        }
        return out;
    }

    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw Error(std::string("ICU NFC unavailable: ") + u_errorName(status));

    icu::UnicodeString u = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    u = nfc->normalize(u, status);
    if (casefold) {
        // Folding can decompose (e.g. U+0130), so recompose afterwards.
        u.foldCase(U_FOLD_CASE_DEFAULT);
        u = nfc->normalize(u, status);
    }
    if (U_FAILURE(status)) throw Error(std::string("ICU normalization failed: ") + u_errorName(status));
    std::string out;
    u.toUTF8String(out);
    return out;
}

/// Letters, digits, and combining marks belong to a word; everything else separates words.
inline bool is_word_char(UChar32 c) noexcept {
    if (c < 0x80) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
    }
    const auto mask = U_GET_GC_MASK(c);
    return (mask & (U_GC_L_MASK | U_GC_M_MASK | U_GC_ND_MASK)) != 0;
}

/// Code point ending just before byte offset `pos`, or -1 at the start.
inline UChar32 code_point_before(std::string_view s, std::size_t pos) noexcept {
    if (pos == 0) return -1;
    const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
    int32_t i = static_cast<int32_t>(pos);
    UChar32 c;
    U8_PREV(bytes, 0, i, c);
    return c;
}

/// Code point starting at byte offset `pos`, or -1 at the end.
inline UChar32 code_point_at(std::string_view s, std::size_t pos) noexcept {
    if (pos >= s.size()) return -1;
    const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
    int32_t i = static_cast<int32_t>(pos);
    UChar32 c;
    U8_NEXT(bytes, i, static_cast<int32_t>(s.size()), c);
    return c;
}

inline std::size_t code_point_count(std::string_view s) noexcept {
    std::size_t n = 0;
    for (unsigned char c : s) {
        if ((c & 0xC0) != 0x80) ++n;
    }
    return n;
}

}  // namespace microgeo::unicode
