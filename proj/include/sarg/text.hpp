#pragma once

#include <string>
#include <string_view>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "sarg/util.hpp"

namespace sarg {

// NFC-normalize and lowercase (root locale) a UTF-8 string. Invalid byte
// sequences are replaced by U+FFFD, matching ICU's converter behavior.
inline std::string nfc_lower(std::string_view utf8) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    icu::UnicodeString us =
        icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int>(utf8.size())));
    if (nfc != nullptr && U_SUCCESS(status)) {
        icu::UnicodeString normalized = nfc->normalize(us, status);
        if (U_SUCCESS(status)) us = normalized;
    }
    us.toLower(icu::Locale::getRoot());
    std::string out;
    us.toUTF8String(out);
    return out;
}

// Canonicalization used for concept-node identity: lowercase, NFC, whitespace
// collapsed, trimmed, terminal punctuation (.,;:) stripped.
inline std::string canonical_key(std::string_view label) {
    std::string s = collapse_whitespace(nfc_lower(label));
    s = trim(s);
    while (!s.empty()) {
        char last = s.back();
        if (last == '.' || last == ',' || last == ';' || last == ':') {
            s.pop_back();
        } else if (is_ascii_space(last)) {
            s.pop_back();
        } else {
            break;
        }
    }
    return s;
}

// Strips leading/trailing ASCII punctuation from a token ("overheated?" ->
// "overheated"). Interior punctuation is preserved.
inline std::string strip_token_punct(std::string_view token) {
    std::size_t b = 0, e = token.size();
    auto is_punct = [](unsigned char c) { return std::ispunct(c) != 0; };
    while (b < e && is_punct(static_cast<unsigned char>(token[b]))) ++b;
    while (e > b && is_punct(static_cast<unsigned char>(token[e - 1]))) --e;
    return std::string(token.substr(b, e - b));
}

} // namespace sarg
