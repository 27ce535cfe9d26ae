#include "qrelkit/tokenizer.hpp"

#include <cstdint>

namespace qrelkit {

namespace {

constexpr char32_t kInvalid = 0xFFFFFFFF;

/// Decodes one code point at text[pos]; advances pos. Returns kInvalid for
/// malformed sequences (one byte consumed).
char32_t decode(std::string_view text, std::size_t& pos)
{
    auto byte = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
    unsigned char lead = byte(pos);
    if (lead < 0x80) {
        ++pos;
        return lead;
    }
    int extra = 0;
    char32_t cp = 0;
    if ((lead & 0xE0) == 0xC0) {
        extra = 1;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        extra = 2;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        extra = 3;
        cp = lead & 0x07;
    } else {
        ++pos;
        return kInvalid;
    }
    if (pos + static_cast<std::size_t>(extra) >= text.size()) {
        ++pos;
        return kInvalid;
    }
    for (int i = 1; i <= extra; ++i) {
        unsigned char c = byte(pos + static_cast<std::size_t>(i));
        if ((c & 0xC0) != 0x80) {
            ++pos;
            return kInvalid;
        }
        cp = (cp << 6) | (c & 0x3F);
    }
    pos += static_cast<std::size_t>(extra) + 1;
    return cp;
}

bool is_apostrophe(char32_t c) { return c == U'\'' || c == 0x2019; }

bool is_alnum(char32_t c)
{
    if (c < 0x80) {
        return (c >= U'0' && c <= U'9') || (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
    }
    if (c == kInvalid) {
        return false;
    }
    if (c <= 0xBF) {
        // Latin-1 punctuation and symbols, except the ordinal indicators and micro sign.
        return c == 0xAA || c == 0xB5 || c == 0xBA;
    }
    if (c == 0xD7 || c == 0xF7) {
        return false;
    }
    struct Range {
        char32_t lo;
        char32_t hi;
    };
    static constexpr Range separators[] = {
        {0x037E, 0x037E},   {0x0387, 0x0387},   {0x055A, 0x055F},   {0x0589, 0x058A},
        {0x05BE, 0x05BE},   {0x05C0, 0x05C0},   {0x05C3, 0x05C3},   {0x05F3, 0x05F4},
        {0x060C, 0x060D},   {0x061B, 0x061F},   {0x066A, 0x066D},   {0x06D4, 0x06D4},
        {0x0964, 0x0965},   {0x0E4F, 0x0E4F},   {0x0E5A, 0x0E5B},   {0x1680, 0x1680},
        {0x2000, 0x206F},   // general punctuation, spaces, zero-width marks
        {0x20A0, 0x20CF},   // currency
        {0x2190, 0x2BFF},   // arrows, math operators, technical, box drawing, shapes, dingbats
        {0x2E00, 0x2E7F},   // supplemental punctuation
        {0x3000, 0x3003},   {0x3008, 0x3011},   {0x3014, 0x301F},   {0xFD3E, 0xFD3F},
        {0xFE10, 0xFE1F},   {0xFE30, 0xFE4F},   {0xFE50, 0xFE6F},   {0xFEFF, 0xFEFF},
        {0xFF01, 0xFF0F},   {0xFF1A, 0xFF20},   {0xFF3B, 0xFF40},   {0xFF5B, 0xFF65},
        {0xFFF0, 0xFFFF},   {0x1F000, 0x1FAFF},  // emoji and pictographs
        {0xE0000, 0xE007F},
    };
    for (auto const& r : separators) {
        if (c >= r.lo && c <= r.hi) {
            return false;
        }
    }
    return true;
}

char32_t to_lower(char32_t c)
{
    if (c < 0x80) {
        return (c >= U'A' && c <= U'Z') ? c + 32 : c;
    }
    if ((c >= 0xC0 && c <= 0xDE && c != 0xD7)      // Latin-1
        || (c >= 0x391 && c <= 0x3AB && c != 0x3A2)  // Greek
        || (c >= 0x410 && c <= 0x42F)) {             // Cyrillic
        return c + 32;
    }
    if (c >= 0x400 && c <= 0x40F) {
        return c + 80;
    }
    if (c == 0x178) {
        return 0xFF;
    }
    if (c >= 0x100 && c <= 0x17F && c != 0x130 && c != 0x138 && c != 0x149 && c != 0x17F) {
        // Latin Extended-A alternates upper/lower, with the parity flipping at U+0139..U+0148 and U+0179..U+017E.
        bool odd_upper = (c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E);
        bool upper = odd_upper ? (c % 2 == 1) : (c % 2 == 0);
        return upper ? c + 1 : c;
    }
    return c;
}

void append_utf8(std::string& out, char32_t c)
{
    if (c < 0x80) {
        out += static_cast<char>(c);
    } else if (c < 0x800) {
        out += static_cast<char>(0xC0 | (c >> 6));
        out += static_cast<char>(0x80 | (c & 0x3F));
    } else if (c < 0x10000) {
        out += static_cast<char>(0xE0 | (c >> 12));
        out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (c & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (c >> 18));
        out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (c & 0x3F));
    }
}

/// Scans tokens and reports each through emit(token_text). When Build is
/// false no text is accumulated.
template <bool Build, typename Emit>
void scan(std::string_view text, Emit&& emit)
{
    std::string current;
    bool in_token = false;
    bool has_apostrophe = false;
    bool pending_apostrophe = false;

    auto finish = [&] {
        if (in_token) {
            emit(current);
        }
        current.clear();
        in_token = false;
        has_apostrophe = false;
        pending_apostrophe = false;
    };

    std::size_t pos = 0;
    while (pos < text.size()) {
        char32_t c = decode(text, pos);
        if (is_alnum(c)) {
            if (pending_apostrophe) {
                if constexpr (Build) {
                    current += '\'';
                }
                has_apostrophe = true;
                pending_apostrophe = false;
            }
            if constexpr (Build) {
                append_utf8(current, to_lower(c));
            }
            in_token = true;
        } else if (is_apostrophe(c) && in_token && !has_apostrophe && !pending_apostrophe) {
            pending_apostrophe = true;
        } else {
            finish();
        }
    }
    finish();
}

}  // namespace

TokenList tokenize(std::string_view text)
{
    TokenList out;
    scan<true>(text, [&](std::string const& token) { out.tokens.push_back(token); });
    return out;
}

std::size_t count_words(std::string_view text)
{
    std::size_t n = 0;
    scan<false>(text, [&](std::string const&) { ++n; });
    return n;
}

}  // namespace qrelkit
