#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace qrelkit {

struct TokenList {
    std::vector<std::string> tokens;

    [[nodiscard]] std::size_t word_count() const noexcept { return tokens.size(); }
    bool operator==(TokenList const&) const = default;
};

/// Splits UTF-8 text into lowercase word tokens.
///
/// A token is a maximal run of alphanumeric code points that may contain a
/// single apostrophe (' or U+2019) between two alphanumerics; the curly form
/// is emitted as '. Every other code point separates tokens. Letters outside
/// ASCII count as alphanumeric unless they fall in a punctuation, symbol,
/// space or emoji block. Malformed UTF-8 bytes act as separators.
[[nodiscard]] TokenList tokenize(std::string_view text);

/// Same count as tokenize(text).word_count() without materializing tokens.
[[nodiscard]] std::size_t count_words(std::string_view text);

}  // namespace qrelkit
