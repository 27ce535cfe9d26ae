#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qrelkit/collection.hpp"

namespace qrelkit {

/// Generated queries per document, in file order.
using ExpansionFile = std::map<std::string, std::vector<std::string>, std::less<>>;
/// Replacement summary per document.
using SummaryFile = std::map<std::string, std::string, std::less<>>;

/// JSONL `{"_id": ..., "queries": [...]}`; duplicate ids are errors.
[[nodiscard]] ExpansionFile parse_expansions(std::filesystem::path const& path);
[[nodiscard]] ExpansionFile parse_expansions_text(std::string_view text, std::string const& origin = "<memory>");

/// JSONL `{"_id": ..., "summary": ...}`; summaries must be non-empty.
[[nodiscard]] SummaryFile parse_summaries(std::filesystem::path const& path);
[[nodiscard]] SummaryFile parse_summaries_text(std::string_view text, std::string const& origin = "<memory>");

/// Appends each listed document's generated queries to its body, separated
/// by single spaces, verbatim and without deduplication. Titles are kept.
/// Throws DataError for ids not in the corpus.
[[nodiscard]] Corpus apply_expansions(Corpus const& corpus, ExpansionFile const& expansions);

/// Replaces each listed document's body with its summary; titles are kept.
[[nodiscard]] Corpus apply_summaries(Corpus const& corpus, SummaryFile const& summaries);

}  // namespace qrelkit
