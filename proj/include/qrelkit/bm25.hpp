#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qrelkit/collection.hpp"
#include "qrelkit/index.hpp"

namespace qrelkit {

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;
    /// Indexed by Field.
    std::array<double, 2> field_weights{1.0, 1.0};

    /// Throws ValidationError unless k1 >= 0 and 0 <= b <= 1.
    void validate() const;
    [[nodiscard]] double weight(Field f) const { return field_weights[static_cast<std::size_t>(f)]; }
};

/// Non-negative Lucene idf: ln(1 + (N - df + 0.5) / (df + 0.5)).
[[nodiscard]] double bm25_idf(std::size_t num_docs, std::size_t df);

/// Saturated, length-normalized term frequency: tf (k1 + 1) / (tf + k1 (1 - b + b |d| / avgdl)).
[[nodiscard]] double bm25_tf_norm(double tf, double doc_length, double avgdl, Bm25Params const& params);

/// Per-field token lists of a document that need not be in the index.
struct FieldTokens {
    std::vector<std::string> title;
    std::vector<std::string> body;

    [[nodiscard]] std::vector<std::string> const& operator[](Field f) const { return f == Field::title ? title : body; }
};

/// Sum over indexed fields and query tokens (repeats count) of
/// weight_f * idf_f(t) * tf_norm. Throws DataError for an unknown doc id.
[[nodiscard]] double bm25_score(Index const& index, Bm25Params const& params, std::span<std::string const> query,
                                std::string_view doc_id);

/// Scores an out-of-index document against frozen index statistics: tf
/// and |d| come from the supplied tokens, N, df and avgdl from the index.
[[nodiscard]] double score_synthetic(Index const& index, Bm25Params const& params, std::span<std::string const> query,
                                     FieldTokens const& doc);
/// Single-field variant of score_synthetic.
[[nodiscard]] double score_synthetic(Index const& index, Bm25Params const& params, std::span<std::string const> query,
                                     std::span<std::string const> tokens, Field field = Field::body);

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;

    bool operator==(ScoredDoc const&) const = default;
};

/// Top-k documents by score desc, doc_id asc. Every document is a
/// candidate, so k >= N returns the whole corpus.
[[nodiscard]] std::vector<ScoredDoc> search(Index const& index, Bm25Params const& params,
                                            std::span<std::string const> query, std::size_t k);
[[nodiscard]] std::vector<ScoredDoc> search(Index const& index, Bm25Params const& params, std::string_view query_text,
                                            std::size_t k);

/// Retrieves every query and returns a normalized run.
[[nodiscard]] Run search_run(Index const& index, Bm25Params const& params, QuerySet const& queries, std::size_t k,
                             std::string tag = "bm25", unsigned threads = 1);

}  // namespace qrelkit
