#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qrelkit/bm25.hpp"
#include "qrelkit/collection.hpp"
#include "qrelkit/similarity.hpp"
#include "qrelkit/string_hash.hpp"

namespace qrelkit {

enum class Axiom { tfc1, tfc3, m_tdc, lnc1, tf_lnc, lnc2, stmc1, stmc2 };

inline constexpr std::array<Axiom, 8> kAllAxioms{Axiom::tfc1,   Axiom::tfc3, Axiom::m_tdc, Axiom::lnc1,
                                                 Axiom::tf_lnc, Axiom::lnc2, Axiom::stmc1, Axiom::stmc2};

[[nodiscard]] std::string_view axiom_name(Axiom a);
/// Accepts the display names (TFC1, M-TDC, TF-LNC, ...) case-insensitively.
[[nodiscard]] Axiom parse_axiom(std::string_view name);

enum class Preference { first, second, none };

[[nodiscard]] constexpr Preference flip(Preference p) noexcept
{
    return p == Preference::first ? Preference::second : p == Preference::second ? Preference::first : p;
}

/// Tokenized document as seen by the axioms: per-field tokens, the combined
/// token sequence, and its term frequencies.
struct AxiomDoc {
    std::string doc_id;
    /// Number of self-concatenated copies (1 for a real document).
    int copies = 1;
    /// Raw text as given to a model (title and body joined when the title is included).
    std::string text;
    FieldTokens fields;
    std::vector<std::string> tokens;
    StringMap<int> tf;

    [[nodiscard]] std::size_t length() const noexcept { return tokens.size(); }
    [[nodiscard]] int tf_of(std::string_view term) const;

    /// Title tokens are included only when include_title is set.
    static AxiomDoc from_document(Document const& doc, bool include_title);
    static AxiomDoc from_tokens(std::string doc_id, std::vector<std::string> tokens);
    /// m copies of this document, field by field.
    [[nodiscard]] AxiomDoc concatenated(int m) const;
};

struct DocPair {
    std::string query_id;
    std::vector<std::string> query;
    std::shared_ptr<AxiomDoc const> d1;
    std::shared_ptr<AxiomDoc const> d2;
    /// Concatenation factor for synthetic LNC2 pairs (d1 = m copies of d2); 0 for real pairs.
    int m = 0;

    [[nodiscard]] bool synthetic() const noexcept { return m > 0; }
    [[nodiscard]] DocPair swapped() const;
};

/// Collection statistics for idf.
class TermStats {
  public:
    TermStats() = default;
    TermStats(std::size_t num_docs, StringMap<std::size_t> df) : num_docs_(num_docs), df_(std::move(df)) {}

    /// Document frequencies over the axiom token view of a corpus.
    static TermStats from_corpus(Corpus const& corpus, bool include_title, unsigned threads = 1);

    [[nodiscard]] std::size_t num_docs() const noexcept { return num_docs_; }
    [[nodiscard]] std::size_t df(std::string_view term) const;
    /// Same idf as the built-in BM25.
    [[nodiscard]] double idf(std::string_view term) const;

  private:
    std::size_t num_docs_ = 0;
    StringMap<std::size_t> df_;
};

/// Two lengths (or idf values) count as equal within 10% of the larger.
[[nodiscard]] bool relaxed_equal(double a, double b, double tolerance = 0.1);

/// Returns m >= 2 if `longer` is exactly m back-to-back copies of `shorter`, else 0.
[[nodiscard]] int concatenation_factor(std::span<std::string const> longer, std::span<std::string const> shorter);

/// The axiom's preference for the pair. Throws ValidationError for the
/// STMC axioms when no similarity provider is given.
[[nodiscard]] Preference axiom_preference(Axiom axiom, DocPair const& pair, TermStats const& stats,
                                          SimilarityProvider const* similarity = nullptr);

// ---------------------------------------------------------------------------
// Pair generation

struct Lnc2Options {
    std::size_t sample_size = 250;
    std::vector<int> ms{1, 2, 3, 4};
    std::size_t top_k = 10;
    std::uint64_t seed = 42;
    bool include_title = true;
};

struct Lnc2Sample {
    std::vector<DocPair> pairs;
    /// Distinct (query, doc) pairs in the union of all runs' top-k.
    std::size_t available = 0;
    std::size_t sampled = 0;
    /// Set when fewer than sample_size pairs were available.
    bool truncated = false;
};

/// Samples (query, doc) pairs uniformly without replacement from the union
/// of all runs' top-k and emits one synthetic pair per m: (m copies, original).
[[nodiscard]] Lnc2Sample lnc2_pairs(std::span<Run const* const> runs, Corpus const& corpus, QuerySet const& queries,
                                    Lnc2Options const& options = {});

/// All unordered pairs within each query's top-k, d1 the higher-ranked.
[[nodiscard]] std::vector<DocPair> real_pairs(Run const& run, Corpus const& corpus, QuerySet const& queries,
                                              std::size_t k = 50, bool include_title = true);

// ---------------------------------------------------------------------------
// Agreement

/// A model observed through its ranking; only usable on real pairs.
struct RankingModel {
    std::string name;
    Run const* run = nullptr;
};

/// A model that scores arbitrary (query, document) combinations. Returns
/// nullopt when it has no score for the document.
struct ScoringModel {
    std::string name;
    std::function<std::optional<double>(DocPair const& pair, AxiomDoc const& doc)> score;
};

/// Built-in BM25 over frozen index statistics.
[[nodiscard]] ScoringModel bm25_model(Index const& index, Bm25Params params, std::string name = "bm25");

/// Scores from a TSV `query_id doc_id copies score` file, e.g. produced by
/// an external model over exported synthetic documents.
[[nodiscard]] ScoringModel score_table_model(std::filesystem::path const& path, std::string name);
[[nodiscard]] ScoringModel score_table_model_text(std::string_view text, std::string name,
                                                  std::string const& origin = "<memory>");

struct AxiomReportRow {
    Axiom axiom = Axiom::tfc1;
    std::string model;
    std::size_t examined = 0;
    std::size_t applicable = 0;
    std::size_t agreements = 0;
    /// Pairs with a preference the model could not order (missing rank or
    /// score, or a synthetic document under a ranking); not in applicable.
    std::size_t skipped = 0;

    [[nodiscard]] double pct() const
    {
        return applicable == 0 ? 0.0 : 100.0 * static_cast<double>(agreements) / static_cast<double>(applicable);
    }
};

/// Real pairs: the pair is applicable iff the axiom states a strict
/// preference, and the model agrees iff its rank order matches.
[[nodiscard]] AxiomReportRow agreement(RankingModel const& model, std::span<DocPair const> pairs, Axiom axiom,
                                       TermStats const& stats, SimilarityProvider const* similarity = nullptr);

/// Scorer agreement. For LNC2 on synthetic pairs every pair is applicable
/// and ties count as agreement (the concatenation must not score lower);
/// otherwise the strict score order must match the axiom's preference.
[[nodiscard]] AxiomReportRow agreement(ScoringModel const& model, std::span<DocPair const> pairs, Axiom axiom,
                                       TermStats const& stats, SimilarityProvider const* similarity = nullptr);

[[nodiscard]] std::string axiom_report_tsv(std::span<AxiomReportRow const> rows);
[[nodiscard]] std::string axiom_report_json(std::span<AxiomReportRow const> rows);

/// JSONL `{"query_id", "doc_id", "copies", "text"}` of every distinct
/// document in the pairs, for scoring by external models.
[[nodiscard]] std::string export_pair_documents(std::span<DocPair const> pairs);

}  // namespace qrelkit
