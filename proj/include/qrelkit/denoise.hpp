#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qrelkit/bm25.hpp"
#include "qrelkit/collection.hpp"

namespace qrelkit {

/// Corpus and judgment statistics before and after denoising. Average
/// lengths are word counts; `avg_len_*` uses the body only and
/// `avg_len_*_with_title` counts title and body together.
struct DenoiseReport {
    std::size_t docs_before = 0;
    std::size_t docs_after = 0;
    double avg_len_before = 0.0;
    double avg_len_after = 0.0;
    double avg_len_before_with_title = 0.0;
    double avg_len_after_with_title = 0.0;
    std::size_t judgments_before = 0;
    std::size_t judgments_after = 0;
    std::array<std::size_t, 3> grades_before{};
    std::array<std::size_t, 3> grades_after{};
    /// Judgments dropped per grade.
    std::array<std::size_t, 3> removed{};

    [[nodiscard]] std::size_t removed_total() const { return removed[0] + removed[1] + removed[2]; }
    [[nodiscard]] std::string to_json() const;
};

/// Empties every title; ids, bodies and metadata are unchanged.
[[nodiscard]] Corpus strip_titles(Corpus const& corpus);

/// Keeps exactly the documents whose body has at least min_words tokens.
[[nodiscard]] Corpus filter_short(Corpus const& corpus, std::size_t min_words = 20, unsigned threads = 1);

/// Drops judgments whose document is not in `corpus`. The returned report
/// carries the judgment counts and the statistics of `corpus`; the
/// before-side corpus statistics are left at zero.
[[nodiscard]] std::pair<Qrels, DenoiseReport> reconcile_qrels(Qrels const& qrels, Corpus const& corpus);

struct DenoiseOptions {
    bool strip_titles = true;
    std::size_t min_words = 20;
    unsigned threads = 1;
};

struct DenoiseResult {
    Corpus corpus;
    Qrels qrels;
    DenoiseReport report;
};

/// strip_titles (optional), filter_short, reconcile_qrels, full report.
[[nodiscard]] DenoiseResult denoise(Corpus const& corpus, Qrels const& qrels, DenoiseOptions const& options = {});

/// Removes documents absent from `corpus` from every ranking and closes up
/// the ranks. Scores are kept.
[[nodiscard]] Run restrict_run(Run const& run, Corpus const& corpus);

struct SweepRow {
    std::size_t threshold = 0;
    std::string model;
    /// True for external runs, which are re-ranked by deletion rather than re-retrieved.
    bool approximate = false;
    double ndcg = 0.0;
    double hole = 0.0;
    std::size_t docs = 0;
    std::size_t judgments = 0;
};

struct SweepOptions {
    bool strip_titles = true;
    int k = 10;
    Bm25Params params;
    std::vector<Field> fields{Field::title, Field::body};
    /// Externally produced runs evaluated by deletion and rank closure.
    std::vector<Run const*> external_runs;
    unsigned threads = 1;
};

/// For each threshold: denoise, rebuild the built-in BM25 index, retrieve,
/// and evaluate nDCG@k against the reconciled judgments. Thresholds must be
/// ascending.
[[nodiscard]] std::vector<SweepRow> threshold_sweep(Corpus const& corpus, QuerySet const& queries, Qrels const& qrels,
                                                    std::vector<std::size_t> const& thresholds,
                                                    SweepOptions const& options = {});

[[nodiscard]] std::string sweep_to_tsv(std::vector<SweepRow> const& rows);
[[nodiscard]] std::string sweep_to_json(std::vector<SweepRow> const& rows);

}  // namespace qrelkit
