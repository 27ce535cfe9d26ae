#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qrelkit/collection.hpp"

namespace qrelkit {

/// Per-query values of one metric at one cutoff.
struct MetricReport {
    std::string metric_name;
    int k = 0;
    std::map<std::string, double> per_query;
    /// Arithmetic mean of per_query.
    double mean = 0.0;
    /// Pooled count ratio over all evaluated queries (hole and error rate).
    std::optional<double> micro;
    /// Queries of the run that have no judgments at all.
    std::vector<std::string> flagged;
};

/// nDCG@k with linear gain and log2(i+1) discount. Unjudged documents have
/// gain 0. Queries with IDCG 0 score 0 and stay in the mean.
[[nodiscard]] MetricReport ndcg_at_k(Run const& run, Qrels const& qrels, int k);

/// Fraction of the top-k documents that have no judgment.
[[nodiscard]] MetricReport hole_at_k(Run const& run, Qrels const& qrels, int k);

/// Fraction of top-k documents that are non-relevant (grade 0 or unjudged)
/// and whose body has fewer than min_words tokens. Throws DataError if a
/// retrieved document is missing from the corpus.
[[nodiscard]] MetricReport error_rate_at_k(Run const& run, Qrels const& qrels, Corpus const& corpus, int k,
                                           std::size_t min_words = 20);

struct LengthSummary {
    std::size_t n = 0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
};

/// Quartiles by linear interpolation between order statistics; CI of the
/// mean by normal approximation with the sample standard deviation.
[[nodiscard]] LengthSummary summarize(std::span<double const> values);

/// Body word counts of top-k documents pooled over queries.
[[nodiscard]] LengthSummary length_summary(Run const& run, Corpus const& corpus, int k);

/// Body word counts of all documents judged at least min_grade.
[[nodiscard]] LengthSummary judged_length_summary(Qrels const& qrels, Corpus const& corpus, Grade min_grade = 1);

/// Ranks with ties replaced by their mean rank (1-based).
[[nodiscard]] std::vector<double> average_ranks(std::span<double const> values);

[[nodiscard]] double pearson(std::span<double const> xs, std::span<double const> ys);

/// Spearman's rho as the Pearson correlation of average ranks. Throws
/// ValidationError on size mismatch or fewer than 2 values, and
/// UndefinedStatistic when either series is constant.
[[nodiscard]] double spearman(std::span<double const> xs, std::span<double const> ys);

struct RatingMatrix {
    struct Item {
        std::string item_id;
        /// Grade -> number of raters who chose it.
        std::map<int, int> counts;
    };
    std::vector<Item> items;
    int raters_per_item = 0;

    /// Throws ValidationError unless every item's counts sum to raters_per_item >= 2.
    void validate() const;
};

/// Fleiss' kappa. Throws UndefinedStatistic when expected agreement is 1
/// (every rating in one category).
[[nodiscard]] double fleiss_kappa(RatingMatrix const& matrix);

/// TSV rows `metric k query_id value` plus `mean` and, where defined, `micro` rows.
[[nodiscard]] std::string reports_to_tsv(std::span<MetricReport const> reports);
[[nodiscard]] std::string reports_to_json(std::span<MetricReport const> reports);
[[nodiscard]] std::string length_summary_to_json(LengthSummary const& s);

}  // namespace qrelkit
