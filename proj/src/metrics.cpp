#include "qrelkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <unordered_map>

#include <json.hpp>

#include "qrelkit/error.hpp"
#include "qrelkit/tokenizer.hpp"

namespace qrelkit {

namespace {

void check_k(int k)
{
    if (k < 1) {
        throw ValidationError("cutoff k must be >= 1");
    }
}

std::size_t cutoff(Run::Ranking const& ranking, int k)
{
    return std::min(ranking.size(), static_cast<std::size_t>(k));
}

void finish_mean(MetricReport& report)
{
    double sum = 0.0;
    for (auto const& [qid, v] : report.per_query) {
        sum += v;
    }
    report.mean = report.per_query.empty() ? 0.0 : sum / static_cast<double>(report.per_query.size());
}

double discount(std::size_t position) { return 1.0 / std::log2(static_cast<double>(position) + 2.0); }

/// Counts top-k documents satisfying pred; returns the per-query fraction
/// report with pooled micro average.
template <typename Pred>
MetricReport fraction_report(std::string name, Run const& run, int k, Qrels const& qrels, Pred pred)
{
    check_k(k);
    MetricReport report;
    report.metric_name = std::move(name);
    report.k = k;
    std::size_t hits = 0;
    std::size_t considered = 0;
    for (auto const& [qid, ranking] : run.rankings()) {
        std::size_t n = cutoff(ranking, k);
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (pred(qid, ranking[i])) {
                ++count;
            }
        }
        report.per_query[qid] = n == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(n);
        hits += count;
        considered += n;
        if (qrels.for_query(qid) == nullptr) {
            report.flagged.push_back(qid);
        }
    }
    finish_mean(report);
    report.micro = considered == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(considered);
    return report;
}

}  // namespace

MetricReport ndcg_at_k(Run const& run, Qrels const& qrels, int k)
{
    check_k(k);
    MetricReport report;
    report.metric_name = "ndcg";
    report.k = k;
    for (auto const& [qid, ranking] : run.rankings()) {
        auto const* judged = qrels.for_query(qid);
        if (judged == nullptr) {
            report.flagged.push_back(qid);
            report.per_query[qid] = 0.0;
            continue;
        }
        double dcg = 0.0;
        std::size_t n = cutoff(ranking, k);
        for (std::size_t i = 0; i < n; ++i) {
            auto it = judged->find(ranking[i].doc_id);
            if (it != judged->end()) {
                dcg += it->second * discount(i);
            }
        }
        std::vector<Grade> ideal;
        ideal.reserve(judged->size());
        for (auto const& [did, g] : *judged) {
            ideal.push_back(g);
        }
        std::sort(ideal.begin(), ideal.end(), std::greater<>());
        double idcg = 0.0;
        for (std::size_t i = 0; i < std::min(ideal.size(), static_cast<std::size_t>(k)); ++i) {
            idcg += ideal[i] * discount(i);
        }
        report.per_query[qid] = idcg > 0.0 ? dcg / idcg : 0.0;
    }
    finish_mean(report);
    return report;
}

MetricReport hole_at_k(Run const& run, Qrels const& qrels, int k)
{
    return fraction_report("hole", run, k, qrels, [&](std::string const& qid, RankedDoc const& doc) {
        return !qrels.contains(qid, doc.doc_id);
    });
}

MetricReport error_rate_at_k(Run const& run, Qrels const& qrels, Corpus const& corpus, int k, std::size_t min_words)
{
    std::unordered_map<std::string_view, std::size_t> words;
    return fraction_report("error_rate", run, k, qrels, [&](std::string const& qid, RankedDoc const& doc) {
        auto grade = qrels.grade(qid, doc.doc_id);
        if (grade && *grade > 0) {
            return false;
        }
        auto cached = words.find(doc.doc_id);
        if (cached == words.end()) {
            auto const* d = corpus.find(doc.doc_id);
            if (d == nullptr) {
                throw DataError("retrieved document '" + doc.doc_id + "' (query " + qid + ") not in corpus");
            }
            cached = words.emplace(d->doc_id, count_words(d->body)).first;
        }
        return cached->second < min_words;
    });
}

// ---------------------------------------------------------------------------

LengthSummary summarize(std::span<double const> values)
{
    if (values.empty()) {
        throw ValidationError("cannot summarize an empty sample");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double p) {
        double pos = p * static_cast<double>(sorted.size() - 1);
        auto lo = static_cast<std::size_t>(std::floor(pos));
        auto hi = std::min(lo + 1, sorted.size() - 1);
        double frac = pos - static_cast<double>(lo);
        return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
    };
    LengthSummary s;
    s.n = sorted.size();
    s.q1 = quantile(0.25);
    s.median = quantile(0.5);
    s.q3 = quantile(0.75);
    double n = static_cast<double>(s.n);
    s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : sorted) {
            ss += (v - s.mean) * (v - s.mean);
        }
        s.sd = std::sqrt(ss / (n - 1.0));
    }
    double half = 1.96 * s.sd / std::sqrt(n);
    s.ci95_low = s.mean - half;
    s.ci95_high = s.mean + half;
    return s;
}

LengthSummary length_summary(Run const& run, Corpus const& corpus, int k)
{
    check_k(k);
    std::vector<double> lengths;
    for (auto const& [qid, ranking] : run.rankings()) {
        for (std::size_t i = 0; i < cutoff(ranking, k); ++i) {
            auto const* doc = corpus.find(ranking[i].doc_id);
            if (doc == nullptr) {
                throw DataError("retrieved document '" + ranking[i].doc_id + "' not in corpus");
            }
            lengths.push_back(static_cast<double>(count_words(doc->body)));
        }
    }
    if (lengths.empty()) {
        throw DataError("run '" + run.tag() + "' retrieves no documents");
    }
    return summarize(lengths);
}

LengthSummary judged_length_summary(Qrels const& qrels, Corpus const& corpus, Grade min_grade)
{
    std::vector<double> lengths;
    for (auto const& [qid, docs] : qrels.by_query()) {
        for (auto const& [did, g] : docs) {
            if (g < min_grade) {
                continue;
            }
            if (auto const* doc = corpus.find(did)) {
                lengths.push_back(static_cast<double>(count_words(doc->body)));
            }
        }
    }
    if (lengths.empty()) {
        throw DataError("no judged documents at the requested grade are in the corpus");
    }
    return summarize(lengths);
}

// ---------------------------------------------------------------------------

std::vector<double> average_ranks(std::span<double const> values)
{
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && values[order[j]] == values[order[i]]) {
            ++j;
        }
        // Positions i..j-1 share the mean of ranks i+1..j.
        double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) {
            ranks[order[t]] = rank;
        }
        i = j;
    }
    return ranks;
}

double pearson(std::span<double const> xs, std::span<double const> ys)
{
    if (xs.size() != ys.size()) {
        throw ValidationError("series lengths differ");
    }
    if (xs.size() < 2) {
        throw ValidationError("correlation needs at least 2 observations");
    }
    double n = static_cast<double>(xs.size());
    double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw UndefinedStatistic("correlation undefined: a series has zero variance");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<double const> xs, std::span<double const> ys)
{
    if (xs.size() != ys.size()) {
        throw ValidationError("series lengths differ");
    }
    auto rx = average_ranks(xs);
    auto ry = average_ranks(ys);
    return pearson(rx, ry);
}

void RatingMatrix::validate() const
{
    if (raters_per_item < 2) {
        throw ValidationError("Fleiss' kappa needs at least 2 raters per item");
    }
    for (auto const& item : items) {
        int total = 0;
        for (auto const& [grade, count] : item.counts) {
            if (count < 0) {
                throw ValidationError("negative count for item '" + item.item_id + "'");
            }
            total += count;
        }
        if (total != raters_per_item) {
            throw ValidationError("item '" + item.item_id + "' has " + std::to_string(total) + " ratings, expected "
                                  + std::to_string(raters_per_item));
        }
    }
}

double fleiss_kappa(RatingMatrix const& matrix)
{
    matrix.validate();
    if (matrix.items.size() < 2) {
        throw ValidationError("Fleiss' kappa needs at least 2 items");
    }
    double n = matrix.raters_per_item;
    double items = static_cast<double>(matrix.items.size());
    std::map<int, double> category_totals;
    double p_bar = 0.0;
    for (auto const& item : matrix.items) {
        double agree = 0.0;
        for (auto const& [grade, count] : item.counts) {
            agree += static_cast<double>(count) * (count - 1);
            category_totals[grade] += count;
        }
        p_bar += agree / (n * (n - 1.0));
    }
    p_bar /= items;
    double pe_bar = 0.0;
    std::size_t used = 0;
    for (auto const& [grade, total] : category_totals) {
        double p = total / (items * n);
        pe_bar += p * p;
        used += total > 0 ? 1 : 0;
    }
    if (used <= 1) {
        throw UndefinedStatistic("Fleiss' kappa undefined: all ratings fall in one category");
    }
    return (p_bar - pe_bar) / (1.0 - pe_bar);
}

// ---------------------------------------------------------------------------

std::string reports_to_tsv(std::span<MetricReport const> reports)
{
    std::string out = "metric\tk\tquery_id\tvalue\n";
    auto row = [&](MetricReport const& r, std::string const& qid, double v) {
        out += r.metric_name + '\t' + std::to_string(r.k) + '\t' + qid + '\t' + format_double(v) + '\n';
    };
    for (auto const& r : reports) {
        for (auto const& [qid, v] : r.per_query) {
            row(r, qid, v);
        }
        row(r, "mean", r.mean);
        if (r.micro) {
            row(r, "micro", *r.micro);
        }
    }
    return out;
}

std::string reports_to_json(std::span<MetricReport const> reports)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (auto const& r : reports) {
        nlohmann::ordered_json obj;
        obj["metric"] = r.metric_name;
        obj["k"] = r.k;
        obj["mean"] = r.mean;
        if (r.micro) {
            obj["micro"] = *r.micro;
        }
        obj["per_query"] = nlohmann::ordered_json::object();
        for (auto const& [qid, v] : r.per_query) {
            obj["per_query"][qid] = v;
        }
        obj["flagged_unjudged_queries"] = r.flagged;
        arr.push_back(std::move(obj));
    }
    return arr.dump(2) + '\n';
}

std::string length_summary_to_json(LengthSummary const& s)
{
    nlohmann::ordered_json obj;
    obj["n"] = s.n;
    obj["median"] = s.median;
    obj["q1"] = s.q1;
    obj["q3"] = s.q3;
    obj["mean"] = s.mean;
    obj["sd"] = s.sd;
    obj["ci95_low"] = s.ci95_low;
    obj["ci95_high"] = s.ci95_high;
    return obj.dump(2) + '\n';
}

}  // namespace qrelkit
