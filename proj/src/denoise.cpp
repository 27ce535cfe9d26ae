#include "qrelkit/denoise.hpp"

#include <algorithm>

#include <json.hpp>

#include "qrelkit/error.hpp"
#include "qrelkit/metrics.hpp"
#include "qrelkit/parallel.hpp"
#include "qrelkit/tokenizer.hpp"

namespace qrelkit {

namespace {

struct LengthStats {
    double body = 0.0;
    double with_title = 0.0;
};

LengthStats average_lengths(Corpus const& corpus, unsigned threads)
{
    std::vector<std::size_t> body(corpus.size());
    std::vector<std::size_t> title(corpus.size());
    parallel_for(corpus.size(), threads, [&](std::size_t i) {
        body[i] = count_words(corpus[i].body);
        title[i] = count_words(corpus[i].title);
    });
    LengthStats s;
    if (corpus.empty()) {
        return s;
    }
    double sum_body = 0.0;
    double sum_title = 0.0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        sum_body += static_cast<double>(body[i]);
        sum_title += static_cast<double>(title[i]);
    }
    auto n = static_cast<double>(corpus.size());
    s.body = sum_body / n;
    s.with_title = (sum_body + sum_title) / n;
    return s;
}

}  // namespace

std::string DenoiseReport::to_json() const
{
    nlohmann::ordered_json obj;
    obj["docs_before"] = docs_before;
    obj["docs_after"] = docs_after;
    obj["avg_len_before"] = avg_len_before;
    obj["avg_len_after"] = avg_len_after;
    obj["avg_len_before_with_title"] = avg_len_before_with_title;
    obj["avg_len_after_with_title"] = avg_len_after_with_title;
    obj["judgments_before"] = judgments_before;
    obj["judgments_after"] = judgments_after;
    for (int g = 2; g >= 0; --g) {
        auto key = "grade_" + std::to_string(g);
        auto idx = static_cast<std::size_t>(g);
        obj[key] = {{"before", grades_before[idx]}, {"after", grades_after[idx]}, {"removed", removed[idx]}};
    }
    return obj.dump(2) + '\n';
}

Corpus strip_titles(Corpus const& corpus)
{
    Corpus out;
    out.reserve(corpus.size());
    for (auto doc : corpus) {
        doc.title.clear();
        out.add(std::move(doc));
    }
    return out;
}

Corpus filter_short(Corpus const& corpus, std::size_t min_words, unsigned threads)
{
    std::vector<char> keep(corpus.size());
    parallel_for(corpus.size(), threads, [&](std::size_t i) { keep[i] = count_words(corpus[i].body) >= min_words; });
    Corpus out;
    out.reserve(static_cast<std::size_t>(std::count(keep.begin(), keep.end(), 1)));
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (keep[i]) {
            out.add(corpus[i]);
        }
    }
    return out;
}

std::pair<Qrels, DenoiseReport> reconcile_qrels(Qrels const& qrels, Corpus const& corpus)
{
    Qrels kept;
    DenoiseReport report;
    report.judgments_before = qrels.size();
    report.grades_before = qrels.grade_counts();
    for (auto const& [qid, docs] : qrels.by_query()) {
        for (auto const& [did, grade] : docs) {
            if (corpus.contains(did)) {
                kept.add(qid, did, grade);
            } else {
                ++report.removed[static_cast<std::size_t>(grade)];
            }
        }
    }
    report.judgments_after = kept.size();
    report.grades_after = kept.grade_counts();
    report.docs_after = corpus.size();
    auto lengths = average_lengths(corpus, 1);
    report.avg_len_after = lengths.body;
    report.avg_len_after_with_title = lengths.with_title;
    return {std::move(kept), report};
}

DenoiseResult denoise(Corpus const& corpus, Qrels const& qrels, DenoiseOptions const& options)
{
    DenoiseResult result;
    result.corpus = filter_short(options.strip_titles ? strip_titles(corpus) : corpus, options.min_words,
                                 options.threads);
    auto [kept, report] = reconcile_qrels(qrels, result.corpus);
    auto before = average_lengths(corpus, options.threads);
    report.docs_before = corpus.size();
    report.avg_len_before = before.body;
    report.avg_len_before_with_title = before.with_title;
    result.qrels = std::move(kept);
    result.report = report;
    return result;
}

Run restrict_run(Run const& run, Corpus const& corpus)
{
    Run out(run.tag());
    for (auto const& [qid, ranking] : run.rankings()) {
        std::vector<std::pair<std::string, double>> scored;
        for (auto const& r : ranking) {
            if (corpus.contains(r.doc_id)) {
                scored.emplace_back(r.doc_id, r.score);
            }
        }
        out.set_ranking(qid, std::move(scored));
    }
    return out;
}

std::vector<SweepRow> threshold_sweep(Corpus const& corpus, QuerySet const& queries, Qrels const& qrels,
                                      std::vector<std::size_t> const& thresholds, SweepOptions const& options)
{
    if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
        throw ValidationError("sweep thresholds must be ascending");
    }
    options.params.validate();
    Corpus base = options.strip_titles ? strip_titles(corpus) : corpus;
    std::vector<SweepRow> rows;
    for (auto n : thresholds) {
        Corpus filtered = filter_short(base, n, options.threads);
        auto [judged, report] = reconcile_qrels(qrels, filtered);
        auto index = build_index(filtered, options.fields, options.threads);
        auto run = search_run(index, options.params, queries, static_cast<std::size_t>(options.k), "bm25",
                              options.threads);
        SweepRow row;
        row.threshold = n;
        row.model = "bm25";
        row.ndcg = ndcg_at_k(run, judged, options.k).mean;
        row.hole = *hole_at_k(run, judged, options.k).micro;
        row.docs = filtered.size();
        row.judgments = judged.size();
        rows.push_back(row);
        for (auto const* external : options.external_runs) {
            auto restricted = restrict_run(*external, filtered);
            SweepRow ext = row;
            ext.model = external->tag();
            ext.approximate = true;
            ext.ndcg = ndcg_at_k(restricted, judged, options.k).mean;
            ext.hole = *hole_at_k(restricted, judged, options.k).micro;
            rows.push_back(ext);
        }
    }
    return rows;
}

std::string sweep_to_tsv(std::vector<SweepRow> const& rows)
{
    std::string out = "threshold\tmodel\tndcg\thole\tdocs\tjudgments\tapproximate\n";
    for (auto const& r : rows) {
        out += std::to_string(r.threshold) + '\t' + r.model + '\t' + format_double(r.ndcg) + '\t'
               + format_double(r.hole) + '\t' + std::to_string(r.docs) + '\t' + std::to_string(r.judgments) + '\t'
               + (r.approximate ? "yes" : "no") + '\n';
    }
    return out;
}

std::string sweep_to_json(std::vector<SweepRow> const& rows)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (auto const& r : rows) {
        arr.push_back({{"threshold", r.threshold},
                       {"model", r.model},
                       {"ndcg", r.ndcg},
                       {"hole", r.hole},
                       {"docs", r.docs},
                       {"judgments", r.judgments},
                       {"approximate", r.approximate}});
    }
    return arr.dump(2) + '\n';
}

}  // namespace qrelkit
