#include "qrelkit/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "qrelkit/error.hpp"
#include "qrelkit/parallel.hpp"
#include "qrelkit/tokenizer.hpp"

namespace qrelkit {

void Bm25Params::validate() const
{
    if (!(k1 >= 0.0) || !std::isfinite(k1)) {
        throw ValidationError("k1 must be >= 0");
    }
    if (!(b >= 0.0 && b <= 1.0)) {
        throw ValidationError("b must lie in [0, 1]");
    }
    for (double w : field_weights) {
        if (!std::isfinite(w)) {
            throw ValidationError("field weights must be finite");
        }
    }
}

double bm25_idf(std::size_t num_docs, std::size_t df)
{
    auto n = static_cast<double>(num_docs);
    auto d = static_cast<double>(df);
    return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double bm25_tf_norm(double tf, double doc_length, double avgdl, Bm25Params const& params)
{
    if (tf <= 0.0) {
        return 0.0;
    }
    double norm = avgdl > 0.0 ? doc_length / avgdl : 0.0;
    return tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * norm));
}

namespace {

// Every scoring path accumulates weight * idf * tf_norm per (field, query
// token) in the same order, so search and bm25_score agree bit for bit.
double term_contribution(Index const& index, Bm25Params const& params, Field f, FieldIndex const& field,
                         std::string_view term, double tf, double length)
{
    double idf = bm25_idf(index.num_docs(), field.df(term));
    return params.weight(f) * idf * bm25_tf_norm(tf, length, field.avgdl(), params);
}

}  // namespace

double bm25_score(Index const& index, Bm25Params const& params, std::span<std::string const> query,
                  std::string_view doc_id)
{
    auto doc = index.find(doc_id);
    if (!doc) {
        throw DataError("unknown document '" + std::string(doc_id) + "'");
    }
    double score = 0.0;
    for (Field f : index.fields()) {
        auto const& field = index.field(f);
        double length = field.length(*doc);
        for (auto const& term : query) {
            auto tf = field.tf(term, *doc);
            if (tf > 0) {
                score += term_contribution(index, params, f, field, term, tf, length);
            }
        }
    }
    return score;
}

double score_synthetic(Index const& index, Bm25Params const& params, std::span<std::string const> query,
                       FieldTokens const& doc)
{
    double score = 0.0;
    for (Field f : index.fields()) {
        auto const& field = index.field(f);
        auto const& tokens = doc[f];
        std::unordered_map<std::string_view, std::uint32_t> tf;
        for (auto const& t : tokens) {
            ++tf[t];
        }
        double length = static_cast<double>(tokens.size());
        for (auto const& term : query) {
            auto it = tf.find(term);
            if (it != tf.end()) {
                score += term_contribution(index, params, f, field, term, it->second, length);
            }
        }
    }
    return score;
}

double score_synthetic(Index const& index, Bm25Params const& params, std::span<std::string const> query,
                       std::span<std::string const> tokens, Field field)
{
    FieldTokens doc;
    (field == Field::title ? doc.title : doc.body).assign(tokens.begin(), tokens.end());
    if (!index.has_field(field)) {
        throw ValidationError("field '" + std::string(field_name(field)) + "' is not indexed");
    }
    return score_synthetic(index, params, query, doc);
}

std::vector<ScoredDoc> search(Index const& index, Bm25Params const& params, std::span<std::string const> query,
                              std::size_t k)
{
    if (k == 0) {
        throw ValidationError("k must be >= 1");
    }
    std::vector<double> acc(index.num_docs(), 0.0);
    for (Field f : index.fields()) {
        auto const& field = index.field(f);
        for (auto const& term : query) {
            auto const* list = field.postings(term);
            if (list == nullptr) {
                continue;
            }
            for (auto const& p : *list) {
                acc[p.doc] += term_contribution(index, params, f, field, term, p.tf, field.length(p.doc));
            }
        }
    }
    std::vector<DocIndex> order(index.num_docs());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = static_cast<DocIndex>(i);
    }
    auto better = [&](DocIndex a, DocIndex b) {
        if (acc[a] != acc[b]) {
            return acc[a] > acc[b];
        }
        return index.doc_id(a) < index.doc_id(b);
    };
    std::size_t n = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(), better);
    std::vector<ScoredDoc> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({index.doc_id(order[i]), acc[order[i]]});
    }
    return out;
}

std::vector<ScoredDoc> search(Index const& index, Bm25Params const& params, std::string_view query_text, std::size_t k)
{
    auto tokens = tokenize(query_text).tokens;
    return search(index, params, tokens, k);
}

Run search_run(Index const& index, Bm25Params const& params, QuerySet const& queries, std::size_t k, std::string tag,
               unsigned threads)
{
    params.validate();
    std::vector<std::vector<ScoredDoc>> results(queries.size());
    parallel_for(queries.size(), threads, [&](std::size_t i) { results[i] = search(index, params, queries[i].text, k); });
    Run run(std::move(tag));
    for (std::size_t i = 0; i < queries.size(); ++i) {
        std::vector<std::pair<std::string, double>> scored;
        scored.reserve(results[i].size());
        for (auto& r : results[i]) {
            scored.emplace_back(std::move(r.doc_id), r.score);
        }
        run.set_ranking(queries[i].query_id, std::move(scored));
    }
    return run;
}

}  // namespace qrelkit
