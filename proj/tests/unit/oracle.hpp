#pragma once

// Reference implementations written independently of the library code
// paths they check.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "qrelkit/collection.hpp"
#include "qrelkit/tokenizer.hpp"

namespace qrelkit::oracle {

/// Plain BM25 recomputed from raw text for every field.
inline double bm25(Corpus const& corpus, std::string const& query, std::string const& doc_id, double k1, double b,
                   bool title, bool body)
{
    auto q = tokenize(query).tokens;
    double total = 0.0;
    for (int f = 0; f < 2; ++f) {
        if ((f == 0 && !title) || (f == 1 && !body)) {
            continue;
        }
        auto text = [&](Document const& d) { return f == 0 ? d.title : d.body; };
        double n = static_cast<double>(corpus.size());
        double sum_len = 0;
        std::map<std::string, double> df;
        for (auto const& d : corpus) {
            auto toks = tokenize(text(d)).tokens;
            sum_len += static_cast<double>(toks.size());
            std::sort(toks.begin(), toks.end());
            toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
            for (auto const& t : toks) {
                df[t] += 1;
            }
        }
        double avgdl = sum_len / n;
        auto doc = tokenize(text(*corpus.find(doc_id))).tokens;
        double len = static_cast<double>(doc.size());
        for (auto const& t : q) {
            double tf = static_cast<double>(std::count(doc.begin(), doc.end(), t));
            if (tf == 0 || avgdl == 0) {
                continue;
            }
            double idf = std::log(1 + (n - df[t] + 0.5) / (df[t] + 0.5));
            total += idf * tf * (k1 + 1) / (tf + k1 * (1 - b + b * len / avgdl));
        }
    }
    return total;
}

/// nDCG@k with the ideal ordering found by trying every permutation of the
/// query's judged grades.
inline double ndcg_bruteforce(std::vector<int> const& ranked_grades, std::vector<int> judged, int k)
{
    auto dcg = [k](std::vector<int> const& g) {
        double s = 0;
        for (int i = 0; i < k && i < static_cast<int>(g.size()); ++i) {
            s += g[static_cast<std::size_t>(i)] / std::log2(i + 2.0);
        }
        return s;
    };
    std::sort(judged.begin(), judged.end());
    double best = 0;
    do {
        best = std::max(best, dcg(judged));
    } while (std::next_permutation(judged.begin(), judged.end()));
    return best == 0 ? 0.0 : dcg(ranked_grades) / best;
}

/// Quartile by sorting and linear interpolation at position (n - 1) p.
inline double quantile(std::vector<double> v, double p)
{
    std::sort(v.begin(), v.end());
    double pos = (static_cast<double>(v.size()) - 1) * p;
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = static_cast<std::size_t>(std::ceil(pos));
    return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

}  // namespace qrelkit::oracle
