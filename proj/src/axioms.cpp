#include "qrelkit/axioms.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include <json.hpp>

#include "qrelkit/error.hpp"
#include "qrelkit/parallel.hpp"
#include "qrelkit/random.hpp"
#include "qrelkit/tokenizer.hpp"
#include "text_util.hpp"

namespace qrelkit {

std::string_view axiom_name(Axiom a)
{
    switch (a) {
    case Axiom::tfc1: return "TFC1";
    case Axiom::tfc3: return "TFC3";
    case Axiom::m_tdc: return "M-TDC";
    case Axiom::lnc1: return "LNC1";
    case Axiom::tf_lnc: return "TF-LNC";
    case Axiom::lnc2: return "LNC2";
    case Axiom::stmc1: return "STMC1";
    case Axiom::stmc2: return "STMC2";
    }
    return "?";
}

Axiom parse_axiom(std::string_view name)
{
    auto normalize = [](std::string_view s) {
        std::string out;
        for (char c : s) {
            if (c != '-' && c != '_') {
                out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            }
        }
        return out;
    };
    auto wanted = normalize(name);
    for (auto a : kAllAxioms) {
        if (normalize(axiom_name(a)) == wanted) {
            return a;
        }
    }
    throw ValidationError("unknown axiom '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Documents and statistics

int AxiomDoc::tf_of(std::string_view term) const
{
    auto it = tf.find(term);
    return it == tf.end() ? 0 : it->second;
}

namespace {

void count_tf(AxiomDoc& doc)
{
    doc.tf.clear();
    for (auto const& t : doc.tokens) {
        ++doc.tf[t];
    }
}

template <typename T>
std::vector<T> repeat(std::vector<T> const& v, int m)
{
    std::vector<T> out;
    out.reserve(v.size() * static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

}  // namespace

AxiomDoc AxiomDoc::from_document(Document const& doc, bool include_title)
{
    AxiomDoc out;
    out.doc_id = doc.doc_id;
    if (include_title) {
        out.fields.title = tokenize(doc.title).tokens;
        out.text = doc.title.empty() ? doc.body : doc.title + " " + doc.body;
    } else {
        out.text = doc.body;
    }
    out.fields.body = tokenize(doc.body).tokens;
    out.tokens = out.fields.title;
    out.tokens.insert(out.tokens.end(), out.fields.body.begin(), out.fields.body.end());
    count_tf(out);
    return out;
}

AxiomDoc AxiomDoc::from_tokens(std::string doc_id, std::vector<std::string> tokens)
{
    AxiomDoc out;
    out.doc_id = std::move(doc_id);
    out.fields.body = tokens;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        out.text += (i == 0 ? "" : " ") + tokens[i];
    }
    out.tokens = std::move(tokens);
    count_tf(out);
    return out;
}

AxiomDoc AxiomDoc::concatenated(int m) const
{
    if (m < 1) {
        throw ValidationError("concatenation factor must be >= 1");
    }
    AxiomDoc out;
    out.doc_id = doc_id;
    out.copies = copies * m;
    for (int i = 0; i < m; ++i) {
        out.text += (i == 0 ? "" : " ") + text;
    }
    out.fields.title = repeat(fields.title, m);
    out.fields.body = repeat(fields.body, m);
    out.tokens = repeat(tokens, m);
    out.tf.reserve(tf.size());
    for (auto const& [term, n] : tf) {
        out.tf.emplace(term, n * m);
    }
    return out;
}

DocPair DocPair::swapped() const
{
    DocPair out = *this;
    std::swap(out.d1, out.d2);
    return out;
}

TermStats TermStats::from_corpus(Corpus const& corpus, bool include_title, unsigned threads)
{
    StringMap<std::size_t> df;
    constexpr std::size_t kBatch = 4096;
    std::vector<std::vector<std::string>> batch;
    for (std::size_t start = 0; start < corpus.size(); start += kBatch) {
        std::size_t count = std::min(kBatch, corpus.size() - start);
        batch.assign(count, {});
        parallel_for(count, threads, [&](std::size_t i) {
            auto const& doc = corpus[start + i];
            auto tokens = tokenize(doc.body).tokens;
            if (include_title) {
                auto title = tokenize(doc.title).tokens;
                tokens.insert(tokens.end(), title.begin(), title.end());
            }
            std::sort(tokens.begin(), tokens.end());
            tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
            batch[i] = std::move(tokens);
        });
        for (auto& terms : batch) {
            for (auto& t : terms) {
                ++df[std::move(t)];
            }
        }
    }
    return TermStats(corpus.size(), std::move(df));
}

std::size_t TermStats::df(std::string_view term) const
{
    auto it = df_.find(term);
    return it == df_.end() ? 0 : it->second;
}

double TermStats::idf(std::string_view term) const { return bm25_idf(num_docs_, df(term)); }

bool relaxed_equal(double a, double b, double tolerance)
{
    return std::abs(a - b) <= tolerance * std::max(std::abs(a), std::abs(b));
}

int concatenation_factor(std::span<std::string const> longer, std::span<std::string const> shorter)
{
    if (shorter.empty() || longer.size() < 2 * shorter.size() || longer.size() % shorter.size() != 0) {
        return 0;
    }
    for (std::size_t i = 0; i < longer.size(); ++i) {
        if (longer[i] != shorter[i % shorter.size()]) {
            return 0;
        }
    }
    return static_cast<int>(longer.size() / shorter.size());
}

// ---------------------------------------------------------------------------
// Preferences

namespace {

struct QueryTerms {
    std::vector<std::string_view> terms;
    std::vector<int> counts;
};

QueryTerms distinct_terms(std::vector<std::string> const& query)
{
    QueryTerms q;
    for (auto const& t : query) {
        auto it = std::find(q.terms.begin(), q.terms.end(), t);
        if (it == q.terms.end()) {
            q.terms.emplace_back(t);
            q.counts.push_back(1);
        } else {
            ++q.counts[static_cast<std::size_t>(it - q.terms.begin())];
        }
    }
    return q;
}

Preference from_conditions(bool first, bool second)
{
    if (first && !second) {
        return Preference::first;
    }
    if (second && !first) {
        return Preference::second;
    }
    return Preference::none;
}

template <typename T>
Preference compare(T a, T b)
{
    return a > b ? Preference::first : a < b ? Preference::second : Preference::none;
}

bool lengths_equal(AxiomDoc const& a, AxiomDoc const& b)
{
    return relaxed_equal(static_cast<double>(a.length()), static_cast<double>(b.length()));
}

Preference tfc1(QueryTerms const& q, AxiomDoc const& d1, AxiomDoc const& d2)
{
    if (!lengths_equal(d1, d2)) {
        return Preference::none;
    }
    long s1 = 0;
    long s2 = 0;
    for (auto t : q.terms) {
        s1 += d1.tf_of(t);
        s2 += d2.tf_of(t);
    }
    return compare(s1, s2);
}

// a covers two query terms with comparable idf; b concentrates the same
// total on one of them.
bool tfc3_holds(QueryTerms const& q, TermStats const& stats, AxiomDoc const& a, AxiomDoc const& b)
{
    for (std::size_t i = 0; i < q.terms.size(); ++i) {
        for (std::size_t j = 0; j < q.terms.size(); ++j) {
            if (i == j) {
                continue;
            }
            auto t1 = q.terms[i];
            auto t2 = q.terms[j];
            int a1 = a.tf_of(t1);
            int a2 = a.tf_of(t2);
            if (a1 > 0 && a2 > 0 && b.tf_of(t2) == 0 && b.tf_of(t1) == a1 + a2
                && relaxed_equal(stats.idf(t1), stats.idf(t2))) {
                return true;
            }
        }
    }
    return false;
}

// a holds more of the rarer (and at least as frequent in the query) term,
// b holds the same counts with the two terms swapped.
bool mtdc_holds(QueryTerms const& q, TermStats const& stats, AxiomDoc const& a, AxiomDoc const& b)
{
    for (std::size_t i = 0; i < q.terms.size(); ++i) {
        for (std::size_t j = 0; j < q.terms.size(); ++j) {
            if (i == j) {
                continue;
            }
            auto t1 = q.terms[i];
            auto t2 = q.terms[j];
            if (stats.idf(t1) < stats.idf(t2) || q.counts[i] < q.counts[j]) {
                continue;
            }
            if (a.tf_of(t1) == b.tf_of(t2) && a.tf_of(t2) == b.tf_of(t1) && a.tf_of(t1) > b.tf_of(t1)) {
                return true;
            }
        }
    }
    return false;
}

Preference lnc1(QueryTerms const& q, AxiomDoc const& d1, AxiomDoc const& d2)
{
    for (auto t : q.terms) {
        if (d1.tf_of(t) != d2.tf_of(t)) {
            return Preference::none;
        }
    }
    // Shorter is preferred.
    return compare(d2.length(), d1.length());
}

// a is b plus extra occurrences of exactly one query term.
bool tf_lnc_holds(QueryTerms const& q, AxiomDoc const& a, AxiomDoc const& b)
{
    std::string_view differing;
    int differences = 0;
    auto visit = [&](std::string_view term) {
        if (a.tf_of(term) != b.tf_of(term)) {
            if (differing != term) {
                ++differences;
                differing = term;
            }
        }
    };
    for (auto const& [term, n] : a.tf) {
        visit(term);
        if (differences > 1) {
            return false;
        }
    }
    for (auto const& [term, n] : b.tf) {
        if (a.tf.find(term) == a.tf.end()) {
            return false;  // a lacks a term of b, so a is not b plus extras
        }
    }
    if (differences != 1 || std::find(q.terms.begin(), q.terms.end(), differing) == q.terms.end()) {
        return false;
    }
    int delta = a.tf_of(differing) - b.tf_of(differing);
    return delta > 0 && a.length() - b.length() == static_cast<std::size_t>(delta);
}

Preference lnc2(AxiomDoc const& d1, AxiomDoc const& d2)
{
    return from_conditions(concatenation_factor(d1.tokens, d2.tokens) >= 2,
                           concatenation_factor(d2.tokens, d1.tokens) >= 2);
}

double semantic_score(QueryTerms const& q, AxiomDoc const& d, SimilarityProvider const& sim)
{
    std::vector<std::string_view> terms;
    terms.reserve(d.tf.size());
    for (auto const& [term, n] : d.tf) {
        terms.push_back(term);
    }
    std::sort(terms.begin(), terms.end());
    double total = 0.0;
    for (auto u : terms) {
        double best = 0.0;
        for (auto t : q.terms) {
            best = std::max(best, sim.similarity(t, u));
        }
        total += best;
    }
    return total / static_cast<double>(terms.size());
}

Preference stmc1(QueryTerms const& q, AxiomDoc const& d1, AxiomDoc const& d2, SimilarityProvider const& sim)
{
    if (d1.tokens.empty() || d2.tokens.empty() || q.terms.empty()) {
        return Preference::none;
    }
    // Left to TFC1 when the query-term totals differ.
    long s1_tf = 0;
    long s2_tf = 0;
    for (auto t : q.terms) {
        s1_tf += d1.tf_of(t);
        s2_tf += d2.tf_of(t);
    }
    if (s1_tf != s2_tf) {
        return Preference::none;
    }
    double s1 = semantic_score(q, d1, sim);
    double s2 = semantic_score(q, d2, sim);
    constexpr double kEpsilon = 1e-9;
    if (s1 > s2 + kEpsilon) {
        return Preference::first;
    }
    if (s2 > s1 + kEpsilon) {
        return Preference::second;
    }
    return Preference::none;
}

// a has a query term; b has none but has a term similar to it and is no shorter.
bool stmc2_holds(QueryTerms const& q, AxiomDoc const& a, AxiomDoc const& b, SimilarityProvider const& sim)
{
    if (b.length() < a.length()) {
        return false;
    }
    for (auto t : q.terms) {
        if (b.tf_of(t) > 0) {
            return false;
        }
    }
    for (auto t : q.terms) {
        if (a.tf_of(t) < 1) {
            continue;
        }
        for (auto const& [u, n] : b.tf) {
            if (sim.similarity(t, u) >= 0.5) {
                return true;
            }
        }
    }
    return false;
}

SimilarityProvider const& require(SimilarityProvider const* sim, Axiom axiom)
{
    if (sim == nullptr) {
        throw ValidationError(std::string(axiom_name(axiom)) + " needs a similarity provider");
    }
    return *sim;
}

}  // namespace

Preference axiom_preference(Axiom axiom, DocPair const& pair, TermStats const& stats,
                            SimilarityProvider const* similarity)
{
    auto const& d1 = *pair.d1;
    auto const& d2 = *pair.d2;
    auto q = distinct_terms(pair.query);
    switch (axiom) {
    case Axiom::tfc1: return tfc1(q, d1, d2);
    case Axiom::tfc3:
        if (!lengths_equal(d1, d2)) {
            return Preference::none;
        }
        return from_conditions(tfc3_holds(q, stats, d1, d2), tfc3_holds(q, stats, d2, d1));
    case Axiom::m_tdc:
        if (!lengths_equal(d1, d2)) {
            return Preference::none;
        }
        return from_conditions(mtdc_holds(q, stats, d1, d2), mtdc_holds(q, stats, d2, d1));
    case Axiom::lnc1: return lnc1(q, d1, d2);
    case Axiom::tf_lnc: return from_conditions(tf_lnc_holds(q, d1, d2), tf_lnc_holds(q, d2, d1));
    case Axiom::lnc2: return lnc2(d1, d2);
    case Axiom::stmc1: return stmc1(q, d1, d2, require(similarity, axiom));
    case Axiom::stmc2: {
        auto const& sim = require(similarity, axiom);
        return from_conditions(stmc2_holds(q, d1, d2, sim), stmc2_holds(q, d2, d1, sim));
    }
    }
    return Preference::none;
}

// ---------------------------------------------------------------------------
// Pair generation

namespace {

std::vector<std::string> query_tokens(QuerySet const& queries, std::string const& query_id)
{
    auto const* q = queries.find(query_id);
    if (q == nullptr) {
        throw DataError("query '" + query_id + "' not in the query set");
    }
    return tokenize(q->text).tokens;
}

std::shared_ptr<AxiomDoc const> make_doc(Corpus const& corpus, std::string const& doc_id, bool include_title)
{
    auto const* doc = corpus.find(doc_id);
    if (doc == nullptr) {
        throw DataError("document '" + doc_id + "' not in corpus");
    }
    return std::make_shared<AxiomDoc const>(AxiomDoc::from_document(*doc, include_title));
}

}  // namespace

Lnc2Sample lnc2_pairs(std::span<Run const* const> runs, Corpus const& corpus, QuerySet const& queries,
                      Lnc2Options const& options)
{
    if (runs.empty()) {
        throw ValidationError("LNC2 sampling needs at least one run");
    }
    for (int m : options.ms) {
        if (m < 1) {
            throw ValidationError("concatenation factors must be >= 1");
        }
    }
    std::set<std::pair<std::string, std::string>> candidates;
    for (auto const* run : runs) {
        for (auto const& [qid, ranking] : run->rankings()) {
            for (std::size_t i = 0; i < std::min(options.top_k, ranking.size()); ++i) {
                candidates.emplace(qid, ranking[i].doc_id);
            }
        }
    }
    std::vector<std::pair<std::string, std::string>> pool(candidates.begin(), candidates.end());
    Lnc2Sample out;
    out.available = pool.size();
    out.truncated = pool.size() < options.sample_size;
    Rng rng(options.seed);
    auto chosen = rng.sample(pool.size(), options.sample_size);
    out.sampled = chosen.size();
    for (auto idx : chosen) {
        auto const& [qid, did] = pool[idx];
        auto tokens = query_tokens(queries, qid);
        auto original = make_doc(corpus, did, options.include_title);
        for (int m : options.ms) {
            DocPair pair;
            pair.query_id = qid;
            pair.query = tokens;
            pair.d1 = std::make_shared<AxiomDoc const>(original->concatenated(m));
            pair.d2 = original;
            pair.m = m;
            out.pairs.push_back(std::move(pair));
        }
    }
    return out;
}

std::vector<DocPair> real_pairs(Run const& run, Corpus const& corpus, QuerySet const& queries, std::size_t k,
                                bool include_title)
{
    std::vector<DocPair> out;
    for (auto const& [qid, ranking] : run.rankings()) {
        std::size_t n = std::min(k, ranking.size());
        if (n < 2) {
            continue;
        }
        auto tokens = query_tokens(queries, qid);
        std::vector<std::shared_ptr<AxiomDoc const>> docs;
        docs.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            docs.push_back(make_doc(corpus, ranking[i].doc_id, include_title));
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                out.push_back(DocPair{qid, tokens, docs[i], docs[j], 0});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Agreement

ScoringModel bm25_model(Index const& index, Bm25Params params, std::string name)
{
    params.validate();
    return {std::move(name), [&index, params](DocPair const& pair, AxiomDoc const& doc) -> std::optional<double> {
                return score_synthetic(index, params, pair.query, doc.fields);
            }};
}

ScoringModel score_table_model_text(std::string_view text, std::string name, std::string const& origin)
{
    auto table = std::make_shared<StringMap<double>>();
    detail::for_each_line(text, [&](std::string_view line, std::size_t lineno) {
        if (detail::is_blank(line) || (lineno == 1 && line.starts_with("query_id"))) {
            return;
        }
        auto cols = detail::split_ws(line);
        if (cols.size() != 4) {
            throw DataError::at(origin, lineno, "expected `query_id doc_id copies score`");
        }
        auto copies = detail::parse_int(cols[2]);
        auto score = detail::parse_double(cols[3]);
        if (!copies || *copies < 1 || !score) {
            throw DataError::at(origin, lineno, "bad copies or score");
        }
        auto key = std::string(cols[0]) + '\t' + std::string(cols[1]) + '\t' + std::to_string(*copies);
        if (!table->emplace(std::move(key), *score).second) {
            throw DataError::at(origin, lineno, "duplicate score row");
        }
    });
    return {std::move(name), [table](DocPair const& pair, AxiomDoc const& doc) -> std::optional<double> {
                auto key = pair.query_id + '\t' + doc.doc_id + '\t' + std::to_string(doc.copies);
                auto it = table->find(key);
                if (it == table->end()) {
                    return std::nullopt;
                }
                return it->second;
            }};
}

ScoringModel score_table_model(std::filesystem::path const& path, std::string name)
{
    return score_table_model_text(read_file(path), std::move(name), path.string());
}

AxiomReportRow agreement(RankingModel const& model, std::span<DocPair const> pairs, Axiom axiom,
                         TermStats const& stats, SimilarityProvider const* similarity)
{
    if (model.run == nullptr) {
        throw ValidationError("ranking model '" + model.name + "' has no run");
    }
    AxiomReportRow row;
    row.axiom = axiom;
    row.model = model.name;
    StringMap<StringMap<int>> ranks;
    auto rank_of = [&](std::string const& qid, std::string const& did) -> std::optional<int> {
        auto q = ranks.find(qid);
        if (q == ranks.end()) {
            StringMap<int> m;
            if (auto const* ranking = model.run->ranking(qid)) {
                for (auto const& r : *ranking) {
                    m.emplace(r.doc_id, r.rank);
                }
            }
            q = ranks.emplace(qid, std::move(m)).first;
        }
        auto d = q->second.find(did);
        if (d == q->second.end()) {
            return std::nullopt;
        }
        return d->second;
    };
    for (auto const& pair : pairs) {
        ++row.examined;
        Preference pref = (axiom == Axiom::lnc2 && pair.synthetic()) ? Preference::first
                                                                       : axiom_preference(axiom, pair, stats, similarity);
        if (pref == Preference::none) {
            continue;
        }
        // Rankings cannot place synthetic documents.
        if (pair.synthetic()) {
            ++row.skipped;
            continue;
        }
        auto r1 = rank_of(pair.query_id, pair.d1->doc_id);
        auto r2 = rank_of(pair.query_id, pair.d2->doc_id);
        if (!r1 || !r2) {
            ++row.skipped;
            continue;
        }
        ++row.applicable;
        if ((pref == Preference::first) == (*r1 < *r2)) {
            ++row.agreements;
        }
    }
    return row;
}

AxiomReportRow agreement(ScoringModel const& model, std::span<DocPair const> pairs, Axiom axiom,
                         TermStats const& stats, SimilarityProvider const* similarity)
{
    AxiomReportRow row;
    row.axiom = axiom;
    row.model = model.name;
    for (auto const& pair : pairs) {
        ++row.examined;
        bool lnc2_synthetic = axiom == Axiom::lnc2 && pair.synthetic();
        Preference pref = lnc2_synthetic ? Preference::first : axiom_preference(axiom, pair, stats, similarity);
        if (pref == Preference::none) {
            continue;
        }
        auto s1 = model.score(pair, *pair.d1);
        auto s2 = model.score(pair, *pair.d2);
        if (!s1 || !s2) {
            ++row.skipped;
            continue;
        }
        ++row.applicable;
        bool agrees = lnc2_synthetic ? *s1 >= *s2 : (pref == Preference::first ? *s1 > *s2 : *s2 > *s1);
        if (agrees) {
            ++row.agreements;
        }
    }
    return row;
}

std::string axiom_report_tsv(std::span<AxiomReportRow const> rows)
{
    std::string out = "axiom\tmodel\tapplicable\tagreements\tpct\n";
    for (auto const& r : rows) {
        out += std::string(axiom_name(r.axiom)) + '\t' + r.model + '\t' + std::to_string(r.applicable) + '\t'
               + std::to_string(r.agreements) + '\t' + format_double(r.pct()) + '\n';
    }
    return out;
}

std::string axiom_report_json(std::span<AxiomReportRow const> rows)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (auto const& r : rows) {
        arr.push_back({{"axiom", axiom_name(r.axiom)},
                       {"model", r.model},
                       {"examined", r.examined},
                       {"applicable", r.applicable},
                       {"agreements", r.agreements},
                       {"skipped", r.skipped},
                       {"pct", r.pct()}});
    }
    return arr.dump(2) + '\n';
}

std::string export_pair_documents(std::span<DocPair const> pairs)
{
    std::set<std::tuple<std::string, std::string, int>> seen;
    std::string out;
    for (auto const& pair : pairs) {
        for (auto const* doc : {pair.d1.get(), pair.d2.get()}) {
            if (!seen.emplace(pair.query_id, doc->doc_id, doc->copies).second) {
                continue;
            }
            nlohmann::ordered_json obj{
                {"query_id", pair.query_id}, {"doc_id", doc->doc_id}, {"copies", doc->copies}, {"text", doc->text}};
            out += obj.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
            out += '\n';
        }
    }
    return out;
}

}  // namespace qrelkit
