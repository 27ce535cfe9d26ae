#include <gtest/gtest.h>

#include <set>

#include "qrelkit/augment.hpp"
#include "qrelkit/denoise.hpp"
#include "qrelkit/error.hpp"
#include "qrelkit/metrics.hpp"
#include "qrelkit/tokenizer.hpp"
#include "support.hpp"
#include "text_util.hpp"

using namespace qrelkit;

namespace {

std::filesystem::path const kFixture = std::filesystem::path(QRELKIT_FIXTURES) / "denoise50";

std::map<std::string, std::size_t> fixture_lengths()
{
    std::map<std::string, std::size_t> out;
    detail::for_each_line(read_file(kFixture / "lengths.tsv"), [&](std::string_view line, std::size_t lineno) {
        if (lineno == 1 || line.empty()) {
            return;
        }
        auto cols = detail::split(line, '\t');
        out[std::string(cols[0])] = static_cast<std::size_t>(*detail::parse_int(cols[1]));
    });
    return out;
}

std::set<std::string> ids(Corpus const& c)
{
    std::set<std::string> out;
    for (auto const& d : c) {
        out.insert(d.doc_id);
    }
    return out;
}

}  // namespace

TEST(StripTitles, EmptiesTitlesOnly)
{
    Corpus corpus;
    corpus.add({"d", "Cigarettes should be banned", "They are bad", ""});
    auto out = strip_titles(corpus);
    EXPECT_EQ(out[0].title, "");
    EXPECT_EQ(out[0].body, "They are bad");
    EXPECT_EQ(strip_titles(out), out);
    Rng rng(1);
    auto big = test::random_corpus(rng, 40, 10, 10);
    EXPECT_EQ(strip_titles(big).size(), big.size());
}

TEST(FilterShort, BoundaryAtTwentyWords)
{
    auto corpus = test::make_corpus({{"a", test::words(19)}, {"b", test::words(20)}});
    auto out = filter_short(corpus, 20);
    EXPECT_EQ(ids(out), (std::set<std::string>{"b"}));
    EXPECT_EQ(filter_short(corpus, 0), corpus);
}

TEST(FilterShort, FixtureRemovesExactlyShortBodies)
{
    auto corpus = parse_corpus(kFixture / "corpus.jsonl");
    auto lengths = fixture_lengths();
    ASSERT_EQ(corpus.size(), 50u);
    std::set<std::string> expected;
    for (auto const& [id, n] : lengths) {
        EXPECT_EQ(count_words(corpus.find(id)->body), n) << id;
        if (n >= 20) {
            expected.insert(id);
        }
    }
    EXPECT_EQ(ids(filter_short(corpus, 20)), expected);
    EXPECT_EQ(filter_short(corpus, 20, 1), filter_short(corpus, 20, 4));
}

TEST(FilterShort, IdempotentAndComposesAsMax)
{
    auto corpus = parse_corpus(kFixture / "corpus.jsonl");
    for (std::size_t a : {0, 5, 19, 20, 33}) {
        auto once = filter_short(corpus, a);
        EXPECT_EQ(filter_short(once, a), once);
        for (std::size_t b : {0, 10, 20, 40}) {
            EXPECT_EQ(filter_short(filter_short(corpus, a), b), filter_short(corpus, std::max(a, b)));
        }
    }
}

TEST(Reconcile, ReportArithmetic)
{
    auto corpus = parse_corpus(kFixture / "corpus.jsonl");
    auto qrels = parse_qrels(kFixture / "qrels.tsv");
    auto result = denoise(corpus, qrels, {true, 20, 1});
    auto const& r = result.report;
    EXPECT_EQ(r.docs_before, 50u);
    EXPECT_EQ(r.docs_after, result.corpus.size());
    EXPECT_EQ(r.judgments_before, qrels.size());
    EXPECT_EQ(r.judgments_after, result.qrels.size());
    EXPECT_EQ(r.judgments_before, r.judgments_after + r.removed_total());
    for (std::size_t g = 0; g < 3; ++g) {
        EXPECT_EQ(r.grades_before[g], r.grades_after[g] + r.removed[g]);
    }
    EXPECT_EQ(r.grades_after[0] + r.grades_after[1] + r.grades_after[2], r.judgments_after);
    for (auto const& [qid, docs] : result.qrels.by_query()) {
        for (auto const& [did, g] : docs) {
            EXPECT_TRUE(result.corpus.contains(did));
            EXPECT_EQ(qrels.grade(qid, did), g);
        }
    }
    for (auto const& d : result.corpus) {
        EXPECT_EQ(d.title, "");
    }
    EXPECT_DOUBLE_EQ(r.avg_len_after, r.avg_len_after_with_title);
    EXPECT_GT(r.avg_len_before_with_title, r.avg_len_before);
    EXPECT_GT(r.avg_len_after, r.avg_len_before);
}

TEST(Reconcile, HandTally)
{
    auto corpus = test::make_corpus({{"keep1", test::words(25)}, {"keep2", test::words(30)}, {"gone1", "x"}, {"gone2", "y z"}});
    Qrels qrels;
    qrels.add("q1", "keep1", 2);
    qrels.add("q1", "gone1", 0);
    qrels.add("q1", "gone2", 1);
    qrels.add("q2", "keep2", 0);
    qrels.add("q2", "gone1", 0);
    auto [kept, report] = reconcile_qrels(qrels, filter_short(corpus, 20));
    EXPECT_EQ(kept.size(), 2u);
    EXPECT_EQ(report.removed, (std::array<std::size_t, 3>{2, 1, 0}));
    EXPECT_EQ(report.grades_after, (std::array<std::size_t, 3>{1, 0, 1}));

    auto [same, zero] = reconcile_qrels(qrels, corpus);
    EXPECT_EQ(same, qrels);
    EXPECT_EQ(zero.removed_total(), 0u);
}

TEST(Sweep, ZeroThresholdWithoutStrippingIsBaseline)
{
    Rng rng(12);
    auto corpus = test::random_corpus(rng, 120, 30, 40);
    QuerySet queries;
    Qrels qrels;
    for (int q = 0; q < 8; ++q) {
        auto qid = "q" + std::to_string(q);
        queries.add({qid, test::random_text(rng, 30, 1, 3)});
        for (int j = 0; j < 10; ++j) {
            qrels.insert_if_absent(qid, "d" + std::to_string(rng.below(120)), static_cast<int>(rng.below(3)));
        }
    }
    SweepOptions opts;
    opts.strip_titles = false;
    auto rows = threshold_sweep(corpus, queries, qrels, {0}, opts);
    ASSERT_EQ(rows.size(), 1u);
    auto run = search_run(build_index(corpus), {}, queries, 10);
    EXPECT_DOUBLE_EQ(rows[0].ndcg, ndcg_at_k(run, qrels, 10).mean);
    EXPECT_EQ(rows[0].docs, corpus.size());
    EXPECT_THROW((void)threshold_sweep(corpus, queries, qrels, {20, 10}, opts), ValidationError);
}

TEST(Sweep, NonDecreasingWhenShortDocsAreNonRelevant)
{
    // Short documents stuff the query term and are all judged 0; long
    // relevant documents mention it once.
    Corpus corpus;
    Qrels qrels;
    QuerySet queries;
    for (int q = 0; q < 5; ++q) {
        auto term = "topic" + std::to_string(q);
        auto qid = "q" + std::to_string(q);
        queries.add({qid, term});
        for (int i = 0; i < 6; ++i) {
            auto id = qid + "s" + std::to_string(i);
            std::string body;
            for (int j = 0; j <= i; ++j) {
                body += term + " ";
            }
            body += test::words(static_cast<std::size_t>(3 * i), "f");
            corpus.add({id, "", body, ""});
            qrels.add(qid, id, 0);
        }
        for (int i = 0; i < 4; ++i) {
            auto id = qid + "l" + std::to_string(i);
            corpus.add({id, "", term + " " + test::words(25 + static_cast<std::size_t>(10 * i), "x"), ""});
            qrels.add(qid, id, i < 2 ? 2 : 1);
        }
    }
    SweepOptions opts;
    auto rows = threshold_sweep(corpus, queries, qrels, {0, 5, 10, 15, 20, 25}, opts);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_GE(rows[i].ndcg + 1e-12, rows[i - 1].ndcg) << "threshold " << rows[i].threshold;
    }
    EXPECT_NEAR(rows.back().ndcg, 1.0, 1e-12);
}

TEST(Sweep, ExternalRunsAreRestricted)
{
    auto corpus = test::make_corpus({{"long", test::words(30)}, {"short", "a b"}});
    QuerySet queries;
    queries.add({"q", "w1"});
    Qrels qrels;
    qrels.add("q", "long", 2);
    auto ext = test::make_run("neural", {{"q", {"short", "long"}}});
    SweepOptions opts;
    opts.external_runs = {&ext};
    auto rows = threshold_sweep(corpus, queries, qrels, {0, 20}, opts);
    ASSERT_EQ(rows.size(), 4u);
    auto last = std::find_if(rows.begin(), rows.end(), [](auto const& r) { return r.model == "neural" && r.threshold == 20; });
    ASSERT_NE(last, rows.end());
    EXPECT_TRUE(last->approximate);
    EXPECT_DOUBLE_EQ(last->ndcg, 1.0);
    auto restricted = restrict_run(ext, filter_short(corpus, 20));
    EXPECT_EQ(restricted.ranking("q")->size(), 1u);
    EXPECT_EQ(restricted.ranking("q")->at(0).rank, 1);
}

TEST(Augment, AppendsExpansionQueries)
{
    Corpus corpus;
    corpus.add({"d", "Cigarettes should be banned", "They are bad", ""});
    auto exp = parse_expansions_text(R"({"_id":"d","queries":["why are morgans bad","are spiders bad"]})");
    auto out = apply_expansions(corpus, exp);
    EXPECT_EQ(out[0].body, "They are bad why are morgans bad are spiders bad");
    EXPECT_EQ(out[0].title, corpus[0].title);
    EXPECT_EQ(apply_expansions(corpus, parse_expansions_text("")), corpus);
    EXPECT_THROW((void)apply_expansions(corpus, parse_expansions_text(R"({"_id":"nope","queries":["x"]})")),
                 DataError);
}

TEST(Augment, ExpansionWordCountIdentity)
{
    Rng rng(6);
    auto corpus = test::random_corpus(rng, 30, 50, 40);
    ExpansionFile exp;
    for (auto const& d : corpus) {
        if (rng.below(3) == 0) {
            continue;
        }
        auto& qs = exp[d.doc_id];
        for (std::size_t i = rng.below(11); i > 0; --i) {
            qs.push_back(test::random_text(rng, 50, 1, 8) + (rng.below(2) ? "?" : ""));
        }
    }
    auto out = apply_expansions(corpus, exp);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        std::size_t extra = 0;
        if (auto it = exp.find(corpus[i].doc_id); it != exp.end()) {
            for (auto const& q : it->second) {
                extra += count_words(q);
            }
        }
        EXPECT_EQ(count_words(out[i].body), count_words(corpus[i].body) + extra);
    }
}

TEST(Augment, SummaryReplacesBody)
{
    auto corpus = test::make_corpus({{"long", test::words(900)}, {"other", "keep me"}});
    auto summaries = parse_summaries_text(R"({"_id":"long","summary":")" + test::words(80, "s") + "\"}\n");
    auto out = apply_summaries(corpus, summaries);
    EXPECT_EQ(count_words(out.find("long")->body), 80u);
    EXPECT_EQ(out.find("other")->body, "keep me");
    EXPECT_EQ(ids(out), ids(corpus));
    EXPECT_EQ(apply_summaries(corpus, parse_summaries_text("")), corpus);
    EXPECT_THROW((void)parse_summaries_text(R"({"_id":"long","summary":""})"), DataError);
    EXPECT_THROW((void)parse_summaries_text("{\"_id\":\"a\",\"summary\":\"x\"}\n{\"_id\":\"a\",\"summary\":\"y\"}\n"),
                 DataError);
}
