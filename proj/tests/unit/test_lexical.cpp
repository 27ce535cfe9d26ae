#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "oracle.hpp"
#include "qrelkit/bm25.hpp"
#include "qrelkit/error.hpp"
#include "qrelkit/index.hpp"
#include "qrelkit/tokenizer.hpp"
#include "support.hpp"

using namespace qrelkit;

namespace {

std::array<Field, 1> const kBody{Field::body};

}  // namespace

TEST(Index, SingleDocPostings)
{
    auto index = build_index(test::make_corpus({{"d", "a a b"}}), kBody);
    auto const& body = index.field(Field::body);
    ASSERT_NE(body.postings("a"), nullptr);
    EXPECT_EQ(*body.postings("a"), (std::vector<Posting>{{0, 2}}));
    EXPECT_EQ(*body.postings("b"), (std::vector<Posting>{{0, 1}}));
    EXPECT_DOUBLE_EQ(body.avgdl(), 3.0);
    EXPECT_FALSE(index.has_field(Field::title));
    EXPECT_THROW((void)index.field(Field::title), ValidationError);
}

TEST(Index, AverageLengthAndDf)
{
    auto index = build_index(test::make_corpus({{"d1", "x"}, {"d2", "x x x"}}), kBody);
    EXPECT_DOUBLE_EQ(index.field(Field::body).avgdl(), 2.0);
    EXPECT_EQ(index.field(Field::body).df("x"), 2u);
    EXPECT_EQ(index.field(Field::body).tf("x", 1), 3u);
    EXPECT_EQ(index.field(Field::body).df("missing"), 0u);
}

TEST(Index, PostingsMatchNaiveRecount)
{
    Rng rng(11);
    auto corpus = test::random_corpus(rng, 10, 15, 25);
    auto index = build_index(corpus);
    for (auto f : kAllFields) {
        auto const& fi = index.field(f);
        std::map<std::string, std::vector<Posting>> naive;
        for (DocIndex d = 0; d < corpus.size(); ++d) {
            auto toks = tokenize(f == Field::title ? corpus[d].title : corpus[d].body).tokens;
            EXPECT_EQ(fi.length(d), toks.size());
            for (std::size_t v = 0; v < 15; ++v) {
                auto term = "t" + std::to_string(v);
                auto n = static_cast<std::uint32_t>(std::count(toks.begin(), toks.end(), term));
                if (n > 0) {
                    naive[term].push_back({d, n});
                }
            }
        }
        EXPECT_EQ(fi.num_terms(), naive.size());
        for (auto const& [term, list] : naive) {
            ASSERT_NE(fi.postings(term), nullptr) << term;
            EXPECT_EQ(*fi.postings(term), list) << term;
        }
    }
}

TEST(Index, ThreadCountDoesNotChangeIndex)
{
    Rng rng(5);
    auto corpus = test::random_corpus(rng, 9000, 200, 40);
    EXPECT_EQ(build_index(corpus, kAllFields, 1), build_index(corpus, kAllFields, 4));
}

TEST(Index, SaveLoadRoundTrip)
{
    Rng rng(8);
    auto index = build_index(test::random_corpus(rng, 50, 30, 20));
    test::TempDir dir;
    save_index(index, dir / "i.bin");
    EXPECT_EQ(load_index(dir / "i.bin"), index);
    write_file(dir / "bad.bin", "garbage");
    EXPECT_THROW((void)load_index(dir / "bad.bin"), DataError);
}

TEST(Bm25, HandComputedExample)
{
    auto index = build_index(test::make_corpus({{"d", "a a b b"}}), kBody);
    Bm25Params p;
    EXPECT_NEAR(bm25_idf(1, 1), std::log(4.0 / 3.0), 1e-12);
    EXPECT_NEAR(std::log(4.0 / 3.0), 0.287682, 1e-6);
    EXPECT_NEAR(bm25_tf_norm(2, 4, 4, p), 1.310345, 1e-6);
    std::vector<std::string> q{"a"};
    // idf * tf_norm = 0.287682 * 1.310345
    EXPECT_NEAR(bm25_score(index, p, q, "d"), std::log(4.0 / 3.0) * 3.8 / 2.9, 1e-12);
    EXPECT_NEAR(bm25_score(index, p, q, "d"), 0.376963, 1e-6);

    // m = 2 concatenation against frozen statistics
    std::vector<std::string> doubled{"a", "a", "b", "b", "a", "a", "b", "b"};
    EXPECT_NEAR(bm25_tf_norm(4, 8, 4, p), 1.444867, 1e-6);
    EXPECT_NEAR(score_synthetic(index, p, q, doubled), std::log(4.0 / 3.0) * 7.6 / 5.26, 1e-12);
    EXPECT_NEAR(score_synthetic(index, p, q, doubled), 0.415662, 1e-6);
}

TEST(Bm25, NoMatchAndEmptyQueryScoreZero)
{
    auto index = build_index(test::make_corpus({{"d", "a a b b"}}));
    std::vector<std::string> none{"zzz"};
    std::vector<std::string> empty;
    EXPECT_EQ(bm25_score(index, {}, none, "d"), 0.0);
    EXPECT_EQ(bm25_score(index, {}, empty, "d"), 0.0);
    EXPECT_EQ(score_synthetic(index, {}, empty, std::vector<std::string>{"a"}), 0.0);
    EXPECT_THROW((void)bm25_score(index, {}, none, "missing"), DataError);
}

TEST(Bm25, FieldWeightIsLinear)
{
    Corpus corpus;
    corpus.add({"d1", "water bottle", "bottled water is bad", ""});
    corpus.add({"d2", "tap", "tap water is fine", ""});
    auto index = build_index(corpus);
    std::vector<std::string> q{"water"};
    Bm25Params title_only;
    title_only.field_weights = {1.0, 0.0};
    Bm25Params body_only;
    body_only.field_weights = {0.0, 1.0};
    Bm25Params doubled;
    doubled.field_weights = {2.0, 1.0};
    double t = bm25_score(index, title_only, q, "d1");
    double b = bm25_score(index, body_only, q, "d1");
    EXPECT_GT(t, 0.0);
    EXPECT_NEAR(bm25_score(index, {}, q, "d1"), t + b, 1e-12);
    EXPECT_NEAR(bm25_score(index, doubled, q, "d1"), 2 * t + b, 1e-12);
}

TEST(Bm25, ParamsValidated)
{
    Bm25Params p;
    p.b = 1.5;
    EXPECT_THROW(p.validate(), ValidationError);
    p.b = 0.4;
    p.k1 = -1;
    EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Search, RanksMatchingDocFirst)
{
    auto index = build_index(test::make_corpus({{"d1", "social security"}, {"d2", "bottled water"}}));
    auto hits = search(index, {}, std::string_view("social security"), 2);
    ASSERT_EQ(hits.size(), 2u);
    EXPECT_EQ(hits[0].doc_id, "d1");
    EXPECT_EQ(search(index, {}, std::string_view("social"), 50).size(), 2u);
    EXPECT_THROW((void)search(index, {}, std::string_view("x"), 0), ValidationError);
}

TEST(Search, EqualsExhaustiveScoring)
{
    Rng rng(21);
    for (int trial = 0; trial < 40; ++trial) {
        auto n = 1 + rng.below(100);
        auto corpus = test::random_corpus(rng, n, 25, 30);
        auto index = build_index(corpus);
        Bm25Params p;
        for (int qi = 0; qi < 5; ++qi) {
            auto query = test::random_text(rng, 30, 1, 4);
            auto tokens = tokenize(query).tokens;
            std::vector<ScoredDoc> all;
            for (auto const& d : corpus) {
                double s = bm25_score(index, p, tokens, d.doc_id);
                EXPECT_NEAR(s, oracle::bm25(corpus, query, d.doc_id, p.k1, p.b, true, true), 1e-9);
                all.push_back({d.doc_id, s});
            }
            std::sort(all.begin(), all.end(), [](auto const& a, auto const& b) {
                return a.score != b.score ? a.score > b.score : a.doc_id < b.doc_id;
            });
            auto k = 1 + rng.below(n + 5);
            all.resize(std::min<std::size_t>(k, all.size()));
            EXPECT_EQ(search(index, p, tokens, k), all) << "trial " << trial;
        }
    }
}

TEST(Search, SyntheticScoreOfIndexedTokensMatches)
{
    Rng rng(2);
    auto corpus = test::random_corpus(rng, 30, 10, 20);
    auto index = build_index(corpus);
    std::vector<std::string> q{"t1", "t3", "t3"};
    for (auto const& d : corpus) {
        FieldTokens ft{tokenize(d.title).tokens, tokenize(d.body).tokens};
        EXPECT_DOUBLE_EQ(score_synthetic(index, {}, q, ft), bm25_score(index, {}, q, d.doc_id));
    }
}

TEST(Search, RunIsIndependentOfThreads)
{
    Rng rng(4);
    auto corpus = test::random_corpus(rng, 300, 40, 30);
    QuerySet queries;
    for (int i = 0; i < 25; ++i) {
        queries.add({"q" + std::to_string(i), test::random_text(rng, 40, 1, 3)});
    }
    auto index = build_index(corpus);
    auto one = search_run(index, {}, queries, 10, "bm25", 1);
    EXPECT_EQ(one, search_run(index, {}, queries, 10, "bm25", 3));
    EXPECT_EQ(one.num_queries(), 25u);
}
