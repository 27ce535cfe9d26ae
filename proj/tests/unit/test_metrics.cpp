#include <gtest/gtest.h>

#include <cmath>

#include "oracle.hpp"
#include "qrelkit/error.hpp"
#include "qrelkit/metrics.hpp"
#include "support.hpp"

using namespace qrelkit;

namespace {

Qrels qrels_of(std::initializer_list<std::tuple<std::string, std::string, int>> entries)
{
    Qrels q;
    for (auto const& [qid, did, g] : entries) {
        q.add(qid, did, g);
    }
    return q;
}

}  // namespace

TEST(Ndcg, IdealRankingScoresOne)
{
    auto run = test::make_run("r", {{"q", {"a", "b", "c", "d"}}});
    auto qrels = qrels_of({{"q", "a", 2}, {"q", "b", 1}});
    EXPECT_DOUBLE_EQ(ndcg_at_k(run, qrels, 10).mean, 1.0);
}

TEST(Ndcg, HandComputedExample)
{
    auto run = test::make_run("r", {{"q", {"a", "b", "c"}}});
    auto qrels = qrels_of({{"q", "a", 2}, {"q", "b", 0}, {"q", "c", 1}});
    double dcg = 2 + 0 + 1 / std::log2(4.0);
    double idcg = 2 + 1 / std::log2(3.0);
    EXPECT_NEAR(idcg, 2.630930, 1e-6);
    auto r = ndcg_at_k(run, qrels, 10);
    EXPECT_NEAR(r.mean, dcg / idcg, 1e-12);
    EXPECT_NEAR(r.mean, 2.5 / 2.630930, 1e-6);
    EXPECT_NEAR(r.mean, oracle::ndcg_bruteforce({2, 0, 1}, {2, 0, 1}, 10), 1e-12);
}

TEST(Ndcg, ZeroIdcgQueriesStayInMean)
{
    auto run = test::make_run("r", {{"q1", {"a"}}, {"q2", {"b"}}, {"q3", {"c"}}});
    auto qrels = qrels_of({{"q1", "a", 2}, {"q2", "b", 0}});
    auto r = ndcg_at_k(run, qrels, 10);
    EXPECT_DOUBLE_EQ(r.per_query.at("q2"), 0.0);
    EXPECT_DOUBLE_EQ(r.per_query.at("q3"), 0.0);
    EXPECT_NEAR(r.mean, 1.0 / 3.0, 1e-12);
    EXPECT_EQ(r.flagged, (std::vector<std::string>{"q3"}));
    EXPECT_THROW((void)ndcg_at_k(run, qrels, 0), ValidationError);
}

TEST(Ndcg, MatchesBruteForceOnRandomInstances)
{
    Rng rng(1234);
    for (int trial = 0; trial < 2000; ++trial) {
        auto n = 1 + rng.below(5);
        std::vector<std::string> docs;
        std::vector<int> ranked;
        std::vector<int> judged;
        Qrels qrels;
        for (std::size_t i = 0; i < n; ++i) {
            docs.push_back("d" + std::to_string(i));
            int g = static_cast<int>(rng.below(4)) - 1;  // -1 means unjudged
            ranked.push_back(std::max(g, 0));
            if (g >= 0) {
                qrels.add("q", docs.back(), g);
                judged.push_back(g);
            }
        }
        // judged documents outside the run also count for the ideal
        for (std::size_t extra = rng.below(3); extra > 0; --extra) {
            int g = static_cast<int>(rng.below(3));
            qrels.add("q", "x" + std::to_string(extra), g);
            judged.push_back(g);
        }
        qrelkit::Run run("r");
        std::vector<std::pair<std::string, double>> scored;
        for (std::size_t i = 0; i < n; ++i) {
            scored.emplace_back(docs[i], static_cast<double>(n - i));
        }
        run.set_ranking("q", scored);
        int k = 1 + static_cast<int>(rng.below(6));
        ASSERT_NEAR(ndcg_at_k(run, qrels, k).mean, oracle::ndcg_bruteforce(ranked, judged, k), 1e-9)
            << "trial " << trial;
    }
}

TEST(Hole, CountsUnjudged)
{
    auto judged = test::make_run("r", {{"q", {"a", "b"}}});
    EXPECT_DOUBLE_EQ(hole_at_k(judged, qrels_of({{"q", "a", 0}, {"q", "b", 1}}), 10).mean, 0.0);

    auto run = test::make_run("r", {{"q1", {"a", "b"}}, {"q2", {"c", "d"}}});
    auto qrels = qrels_of({{"q1", "a", 1}, {"q1", "b", 0}, {"q2", "c", 2}});
    auto r = hole_at_k(run, qrels, 2);
    ASSERT_TRUE(r.micro);
    EXPECT_DOUBLE_EQ(*r.micro, 0.25);
    EXPECT_DOUBLE_EQ(r.per_query.at("q2"), 0.5);
}

TEST(Hole, ComplementsJudgedFraction)
{
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
        Qrels qrels;
        qrelkit::Run run("r");
        std::vector<std::pair<std::string, double>> scored;
        auto n = 1 + rng.below(12);
        std::size_t judged = 0;
        int k = 1 + static_cast<int>(rng.below(10));
        for (std::size_t i = 0; i < n; ++i) {
            scored.emplace_back("d" + std::to_string(i), -static_cast<double>(i));
            if (rng.below(2) == 0) {
                qrels.add("q", "d" + std::to_string(i), static_cast<int>(rng.below(3)));
                judged += i < static_cast<std::size_t>(k) ? 1 : 0;
            }
        }
        run.set_ranking("q", scored);
        auto considered = std::min<std::size_t>(static_cast<std::size_t>(k), n);
        EXPECT_NEAR(hole_at_k(run, qrels, k).mean + double(judged) / double(considered), 1.0, 1e-12);
    }
}

TEST(ErrorRate, ShortNonRelevantTopOne)
{
    // 49 queries; the top document of q0..q2 is short and non-relevant.
    Corpus corpus;
    qrelkit::Run run("bm25");
    Qrels qrels;
    for (int i = 0; i < 49; ++i) {
        auto qid = "q" + std::to_string(i);
        auto did = "d" + std::to_string(i);
        bool mistake = i < 3;
        bool relevant_short = i == 3;
        std::size_t len = (mistake || relevant_short) ? 5 : 40;
        corpus.add({did, "", test::words(len), ""});
        run.set_ranking(qid, {{did, 1.0}, {did + "x", 0.5}});
        corpus.add({did + "x", "", test::words(3), ""});
        if (i == 0) {
            qrels.add(qid, did, 0);
        } else if (relevant_short) {
            qrels.add(qid, did, 2);
        } else if (i > 3) {
            qrels.add(qid, did, static_cast<int>(i % 3));
        }
    }
    auto r = error_rate_at_k(run, qrels, corpus, 1);
    ASSERT_TRUE(r.micro);
    EXPECT_NEAR(*r.micro, 3.0 / 49.0, 1e-12);
    EXPECT_NEAR(100 * *r.micro, 6.1, 0.1);
}

TEST(ErrorRate, BoundaryAndExemption)
{
    auto corpus = test::make_corpus({{"short", "one two three"}, {"nineteen", test::words(19)}, {"twenty", test::words(20)}});
    auto qrels = qrels_of({{"q", "short", 2}});
    auto run = test::make_run("r", {{"q", {"short"}}});
    EXPECT_DOUBLE_EQ(*error_rate_at_k(run, qrels, corpus, 1).micro, 0.0);
    auto edge = test::make_run("r", {{"q1", {"nineteen"}}, {"q2", {"twenty"}}});
    auto r = error_rate_at_k(edge, Qrels{}, corpus, 1);
    EXPECT_DOUBLE_EQ(r.per_query.at("q1"), 1.0);
    EXPECT_DOUBLE_EQ(r.per_query.at("q2"), 0.0);
    auto missing = test::make_run("r", {{"q", {"ghost"}}});
    EXPECT_THROW((void)error_rate_at_k(missing, qrels, corpus, 1), DataError);
}

TEST(ErrorRate, NeverExceedsHoleOrNonRelevantRate)
{
    Rng rng(77);
    auto corpus = test::random_corpus(rng, 60, 20, 40);
    Qrels qrels;
    qrelkit::Run run("r");
    for (int q = 0; q < 10; ++q) {
        std::vector<std::pair<std::string, double>> scored;
        for (int i = 0; i < 15; ++i) {
            auto did = "d" + std::to_string(rng.below(60));
            if (std::any_of(scored.begin(), scored.end(), [&](auto const& s) { return s.first == did; })) {
                continue;
            }
            scored.emplace_back(did, rng.uniform());
            if (rng.below(2) == 0) {
                qrels.insert_if_absent("q" + std::to_string(q), did, static_cast<int>(rng.below(3)));
            }
        }
        run.set_ranking("q" + std::to_string(q), scored);
    }
    for (int k : {1, 5, 10}) {
        auto err = error_rate_at_k(run, qrels, corpus, k);
        for (auto const& [qid, value] : err.per_query) {
            auto const* ranking = run.ranking(qid);
            double bad = 0;
            double n = 0;
            for (std::size_t i = 0; i < ranking->size() && i < static_cast<std::size_t>(k); ++i, ++n) {
                auto g = qrels.grade(qid, (*ranking)[i].doc_id);
                bad += (!g || *g == 0) ? 1 : 0;
            }
            EXPECT_LE(value, bad / n + 1e-12);
        }
    }
}

TEST(LengthSummary, ConstantLengths)
{
    std::vector<double> v(7, 10.0);
    auto s = summarize(v);
    EXPECT_DOUBLE_EQ(s.median, 10);
    EXPECT_DOUBLE_EQ(s.mean, 10);
    EXPECT_DOUBLE_EQ(s.ci95_high - s.ci95_low, 0);
    EXPECT_THROW((void)summarize(std::vector<double>{}), ValidationError);
}

TEST(LengthSummary, OneToHundred)
{
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) {
        v.push_back(i);
    }
    EXPECT_DOUBLE_EQ(summarize(v).median, 50.5);
}

TEST(LengthSummary, MatchesSortAndInterpolate)
{
    Rng rng(30);
    std::vector<double> v;
    for (int i = 0; i < 30; ++i) {
        v.push_back(static_cast<double>(rng.below(500)));
    }
    auto s = summarize(v);
    EXPECT_NEAR(s.q1, oracle::quantile(v, 0.25), 1e-12);
    EXPECT_NEAR(s.median, oracle::quantile(v, 0.5), 1e-12);
    EXPECT_NEAR(s.q3, oracle::quantile(v, 0.75), 1e-12);
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / 30;
    double ss = 0;
    for (double x : v) {
        ss += (x - mean) * (x - mean);
    }
    double sd = std::sqrt(ss / 29);
    EXPECT_NEAR(s.mean, mean, 1e-9);
    EXPECT_NEAR(s.sd, sd, 1e-9);
    EXPECT_NEAR(s.ci95_low, mean - 1.96 * sd / std::sqrt(30.0), 1e-9);
    EXPECT_NEAR(s.ci95_high, mean + 1.96 * sd / std::sqrt(30.0), 1e-9);
}

TEST(LengthSummary, RunAndJudged)
{
    auto corpus = test::make_corpus({{"a", test::words(10)}, {"b", test::words(20)}, {"c", test::words(30)}});
    auto run = test::make_run("r", {{"q1", {"a", "b", "c"}}, {"q2", {"c"}}});
    auto s = length_summary(run, corpus, 2);
    EXPECT_EQ(s.n, 3u);
    EXPECT_DOUBLE_EQ(s.median, 20);
    auto qrels = qrels_of({{"q1", "a", 2}, {"q1", "b", 1}, {"q1", "c", 0}});
    auto j = judged_length_summary(qrels, corpus);
    EXPECT_EQ(j.n, 2u);
    EXPECT_DOUBLE_EQ(j.mean, 15);
}

TEST(Spearman, KnownValues)
{
    std::vector<double> x{1, 2, 3};
    std::vector<double> y{1, 3, 2};
    EXPECT_NEAR(spearman(x, y), 0.5, 1e-12);
    EXPECT_NEAR(spearman(x, x), 1.0, 1e-12);
    std::vector<double> rev{3, 2, 1};
    EXPECT_NEAR(spearman(x, rev), -1.0, 1e-12);
    std::vector<double> flat{2, 2, 2};
    EXPECT_THROW((void)spearman(x, flat), UndefinedStatistic);
    EXPECT_THROW((void)spearman(x, std::vector<double>{1, 2}), ValidationError);
}

TEST(Spearman, TiesUseAverageRanks)
{
    std::vector<double> v{10, 20, 20, 30};
    EXPECT_EQ(average_ranks(v), (std::vector<double>{1, 2.5, 2.5, 4}));
    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> a;
        std::vector<double> b;
        for (int i = 0; i < 8; ++i) {
            a.push_back(static_cast<double>(rng.below(100000)));
            b.push_back(static_cast<double>(rng.below(100000)));
        }
        // without ties, rho = 1 - 6 sum d^2 / (n (n^2 - 1))
        auto ra = average_ranks(a);
        auto rb = average_ranks(b);
        double d2 = 0;
        for (int i = 0; i < 8; ++i) {
            d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
        }
        EXPECT_NEAR(spearman(a, b), 1 - 6 * d2 / (8 * 63), 1e-12);
    }
}

TEST(FleissKappa, DerivedTwoByTwo)
{
    RatingMatrix m;
    m.raters_per_item = 2;
    m.items = {{"A", {{0, 2}}}, {"B", {{0, 1}, {1, 1}}}};
    EXPECT_NEAR(fleiss_kappa(m), -1.0 / 3.0, 1e-12);
}

TEST(FleissKappa, PerfectAgreementAndErrors)
{
    RatingMatrix m;
    m.raters_per_item = 3;
    m.items = {{"a", {{0, 3}}}, {"b", {{2, 3}}}, {"c", {{1, 3}}}};
    EXPECT_NEAR(fleiss_kappa(m), 1.0, 1e-12);

    RatingMatrix one_category;
    one_category.raters_per_item = 2;
    one_category.items = {{"a", {{1, 2}}}, {"b", {{1, 2}}}};
    EXPECT_THROW((void)fleiss_kappa(one_category), UndefinedStatistic);

    RatingMatrix bad = m;
    bad.items[0].counts[0] = 2;
    EXPECT_THROW((void)fleiss_kappa(bad), ValidationError);
}

TEST(FleissKappa, MatchesTextbookFormula)
{
    Rng rng(55);
    for (int t = 0; t < 100; ++t) {
        int n = 2 + static_cast<int>(rng.below(4));
        std::size_t items = 2 + rng.below(20);
        RatingMatrix m;
        m.raters_per_item = n;
        std::vector<std::array<double, 3>> rows;
        for (std::size_t i = 0; i < items; ++i) {
            std::array<double, 3> row{};
            RatingMatrix::Item item{std::to_string(i), {}};
            for (int r = 0; r < n; ++r) {
                auto c = static_cast<int>(rng.below(3));
                row[static_cast<std::size_t>(c)] += 1;
                ++item.counts[c];
            }
            rows.push_back(row);
            m.items.push_back(item);
        }
        double pbar = 0;
        std::array<double, 3> pj{};
        for (auto const& row : rows) {
            double s = 0;
            for (int j = 0; j < 3; ++j) {
                s += row[j] * (row[j] - 1);
                pj[j] += row[j];
            }
            pbar += s / (n * (n - 1.0));
        }
        pbar /= double(items);
        double pe = 0;
        for (double& p : pj) {
            p /= double(items) * n;
            pe += p * p;
        }
        if (std::abs(1 - pe) < 1e-12) {
            continue;
        }
        EXPECT_NEAR(fleiss_kappa(m), (pbar - pe) / (1 - pe), 1e-12);
    }
}

TEST(Reports, TsvAndJsonContainMeans)
{
    auto run = test::make_run("r", {{"q", {"a", "b"}}});
    Qrels qrels;
    qrels.add("q", "a", 1);
    std::vector<MetricReport> reports{ndcg_at_k(run, qrels, 10), hole_at_k(run, qrels, 10)};
    auto tsv = reports_to_tsv(reports);
    EXPECT_NE(tsv.find("hole\t10\tmicro\t0.5"), std::string::npos) << tsv;
    EXPECT_NE(reports_to_json(reports).find("\"mean\""), std::string::npos);
}
