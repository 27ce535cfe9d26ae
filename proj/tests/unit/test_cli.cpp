#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "qrelkit/collection.hpp"
#include "support.hpp"

using namespace qrelkit;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result run_cli(std::string const& args, test::TempDir const& dir)
{
    auto out_file = dir / "stdout.txt";
    auto cmd = std::string(QRELKIT_CLI) + " " + args + " > " + out_file.string() + " 2> " + (dir / "stderr.txt").string();
    int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
}

void write(std::filesystem::path const& p, std::string const& text) { std::ofstream(p) << text; }

std::string fixture(char const* name) { return (std::filesystem::path(QRELKIT_FIXTURES) / "denoise50" / name).string(); }

class Cli : public ::testing::Test {
  protected:
    void SetUp() override
    {
        write(dir / "corpus.jsonl",
              R"({"_id":"d1","title":"Rock","text":"rock music from the sixties and rock bands"})" "\n"
              R"({"_id":"d2","title":"Jazz","text":"jazz music"})" "\n"
              R"({"_id":"d3","title":"","text":"cooking recipes with rice"})" "\n");
        write(dir / "queries.jsonl", R"({"_id":"q1","text":"rock music"})" "\n");
        write(dir / "qrels.tsv", "query-id\tcorpus-id\tscore\nq1\td1\t2\nq1\td2\t0\n");
    }
    std::string path(char const* name) const { return (dir / name).string(); }
    test::TempDir dir;
};

}  // namespace

TEST_F(Cli, HelpAndUsageErrors)
{
    EXPECT_EQ(run_cli("--help", dir).code, 0);
    EXPECT_EQ(run_cli("", dir).code, 1);
    EXPECT_EQ(run_cli("evaluate --qrels " + path("qrels.tsv"), dir).code, 1);
    EXPECT_EQ(run_cli("nonsense", dir).code, 1);
}

TEST_F(Cli, SearchThenEvaluate)
{
    auto search = run_cli("search --corpus " + path("corpus.jsonl") + " --queries " + path("queries.jsonl")
                              + " --k 10 --output " + path("run.tsv"),
                          dir);
    ASSERT_EQ(search.code, 0);
    auto run = parse_run(dir / "run.tsv");
    ASSERT_NE(run.ranking("q1"), nullptr);
    EXPECT_EQ(run.ranking("q1")->front().doc_id, "d1");

    auto eval = run_cli("--out " + path("reports") + " evaluate --run " + path("run.tsv") + " --qrels "
                            + path("qrels.tsv") + " --corpus " + path("corpus.jsonl") + " --k 10",
                        dir);
    ASSERT_EQ(eval.code, 0);
    EXPECT_NE(eval.out.find("ndcg"), std::string::npos);
    EXPECT_NE(eval.out.find("hole"), std::string::npos);
    EXPECT_TRUE(std::filesystem::exists(dir / "reports"));
}

TEST_F(Cli, DataErrorsExitTwo)
{
    write(dir / "broken.jsonl", "{\"_id\": \"d1\", \"text\": \n");
    EXPECT_EQ(run_cli("search --corpus " + path("broken.jsonl") + " --queries " + path("queries.jsonl"), dir).code, 2);
    write(dir / "bad_qrels.tsv", "q1\td1\t7\n");
    write(dir / "run.tsv", "q1 Q0 d1 1 1.0 r\n");
    EXPECT_EQ(run_cli("evaluate --run " + path("run.tsv") + " --qrels " + path("bad_qrels.tsv"), dir).code, 2);
}

TEST_F(Cli, DenoiseFixture)
{
    auto r = run_cli("--out " + path("dn") + " denoise --corpus " + fixture("corpus.jsonl") + " --qrels "
                         + fixture("qrels.tsv"),
                     dir);
    ASSERT_EQ(r.code, 0);
    auto corpus = parse_corpus(dir / "dn" / "corpus.jsonl");
    EXPECT_EQ(corpus.size(), 23u);
    for (auto const& d : corpus) {
        EXPECT_TRUE(d.title.empty());
    }
}

TEST_F(Cli, AxiomsLnc2WithBm25)
{
    write(dir / "run.tsv", "q1 Q0 d1 1 3.0 r\nq1 Q0 d2 2 2.0 r\nq1 Q0 d3 3 1.0 r\n");
    auto r = run_cli("axioms --mode lnc2 --runs " + path("run.tsv") + " --corpus " + path("corpus.jsonl")
                         + " --queries " + path("queries.jsonl") + " --sample 3",
                     dir);
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("LNC2\tbm25\t12\t12\t100"), std::string::npos) << r.out;
}

TEST_F(Cli, PoolHolesMerge)
{
    write(dir / "run.tsv", "q1 Q0 d1 1 3.0 r\nq1 Q0 d2 2 2.0 r\nq1 Q0 d3 3 1.0 r\n");
    ASSERT_EQ(run_cli("pool --runs " + path("run.tsv") + " --k 3 --qrels " + path("qrels.tsv") + " --output "
                          + path("pool.tsv"),
                      dir)
                  .code,
              0);
    EXPECT_TRUE(std::filesystem::exists(dir / "pool.tsv.runs.tsv"));
    auto holes = run_cli("holes --pool " + path("pool.tsv") + " --qrels " + path("qrels.tsv"), dir);
    ASSERT_EQ(holes.code, 0);
    EXPECT_NE(holes.out.find("q1\td3"), std::string::npos);
    write(dir / "judgments.jsonl",
          R"({"query_id":"q1","doc_id":"d3","annotator":"a","grade":0,"timestamp":"2024-01-01T00:00:00Z"})" "\n"
          R"({"query_id":"q1","doc_id":"d3","annotator":"b","grade":1,"timestamp":"2024-01-01T00:00:00Z"})" "\n");
    auto merged = run_cli("merge --qrels " + path("qrels.tsv") + " --judgments " + path("judgments.jsonl")
                              + " --raters-per-item 2",
                          dir);
    ASSERT_EQ(merged.code, 0);
    EXPECT_NE(merged.out.find("q1\td3\t0"), std::string::npos) << merged.out;
    EXPECT_EQ(run_cli("merge --judgments " + path("judgments.jsonl") + " --raters-per-item 3", dir).code, 1);
}
