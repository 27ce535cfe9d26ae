// qrelkit command-line tool.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qrelkit/augment.hpp"
#include "qrelkit/axioms.hpp"
#include "qrelkit/bm25.hpp"
#include "qrelkit/collection.hpp"
#include "qrelkit/denoise.hpp"
#include "qrelkit/error.hpp"
#include "qrelkit/index.hpp"
#include "qrelkit/judge_service.hpp"
#include "qrelkit/metrics.hpp"
#include "qrelkit/pooling.hpp"
#include "qrelkit/similarity.hpp"

namespace fs = std::filesystem;
using namespace qrelkit;

namespace {

struct Common {
    unsigned threads = 1;
    std::string out;
};

void emit(Common const& common, std::string const& stem, std::string const& tsv, std::string const& json)
{
    std::cout << tsv;
    if (common.out.empty()) {
        return;
    }
    fs::create_directories(common.out);
    write_file(fs::path(common.out) / (stem + ".tsv"), tsv);
    write_file(fs::path(common.out) / (stem + ".json"), json);
}

std::vector<Field> parse_fields(std::vector<std::string> const& names)
{
    std::vector<Field> out;
    for (auto const& n : names) {
        out.push_back(parse_field(n));
    }
    return out;
}

struct Bm25Flags {
    double k1 = 0.9;
    double b = 0.4;
    double title_weight = 1.0;
    double body_weight = 1.0;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--k1", k1, "BM25 k1")->capture_default_str();
        cmd->add_option("--b", b, "BM25 b")->capture_default_str();
        cmd->add_option("--title-weight", title_weight, "Weight of the title field")->capture_default_str();
        cmd->add_option("--body-weight", body_weight, "Weight of the body field")->capture_default_str();
    }

    [[nodiscard]] Bm25Params params() const
    {
        Bm25Params p;
        p.k1 = k1;
        p.b = b;
        p.field_weights = {title_weight, body_weight};
        p.validate();
        return p;
    }
};

std::vector<Run> load_runs(std::vector<std::string> const& paths)
{
    std::vector<Run> runs;
    for (auto const& p : paths) {
        runs.push_back(parse_run(p));
        if (runs.back().tag().empty()) {
            runs.back().set_tag(fs::path(p).stem().string());
        }
    }
    return runs;
}

std::vector<Run const*> pointers(std::vector<Run> const& runs)
{
    std::vector<Run const*> out;
    for (auto const& r : runs) {
        out.push_back(&r);
    }
    return out;
}

// ---------------------------------------------------------------------------

void add_index(CLI::App& app, Common& common)
{
    auto* cmd = app.add_subcommand("index", "Build and save a BM25 index");
    auto corpus = std::make_shared<std::string>();
    auto output = std::make_shared<std::string>();
    auto fields = std::make_shared<std::vector<std::string>>(std::vector<std::string>{"title", "body"});
    cmd->add_option("--corpus", *corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    cmd->add_option("--output,-o", *output, "Index file to write")->required();
    cmd->add_option("--fields", *fields, "Fields to index")->delimiter(',')->capture_default_str();
    cmd->callback([=, &common] {
        auto f = parse_fields(*fields);
        auto c = parse_corpus(*corpus);
        auto index = build_index(c, f, common.threads);
        save_index(index, *output);
        std::cout << "indexed " << index.num_docs() << " documents\n";
    });
}

void add_search(CLI::App& app, Common& common)
{
    auto* cmd = app.add_subcommand("search", "Retrieve a BM25 run for a query set");
    struct Opts {
        std::string index, corpus, queries, output, tag = "bm25";
        std::vector<std::string> fields{"title", "body"};
        std::size_t k = 1000;
        Bm25Flags bm25;
    };
    auto o = std::make_shared<Opts>();
    auto* src = cmd->add_option_group("source");
    src->add_option("--index", o->index, "Saved index")->check(CLI::ExistingFile);
    src->add_option("--corpus", o->corpus, "Corpus JSONL (indexed on the fly)")->check(CLI::ExistingFile);
    src->require_option(1);
    cmd->add_option("--queries", o->queries, "Queries JSONL")->required()->check(CLI::ExistingFile);
    cmd->add_option("--k", o->k, "Depth of the run")->capture_default_str();
    cmd->add_option("--tag", o->tag, "Run tag")->capture_default_str();
    cmd->add_option("--fields", o->fields, "Fields to index with --corpus")->delimiter(',');
    cmd->add_option("--output,-o", o->output, "Run file to write (default stdout)");
    o->bm25.add(cmd);
    cmd->callback([o, &common] {
        auto params = o->bm25.params();
        auto queries = parse_queries(o->queries);
        Index index = o->index.empty() ? build_index(parse_corpus(o->corpus), parse_fields(o->fields), common.threads)
                                       : load_index(o->index);
        auto run = search_run(index, params, queries, o->k, o->tag, common.threads);
        if (o->output.empty()) {
            std::cout << format_run(run);
        } else {
            write_run(run, o->output);
        }
    });
}

void add_evaluate(CLI::App& app, Common& common)
{
    auto* cmd = app.add_subcommand("evaluate", "nDCG, hole, error rate and length reports for runs");
    struct Opts {
        std::vector<std::string> runs;
        std::string qrels, corpus;
        std::vector<int> ks{10};
        std::size_t min_words = 20;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--run", o->runs, "Run files")->required()->check(CLI::ExistingFile);
    cmd->add_option("--qrels", o->qrels, "Qrels TSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--corpus", o->corpus, "Corpus JSONL (enables error rate and lengths)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--k", o->ks, "Cutoffs")->delimiter(',')->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--min-words", o->min_words, "Short-document threshold of the error rate")
        ->capture_default_str();
    cmd->callback([o, &common] {
        auto qrels = parse_qrels(o->qrels);
        std::optional<Corpus> corpus;
        if (!o->corpus.empty()) {
            corpus = parse_corpus(o->corpus);
        }
        auto runs = load_runs(o->runs);
        std::string tsv = "run\tmetric\tk\tmean\tmicro\n";
        nlohmann::ordered_json json = nlohmann::ordered_json::object();
        for (auto const& run : runs) {
            std::vector<MetricReport> reports;
            for (int k : o->ks) {
                reports.push_back(ndcg_at_k(run, qrels, k));
                reports.push_back(hole_at_k(run, qrels, k));
                if (corpus) {
                    reports.push_back(error_rate_at_k(run, qrels, *corpus, k, o->min_words));
                }
            }
            for (auto const& r : reports) {
                tsv += run.tag() + '\t' + r.metric_name + '\t' + std::to_string(r.k) + '\t' + format_double(r.mean)
                       + '\t' + (r.micro ? format_double(*r.micro) : std::string("-")) + '\n';
            }
            auto entry = nlohmann::ordered_json::parse(reports_to_json(reports));
            nlohmann::ordered_json obj{{"metrics", entry}};
            if (corpus) {
                nlohmann::ordered_json lengths = nlohmann::ordered_json::object();
                for (int k : o->ks) {
                    lengths[std::to_string(k)] =
                        nlohmann::ordered_json::parse(length_summary_to_json(length_summary(run, *corpus, k)));
                }
                obj["lengths"] = lengths;
            }
            json[run.tag()] = obj;
            if (!common.out.empty()) {
                fs::create_directories(common.out);
                write_file(fs::path(common.out) / (run.tag() + ".per_query.tsv"), reports_to_tsv(reports));
            }
        }
        if (corpus) {
            try {
                json["judged_relevant_lengths"] =
                    nlohmann::ordered_json::parse(length_summary_to_json(judged_length_summary(qrels, *corpus)));
            } catch (ValidationError const&) {
                // no relevant judgment has a document in the corpus
            }
        }
        emit(common, "evaluate", tsv, json.dump(2) + '\n');
    });
}

void add_denoise(CLI::App& app, Common& common)
{
    auto* cmd = app.add_subcommand("denoise", "Drop short documents and reconcile qrels");
    struct Opts {
        std::string corpus, qrels, corpus_out, qrels_out;
        std::size_t min_words = 20;
        bool strip_titles = true;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--corpus", o->corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    cmd->add_option("--qrels", o->qrels, "Qrels TSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--min-words", o->min_words, "Keep bodies with at least this many words")
        ->capture_default_str();
    cmd->add_flag("--strip-titles,!--keep-titles", o->strip_titles, "Empty every title")->capture_default_str();
    cmd->add_option("--corpus-out", o->corpus_out, "Denoised corpus (default OUT/corpus.jsonl)");
    cmd->add_option("--qrels-out", o->qrels_out, "Reconciled qrels (default OUT/qrels.tsv)");
    cmd->callback([o, &common] {
        auto corpus = parse_corpus(o->corpus);
        auto qrels = parse_qrels(o->qrels);
        auto result = denoise(corpus, qrels, {o->strip_titles, o->min_words, common.threads});
        auto corpus_out = o->corpus_out;
        auto qrels_out = o->qrels_out;
        if (!common.out.empty()) {
            fs::create_directories(common.out);
            if (corpus_out.empty()) {
                corpus_out = (fs::path(common.out) / "corpus.jsonl").string();
            }
            if (qrels_out.empty()) {
                qrels_out = (fs::path(common.out) / "qrels.tsv").string();
            }
        }
        if (!corpus_out.empty()) {
            write_corpus(result.corpus, corpus_out);
        }
        if (!qrels_out.empty()) {
            write_qrels(result.qrels, qrels_out);
        }
        auto const& r = result.report;
        std::string tsv = "field\toriginal\tdenoised\n";
        tsv += "documents\t" + std::to_string(r.docs_before) + '\t' + std::to_string(r.docs_after) + '\n';
        tsv += "avg_length\t" + format_double(r.avg_len_before) + '\t' + format_double(r.avg_len_after) + '\n';
        tsv += "avg_length_with_title\t" + format_double(r.avg_len_before_with_title) + '\t'
               + format_double(r.avg_len_after_with_title) + '\n';
        tsv += "judgments\t" + std::to_string(r.judgments_before) + '\t' + std::to_string(r.judgments_after) + '\n';
        for (int g = 2; g >= 0; --g) {
            auto gi = static_cast<std::size_t>(g);
            tsv += "grade_" + std::to_string(g) + '\t' + std::to_string(r.grades_before[gi]) + '\t'
                   + std::to_string(r.grades_after[gi]) + '\n';
        }
        emit(common, "denoise_report", tsv, r.to_json());
    });
}

void add_sweep(CLI::App& app, Common& common)
{
    auto* cmd = app.add_subcommand("sweep", "nDCG and hole across denoising thresholds");
    struct Opts {
        std::string corpus, queries, qrels;
        std::vector<std::string> runs;
        std::vector<std::size_t> thresholds{0, 10, 20, 30, 40, 50};
        int k = 10;
        bool strip_titles = true;
        std::vector<std::string> fields{"title", "body"};
        Bm25Flags bm25;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--corpus", o->corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    cmd->add_option("--queries", o->queries, "Queries JSONL")->required()->check(CLI::ExistingFile);
    cmd->add_option("--qrels", o->qrels, "Qrels TSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--run", o->runs, "External runs, evaluated by deletion")->check(CLI::ExistingFile);
    cmd->add_option("--thresholds", o->thresholds, "Ascending minimum word counts")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--k", o->k, "Cutoff")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_flag("--strip-titles,!--keep-titles", o->strip_titles, "Empty every title")->capture_default_str();
    cmd->add_option("--fields", o->fields, "Fields to index")->delimiter(',');
    o->bm25.add(cmd);
    cmd->callback([o, &common] {
        auto corpus = parse_corpus(o->corpus);
        auto queries = parse_queries(o->queries);
        auto qrels = parse_qrels(o->qrels);
        auto runs = load_runs(o->runs);
        SweepOptions opts;
        opts.strip_titles = o->strip_titles;
        opts.k = o->k;
        opts.params = o->bm25.params();
        opts.fields = parse_fields(o->fields);
        opts.external_runs = pointers(runs);
        opts.threads = common.threads;
        auto rows = threshold_sweep(corpus, queries, qrels, o->thresholds, opts);
        emit(common, "sweep", sweep_to_tsv(rows), sweep_to_json(rows));
    });
}

void add_augment(CLI::App& app, Common&)
{
    auto* cmd = app.add_subcommand("augment", "Apply precomputed expansions or summaries to a corpus");
    struct Opts {
        std::string corpus, expansions, summaries, output;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--corpus", o->corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    auto* src = cmd->add_option_group("source");
    src->add_option("--expansions", o->expansions, "JSONL {_id, queries}")->check(CLI::ExistingFile);
    src->add_option("--summaries", o->summaries, "JSONL {_id, summary}")->check(CLI::ExistingFile);
    src->require_option(1);
    cmd->add_option("--output,-o", o->output, "Corpus to write (default stdout)");
    cmd->callback([o] {
        auto corpus = parse_corpus(o->corpus);
        auto result = o->expansions.empty() ? apply_summaries(corpus, parse_summaries(o->summaries))
                                            : apply_expansions(corpus, parse_expansions(o->expansions));
        if (o->output.empty()) {
            std::cout << format_corpus(result);
        } else {
            write_corpus(result, o->output);
        }
    });
}

void add_axioms(CLI::App& app, Common& common)
{
    auto* cmd = app.add_subcommand("axioms", "Agreement of models with retrieval axioms");
    struct Opts {
        std::string mode = "real";
        std::vector<std::string> runs;
        std::string corpus, queries, vectors, export_pairs;
        std::vector<std::string> scorers{"bm25"};
        std::vector<std::string> axioms;
        std::size_t sample = 250;
        std::uint64_t seed = 42;
        std::size_t top_k = 10;
        std::size_t depth = 50;
        std::vector<int> ms{1, 2, 3, 4};
        bool no_title = false;
        std::vector<std::string> fields{"title", "body"};
        Bm25Flags bm25;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--mode", o->mode, "real: pairs from run top-k; lnc2: synthetic concatenations")
        ->check(CLI::IsMember({"real", "lnc2"}))
        ->capture_default_str();
    cmd->add_option("--runs,--run", o->runs, "Run files")->required()->check(CLI::ExistingFile);
    cmd->add_option("--corpus", o->corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    cmd->add_option("--queries", o->queries, "Queries JSONL")->required()->check(CLI::ExistingFile);
    cmd->add_option("--scorer", o->scorers, "lnc2 mode: bm25 or scores:FILE[=NAME]")->capture_default_str();
    cmd->add_option("--axioms", o->axioms, "Axioms to check (default all available)")->delimiter(',');
    cmd->add_option("--vectors", o->vectors, "Word vectors for STMC1/STMC2")->check(CLI::ExistingFile);
    cmd->add_option("--sample", o->sample, "Sampled (query, doc) pairs")->capture_default_str();
    cmd->add_option("--seed", o->seed, "Random seed")->capture_default_str();
    cmd->add_option("--top-k", o->top_k, "Sampling depth in lnc2 mode")->capture_default_str();
    cmd->add_option("--depth", o->depth, "Pair depth in real mode")->capture_default_str();
    cmd->add_option("--m", o->ms, "Concatenation factors")->delimiter(',')->capture_default_str();
    cmd->add_flag("--no-title", o->no_title, "Ignore titles");
    cmd->add_option("--fields", o->fields, "Fields of the BM25 scorer index")->delimiter(',');
    cmd->add_option("--export-pairs", o->export_pairs, "Write the sampled documents as JSONL");
    o->bm25.add(cmd);
    cmd->callback([o, &common] {
        auto params = o->bm25.params();
        std::vector<Axiom> axioms;
        for (auto const& a : o->axioms) {
            axioms.push_back(parse_axiom(a));
        }
        std::optional<VectorSimilarity> sim;
        if (!o->vectors.empty()) {
            sim = VectorSimilarity::load(o->vectors);
        }
        if (axioms.empty()) {
            if (o->mode == "lnc2") {
                axioms = {Axiom::lnc2};
            } else {
                for (auto a : kAllAxioms) {
                    if (sim || (a != Axiom::stmc1 && a != Axiom::stmc2)) {
                        axioms.push_back(a);
                    }
                }
            }
        }
        bool include_title = !o->no_title;
        auto corpus = parse_corpus(o->corpus);
        auto queries = parse_queries(o->queries);
        auto runs = load_runs(o->runs);
        SimilarityProvider const* provider = sim ? &*sim : nullptr;
        std::vector<AxiomReportRow> rows;
        std::vector<DocPair> exported;

        if (o->mode == "lnc2") {
            Lnc2Options opts;
            opts.sample_size = o->sample;
            opts.ms = o->ms;
            opts.top_k = o->top_k;
            opts.seed = o->seed;
            opts.include_title = include_title;
            auto ptrs = pointers(runs);
            auto sample = lnc2_pairs(ptrs, corpus, queries, opts);
            if (sample.truncated) {
                std::cerr << "warning: only " << sample.available << " pairs available, sampled all\n";
            }
            std::optional<Index> index;
            std::optional<TermStats> stats;
            std::vector<ScoringModel> models;
            for (auto const& s : o->scorers) {
                if (s == "bm25") {
                    if (!index) {
                        auto fields = parse_fields(o->fields);
                        if (!include_title) {
                            std::erase(fields, Field::title);
                        }
                        index = build_index(corpus, fields, common.threads);
                    }
                    models.push_back(bm25_model(*index, params));
                } else if (s.starts_with("scores:")) {
                    auto spec = s.substr(7);
                    auto eq = spec.find('=');
                    auto path = spec.substr(0, eq);
                    auto name = eq == std::string::npos ? fs::path(path).stem().string() : spec.substr(eq + 1);
                    if (!fs::exists(path)) {
                        throw ValidationError("score file " + path + " does not exist");
                    }
                    models.push_back(score_table_model(path, name));
                } else {
                    throw ValidationError("unknown scorer '" + s + "'");
                }
            }
            bool needs_stats = std::any_of(axioms.begin(), axioms.end(), [](Axiom a) { return a != Axiom::lnc2; });
            if (needs_stats) {
                stats = TermStats::from_corpus(corpus, include_title, common.threads);
            }
            TermStats const& st = stats ? *stats : TermStats{};
            for (auto const& model : models) {
                for (auto a : axioms) {
                    rows.push_back(agreement(model, sample.pairs, a, st, provider));
                }
            }
            exported = std::move(sample.pairs);
        } else {
            auto stats = TermStats::from_corpus(corpus, include_title, common.threads);
            for (auto const& run : runs) {
                auto pairs = real_pairs(run, corpus, queries, o->depth, include_title);
                RankingModel model{run.tag(), &run};
                for (auto a : axioms) {
                    rows.push_back(agreement(model, pairs, a, stats, provider));
                }
                exported.insert(exported.end(), pairs.begin(), pairs.end());
            }
        }
        if (!o->export_pairs.empty()) {
            write_file(o->export_pairs, export_pair_documents(exported));
        }
        emit(common, "axioms", axiom_report_tsv(rows), axiom_report_json(rows));
    });
}

void add_pool(CLI::App& app, Common&)
{
    auto* cmd = app.add_subcommand("pool", "Top-k pool over runs");
    struct Opts {
        std::vector<std::string> runs;
        std::string corpus, qrels, output;
        std::size_t k = 10;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--runs,--run", o->runs, "Run files")->required()->check(CLI::ExistingFile);
    cmd->add_option("--k", o->k, "Pool depth")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--corpus", o->corpus, "Corpus JSONL to validate against")->check(CLI::ExistingFile);
    cmd->add_option("--qrels", o->qrels, "Keep only unjudged tasks")->check(CLI::ExistingFile);
    cmd->add_option("--output,-o", o->output, "Pool TSV; provenance goes to OUTPUT.runs.tsv")->required();
    cmd->callback([o] {
        auto runs = load_runs(o->runs);
        auto ptrs = pointers(runs);
        auto pool = pool_top_k(ptrs, o->k);
        if (!o->corpus.empty()) {
            pool.validate(parse_corpus(o->corpus));
        }
        std::size_t total = pool.size();
        if (!o->qrels.empty()) {
            pool = find_holes(pool, parse_qrels(o->qrels));
        }
        write_pool(pool, o->output, o->output + ".runs.tsv");
        std::cout << "pooled " << total << " tasks";
        if (!o->qrels.empty()) {
            std::cout << ", " << pool.size() << " unjudged";
        }
        std::cout << '\n';
    });
}

void add_holes(CLI::App& app, Common&)
{
    auto* cmd = app.add_subcommand("holes", "Unjudged tasks of a pool");
    struct Opts {
        std::string pool, qrels, output;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--pool", o->pool, "Pool TSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--qrels", o->qrels, "Qrels TSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--output,-o", o->output, "Holes TSV (default stdout)");
    cmd->callback([o] {
        std::optional<fs::path> sidecar;
        if (fs::exists(o->pool + ".runs.tsv")) {
            sidecar = o->pool + ".runs.tsv";
        }
        auto holes = find_holes(parse_pool(o->pool, sidecar), parse_qrels(o->qrels));
        if (o->output.empty()) {
            std::cout << format_pool(holes);
        } else {
            write_pool(holes, o->output, o->output + ".runs.tsv");
            std::cout << holes.size() << " holes\n";
        }
    });
}

void add_merge(CLI::App& app, Common& common)
{
    auto* cmd = app.add_subcommand("merge", "Merge post-hoc judgments into qrels");
    struct Opts {
        std::string qrels, judgments, output;
        int raters = 3;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--qrels", o->qrels, "Base qrels TSV")->check(CLI::ExistingFile);
    cmd->add_option("--judgments", o->judgments, "Judgment log JSONL")->required()->check(CLI::ExistingFile);
    cmd->add_option("--raters-per-item", o->raters, "Records per task")->capture_default_str();
    cmd->add_option("--output,-o", o->output, "Merged qrels (default stdout)");
    cmd->callback([o, &common] {
        Qrels base = o->qrels.empty() ? Qrels{} : parse_qrels(o->qrels);
        auto records = read_judgment_log(o->judgments);
        auto result = merge_judgments(base, records, o->raters);
        if (o->output.empty()) {
            std::cout << format_qrels(result.qrels);
        } else {
            write_qrels(result.qrels, o->output);
        }
        nlohmann::ordered_json report{{"judgments_before", base.size()},
                                      {"judgments_after", result.qrels.size()},
                                      {"merged", result.merged},
                                      {"kept_base", result.kept_base},
                                      {"added", {{"2", result.added[2]}, {"1", result.added[1]}, {"0", result.added[0]}}},
                                      {"tasks", result.matrix.items.size()}};
        try {
            report["kappa"] = fleiss_kappa(result.matrix);
        } catch (Error const& e) {
            report["kappa"] = nullptr;
            report["kappa_error"] = e.what();
        }
        std::cerr << report.dump(2) << '\n';
        if (!common.out.empty()) {
            fs::create_directories(common.out);
            write_file(fs::path(common.out) / "merge.json", report.dump(2) + '\n');
        }
    });
}

JudgeServer* g_server = nullptr;

void add_serve(CLI::App& app, Common&)
{
    auto* cmd = app.add_subcommand("serve", "Run the judgment service");
    struct Opts {
        std::string pool, corpus, queries, log, qrels, static_dir, host = "127.0.0.1";
        int raters = 3;
        int port = 8080;
    };
    auto o = std::make_shared<Opts>();
    cmd->add_option("--pool", o->pool, "Pool TSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--corpus", o->corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    cmd->add_option("--queries", o->queries, "Queries JSONL")->required()->check(CLI::ExistingFile);
    cmd->add_option("--raters-per-item", o->raters, "Ratings per task")->capture_default_str();
    cmd->add_option("--log", o->log, "Judgment log JSONL (appended, replayed at start)")->required();
    cmd->add_option("--qrels", o->qrels, "Base qrels for the export")->check(CLI::ExistingFile);
    cmd->add_option("--static", o->static_dir, "Directory served at /")->check(CLI::ExistingDirectory);
    cmd->add_option("--host", o->host, "Bind address")->capture_default_str();
    cmd->add_option("--port", o->port, "Port (0 picks one)")->capture_default_str();
    cmd->callback([o] {
        JudgeConfig config;
        config.raters_per_item = o->raters;
        config.log = o->log;
        if (!o->qrels.empty()) {
            config.base = parse_qrels(o->qrels);
        }
        auto corpus = parse_corpus(o->corpus);
        auto queries = parse_queries(o->queries);
        JudgeSession session(parse_pool(o->pool), corpus, queries, std::move(config));
        std::optional<fs::path> static_dir;
        if (!o->static_dir.empty()) {
            static_dir = o->static_dir;
        }
        JudgeServer server(&session, static_dir);
        int port = server.bind(o->host, o->port);
        g_server = &server;
        std::signal(SIGINT, [](int) { g_server->stop(); });
        std::signal(SIGTERM, [](int) { g_server->stop(); });
        auto p = session.progress();
        std::cerr << "serving " << p.total_tasks << " tasks on http://" << o->host << ':' << port << '\n';
        server.run();
        g_server = nullptr;
    });
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Diagnose, denoise and re-judge retrieval test collections"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--threads", common.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--out", common.out, "Directory for TSV and JSON reports");
    add_index(app, common);
    add_search(app, common);
    add_evaluate(app, common);
    add_denoise(app, common);
    add_sweep(app, common);
    add_augment(app, common);
    add_axioms(app, common);
    add_pool(app, common);
    add_holes(app, common);
    add_merge(app, common);
    add_serve(app, common);
    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        return app.exit(e) == 0 ? 0 : 1;
    } catch (ValidationError const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (UndefinedStatistic const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (DataError const& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
