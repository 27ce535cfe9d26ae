#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qrelkit/axioms.hpp"
#include "qrelkit/bm25.hpp"
#include "qrelkit/collection.hpp"
#include "qrelkit/denoise.hpp"
#include "qrelkit/error.hpp"
#include "qrelkit/index.hpp"
#include "qrelkit/metrics.hpp"
#include "qrelkit/pooling.hpp"
#include "qrelkit/tokenizer.hpp"

namespace py = pybind11;
using namespace qrelkit;

namespace {

py::dict report_dict(MetricReport const& r)
{
    py::dict d;
    d["metric"] = r.metric_name;
    d["k"] = r.k;
    d["per_query"] = r.per_query;
    d["mean"] = r.mean;
    d["micro"] = r.micro ? py::cast(*r.micro) : py::none();
    d["flagged"] = r.flagged;
    return d;
}

Bm25Params make_params(double k1, double b, double title_weight, double body_weight)
{
    Bm25Params p;
    p.k1 = k1;
    p.b = b;
    p.field_weights = {title_weight, body_weight};
    p.validate();
    return p;
}

Run run_from_dict(std::map<std::string, std::vector<std::pair<std::string, double>>> const& rankings,
                  std::string const& tag)
{
    Run run(tag);
    for (auto const& [qid, scored] : rankings) {
        run.set_ranking(qid, scored);
    }
    return run;
}

std::map<std::string, std::vector<std::pair<std::string, double>>> run_to_dict(Run const& run)
{
    std::map<std::string, std::vector<std::pair<std::string, double>>> out;
    for (auto const& [qid, ranking] : run.rankings()) {
        auto& v = out[qid];
        for (auto const& r : ranking) {
            v.emplace_back(r.doc_id, r.score);
        }
    }
    return out;
}

Qrels qrels_from_dict(std::map<std::string, std::map<std::string, int>> const& d)
{
    Qrels q;
    for (auto const& [qid, docs] : d) {
        for (auto const& [did, g] : docs) {
            q.add(qid, did, g);
        }
    }
    return q;
}

std::map<std::string, std::map<std::string, int>> qrels_to_dict(Qrels const& q)
{
    std::map<std::string, std::map<std::string, int>> out;
    for (auto const& [qid, docs] : q.by_query()) {
        for (auto const& [did, g] : docs) {
            out[qid][did] = g;
        }
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Core routines of qrelkit";

    // Translators run newest first, so the subclasses are registered last.
    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<UndefinedStatistic>(m, "UndefinedStatistic", base.ptr());

    m.def("tokenize", [](std::string_view text) { return tokenize(text).tokens; }, py::arg("text"));
    m.def("count_words", &count_words, py::arg("text"));

    py::class_<Document>(m, "Document")
        .def(py::init<>())
        .def(py::init([](std::string id, std::string title, std::string body) {
                 return Document{std::move(id), std::move(title), std::move(body), {}};
             }),
             py::arg("doc_id"), py::arg("title") = "", py::arg("body") = "")
        .def_readwrite("doc_id", &Document::doc_id)
        .def_readwrite("title", &Document::title)
        .def_readwrite("body", &Document::body);

    py::class_<Corpus>(m, "Corpus")
        .def(py::init<>())
        .def("add", [](Corpus& c, Document d) { c.add(std::move(d)); })
        .def("__len__", &Corpus::size)
        .def("__contains__", [](Corpus const& c, std::string const& id) { return c.contains(id); })
        .def("__getitem__",
             [](Corpus const& c, std::string const& id) {
                 auto const* d = c.find(id);
                 if (d == nullptr) {
                     throw py::key_error(id);
                 }
                 return *d;
             })
        .def("ids", [](Corpus const& c) {
            std::vector<std::string> ids;
            for (auto const& d : c) {
                ids.push_back(d.doc_id);
            }
            return ids;
        });

    py::class_<QuerySet>(m, "QuerySet")
        .def(py::init<>())
        .def("add", [](QuerySet& q, std::string id, std::string text) { q.add(Query{std::move(id), std::move(text)}); })
        .def("__len__", &QuerySet::size);

    py::class_<Qrels>(m, "Qrels")
        .def(py::init<>())
        .def(py::init(&qrels_from_dict), py::arg("judgments"))
        .def("add", &Qrels::add)
        .def("grade", [](Qrels const& q, std::string const& qid, std::string const& did) { return q.grade(qid, did); })
        .def("__len__", &Qrels::size)
        .def("to_dict", &qrels_to_dict)
        .def("__eq__", [](Qrels const& a, Qrels const& b) { return a == b; });

    py::class_<Run>(m, "Run")
        .def(py::init(&run_from_dict), py::arg("rankings"), py::arg("tag") = "run")
        .def_property_readonly("tag", &Run::tag)
        .def("to_dict", &run_to_dict)
        .def("__len__", &Run::num_queries);

    m.def("parse_corpus", py::overload_cast<std::filesystem::path const&>(&parse_corpus));
    m.def("parse_queries", py::overload_cast<std::filesystem::path const&>(&parse_queries));
    m.def("parse_qrels", py::overload_cast<std::filesystem::path const&>(&parse_qrels));
    m.def("parse_run", py::overload_cast<std::filesystem::path const&>(&parse_run));
    m.def("parse_corpus_text", &parse_corpus_text, py::arg("text"), py::arg("origin") = "<memory>");
    m.def("parse_queries_text", &parse_queries_text, py::arg("text"), py::arg("origin") = "<memory>");
    m.def("parse_qrels_text", &parse_qrels_text, py::arg("text"), py::arg("origin") = "<memory>");
    m.def("parse_run_text", &parse_run_text, py::arg("text"), py::arg("origin") = "<memory>");
    m.def("format_qrels", &format_qrels);
    m.def("format_run", &format_run);
    m.def("format_corpus", &format_corpus);

    py::class_<Index>(m, "Index").def_property_readonly("num_docs", &Index::num_docs);
    m.def(
        "build_index",
        [](Corpus const& corpus, std::vector<std::string> const& fields, unsigned threads) {
            std::vector<Field> fs;
            for (auto const& f : fields) {
                fs.push_back(parse_field(f));
            }
            return build_index(corpus, fs, threads);
        },
        py::arg("corpus"), py::arg("fields") = std::vector<std::string>{"title", "body"}, py::arg("threads") = 1);

    m.def("bm25_idf", &bm25_idf, py::arg("num_docs"), py::arg("df"));
    m.def(
        "bm25_score",
        [](Index const& index, std::string const& query, std::string const& doc_id, double k1, double b) {
            auto tokens = tokenize(query).tokens;
            return bm25_score(index, make_params(k1, b, 1.0, 1.0), tokens, doc_id);
        },
        py::arg("index"), py::arg("query"), py::arg("doc_id"), py::arg("k1") = 0.9, py::arg("b") = 0.4);
    m.def(
        "search",
        [](Index const& index, std::string const& query, std::size_t k, double k1, double b) {
            std::vector<std::pair<std::string, double>> out;
            for (auto const& s : search(index, make_params(k1, b, 1.0, 1.0), std::string_view(query), k)) {
                out.emplace_back(s.doc_id, s.score);
            }
            return out;
        },
        py::arg("index"), py::arg("query"), py::arg("k") = 10, py::arg("k1") = 0.9, py::arg("b") = 0.4);
    m.def(
        "search_run",
        [](Index const& index, QuerySet const& queries, std::size_t k, std::string tag, unsigned threads) {
            return search_run(index, Bm25Params{}, queries, k, std::move(tag), threads);
        },
        py::arg("index"), py::arg("queries"), py::arg("k") = 1000, py::arg("tag") = "bm25", py::arg("threads") = 1);

    m.def(
        "ndcg_at_k", [](Run const& r, Qrels const& q, int k) { return report_dict(ndcg_at_k(r, q, k)); },
        py::arg("run"), py::arg("qrels"), py::arg("k") = 10);
    m.def(
        "hole_at_k", [](Run const& r, Qrels const& q, int k) { return report_dict(hole_at_k(r, q, k)); },
        py::arg("run"), py::arg("qrels"), py::arg("k") = 10);
    m.def(
        "error_rate_at_k",
        [](Run const& r, Qrels const& q, Corpus const& c, int k, std::size_t min_words) {
            return report_dict(error_rate_at_k(r, q, c, k, min_words));
        },
        py::arg("run"), py::arg("qrels"), py::arg("corpus"), py::arg("k") = 10, py::arg("min_words") = 20);
    m.def("spearman", [](std::vector<double> const& x, std::vector<double> const& y) { return spearman(x, y); });
    m.def(
        "fleiss_kappa",
        [](std::vector<std::map<int, int>> const& counts, int raters) {
            RatingMatrix matrix;
            matrix.raters_per_item = raters;
            for (std::size_t i = 0; i < counts.size(); ++i) {
                matrix.items.push_back({std::to_string(i), counts[i]});
            }
            return fleiss_kappa(matrix);
        },
        py::arg("counts"), py::arg("raters_per_item"));

    m.def(
        "denoise",
        [](Corpus const& corpus, Qrels const& qrels, std::size_t min_words, bool strip, unsigned threads) {
            auto r = denoise(corpus, qrels, {strip, min_words, threads});
            return py::make_tuple(std::move(r.corpus), std::move(r.qrels), py::module_::import("json").attr("loads")(r.report.to_json()));
        },
        py::arg("corpus"), py::arg("qrels"), py::arg("min_words") = 20, py::arg("strip_titles") = true,
        py::arg("threads") = 1);

    m.def(
        "pool_top_k",
        [](std::vector<Run> const& runs, std::size_t k) {
            std::vector<Run const*> ptrs;
            for (auto const& r : runs) {
                ptrs.push_back(&r);
            }
            std::map<std::pair<std::string, std::string>, std::vector<std::string>> out;
            auto pool = pool_top_k(ptrs, k);
            for (auto const& [key, tags] : pool.tasks()) {
                out[key] = tags;
            }
            return out;
        },
        py::arg("runs"), py::arg("k"));
    m.def(
        "merge_judgments",
        [](Qrels const& base, std::vector<std::tuple<std::string, std::string, std::string, int>> const& records,
           int raters) {
            std::vector<JudgmentRecord> recs;
            for (auto const& [qid, did, annotator, grade] : records) {
                recs.push_back({qid, did, annotator, grade, "1970-01-01T00:00:00Z"});
            }
            auto result = merge_judgments(base, recs, raters);
            return py::make_tuple(std::move(result.qrels), result.merged);
        },
        py::arg("base"), py::arg("records"), py::arg("raters_per_item") = 3);

    m.def(
        "lnc2_agreement",
        [](Corpus const& corpus, QuerySet const& queries, std::vector<Run> const& runs, std::size_t sample,
           std::uint64_t seed) {
            std::vector<Run const*> ptrs;
            for (auto const& r : runs) {
                ptrs.push_back(&r);
            }
            Lnc2Options opts;
            opts.sample_size = sample;
            opts.seed = seed;
            auto pairs = lnc2_pairs(ptrs, corpus, queries, opts);
            auto index = build_index(corpus);
            auto row = agreement(bm25_model(index, Bm25Params{}), pairs.pairs, Axiom::lnc2, TermStats{});
            return py::make_tuple(row.applicable, row.agreements);
        },
        py::arg("corpus"), py::arg("queries"), py::arg("runs"), py::arg("sample") = 250, py::arg("seed") = 42);
}
