#include "qrelkit/augment.hpp"

#include <json.hpp>

#include "qrelkit/error.hpp"
#include "text_util.hpp"

namespace qrelkit {

using json = nlohmann::json;

namespace {

template <typename Fn>
void for_each_object(std::string_view text, std::string const& origin, Fn&& fn)
{
    detail::for_each_line(text, [&](std::string_view line, std::size_t lineno) {
        if (detail::is_blank(line)) {
            return;
        }
        json obj;
        try {
            obj = json::parse(line);
        } catch (json::exception const& e) {
            throw DataError::at(origin, lineno, std::string("malformed JSON: ") + e.what());
        }
        if (!obj.is_object()) {
            throw DataError::at(origin, lineno, "expected a JSON object");
        }
        auto id = obj.find("_id");
        if (id == obj.end() || !(id->is_string() || id->is_number_integer())) {
            throw DataError::at(origin, lineno, "missing '_id'");
        }
        std::string doc_id = id->is_string() ? id->get<std::string>() : id->dump();
        fn(doc_id, obj, lineno);
    });
}

void check_known(Corpus const& corpus, std::string const& doc_id, char const* what)
{
    if (!corpus.contains(doc_id)) {
        throw DataError(std::string(what) + " refers to unknown document '" + doc_id + "'");
    }
}

}  // namespace

ExpansionFile parse_expansions_text(std::string_view text, std::string const& origin)
{
    ExpansionFile out;
    for_each_object(text, origin, [&](std::string const& doc_id, json const& obj, std::size_t lineno) {
        auto queries = obj.find("queries");
        if (queries == obj.end() || !queries->is_array()) {
            throw DataError::at(origin, lineno, "missing 'queries' array");
        }
        std::vector<std::string> list;
        for (auto const& q : *queries) {
            if (!q.is_string()) {
                throw DataError::at(origin, lineno, "non-string generated query");
            }
            list.push_back(q.get<std::string>());
        }
        if (!out.emplace(doc_id, std::move(list)).second) {
            throw DataError::at(origin, lineno, "duplicate id '" + doc_id + "'");
        }
    });
    return out;
}

SummaryFile parse_summaries_text(std::string_view text, std::string const& origin)
{
    SummaryFile out;
    for_each_object(text, origin, [&](std::string const& doc_id, json const& obj, std::size_t lineno) {
        auto summary = obj.find("summary");
        if (summary == obj.end() || !summary->is_string() || summary->get_ref<std::string const&>().empty()) {
            throw DataError::at(origin, lineno, "missing or empty 'summary'");
        }
        if (!out.emplace(doc_id, summary->get<std::string>()).second) {
            throw DataError::at(origin, lineno, "duplicate id '" + doc_id + "'");
        }
    });
    return out;
}

ExpansionFile parse_expansions(std::filesystem::path const& path)
{
    return parse_expansions_text(read_file(path), path.string());
}

SummaryFile parse_summaries(std::filesystem::path const& path)
{
    return parse_summaries_text(read_file(path), path.string());
}

Corpus apply_expansions(Corpus const& corpus, ExpansionFile const& expansions)
{
    for (auto const& [doc_id, queries] : expansions) {
        check_known(corpus, doc_id, "expansion");
    }
    Corpus out;
    out.reserve(corpus.size());
    for (auto doc : corpus) {
        auto it = expansions.find(doc.doc_id);
        if (it != expansions.end()) {
            for (auto const& q : it->second) {
                doc.body += ' ';
                doc.body += q;
            }
        }
        out.add(std::move(doc));
    }
    return out;
}

Corpus apply_summaries(Corpus const& corpus, SummaryFile const& summaries)
{
    for (auto const& [doc_id, summary] : summaries) {
        check_known(corpus, doc_id, "summary");
    }
    Corpus out;
    out.reserve(corpus.size());
    for (auto doc : corpus) {
        if (auto it = summaries.find(doc.doc_id); it != summaries.end()) {
            doc.body = it->second;
        }
        out.add(std::move(doc));
    }
    return out;
}

}  // namespace qrelkit
