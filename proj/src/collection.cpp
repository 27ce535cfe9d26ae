#include "qrelkit/collection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "text_util.hpp"

namespace qrelkit {

using json = nlohmann::ordered_json;

std::string read_file(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError(path.string() + ": cannot open file");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return std::move(buffer).str();
}

void write_file(std::filesystem::path const& path, std::string_view content)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError(path.string() + ": cannot open file for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw DataError(path.string() + ": write failed");
    }
}

std::string format_double(double value)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Qrels

void Qrels::add(std::string const& query_id, std::string const& doc_id, Grade grade)
{
    if (!valid_grade(grade)) {
        throw DataError("grade " + std::to_string(grade) + " outside {0,1,2} for (" + query_id + ", "
                        + doc_id + ")");
    }
    if (!insert_if_absent(query_id, doc_id, grade)) {
        throw DataError("duplicate judgment for (" + query_id + ", " + doc_id + ")");
    }
}

bool Qrels::insert_if_absent(std::string const& query_id, std::string const& doc_id, Grade grade)
{
    if (!valid_grade(grade)) {
        throw DataError("grade " + std::to_string(grade) + " outside {0,1,2}");
    }
    auto [it, inserted] = entries_[query_id].try_emplace(doc_id, grade);
    if (inserted) {
        ++size_;
    }
    return inserted;
}

bool Qrels::erase(std::string const& query_id, std::string const& doc_id)
{
    auto q = entries_.find(query_id);
    if (q == entries_.end() || q->second.erase(doc_id) == 0) {
        return false;
    }
    if (q->second.empty()) {
        entries_.erase(q);
    }
    --size_;
    return true;
}

std::optional<Grade> Qrels::grade(std::string_view query_id, std::string_view doc_id) const
{
    auto q = entries_.find(query_id);
    if (q == entries_.end()) {
        return std::nullopt;
    }
    auto d = q->second.find(doc_id);
    if (d == q->second.end()) {
        return std::nullopt;
    }
    return d->second;
}

Qrels::QueryJudgments const* Qrels::for_query(std::string_view query_id) const
{
    auto q = entries_.find(query_id);
    return q == entries_.end() ? nullptr : &q->second;
}

std::array<std::size_t, 3> Qrels::grade_counts() const
{
    std::array<std::size_t, 3> counts{};
    for (auto const& [qid, docs] : entries_) {
        for (auto const& [did, g] : docs) {
            ++counts[static_cast<std::size_t>(g)];
        }
    }
    return counts;
}

// ---------------------------------------------------------------------------
// Run

void sort_scored(std::vector<std::pair<std::string, double>>& scored)
{
    std::sort(scored.begin(), scored.end(), [](auto const& a, auto const& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });
}

void Run::set_ranking(std::string const& query_id, std::vector<std::pair<std::string, double>> scored)
{
    sort_scored(scored);
    Ranking ranking;
    ranking.reserve(scored.size());
    for (std::size_t i = 0; i < scored.size(); ++i) {
        ranking.push_back({std::move(scored[i].first), static_cast<int>(i + 1), scored[i].second});
    }
    std::unordered_set<std::string_view> seen;
    seen.reserve(ranking.size());
    for (auto const& r : ranking) {
        if (!seen.insert(r.doc_id).second) {
            throw DataError("duplicate document '" + r.doc_id + "' in ranking of query '" + query_id + "'");
        }
    }
    rankings_[query_id] = std::move(ranking);
}

Run::Ranking const* Run::ranking(std::string_view query_id) const
{
    auto it = rankings_.find(query_id);
    return it == rankings_.end() ? nullptr : &it->second;
}

// ---------------------------------------------------------------------------
// Parsers

namespace {

json parse_json_line(std::string_view line, std::string const& origin, std::size_t lineno)
{
    try {
        auto value = json::parse(line);
        if (!value.is_object()) {
            throw DataError::at(origin, lineno, "expected a JSON object");
        }
        return value;
    } catch (json::exception const& e) {
        throw DataError::at(origin, lineno, std::string("malformed JSON: ") + e.what());
    }
}

std::string string_field(json const& obj, char const* name, bool required, std::string const& origin,
                         std::size_t lineno)
{
    auto it = obj.find(name);
    if (it == obj.end() || it->is_null()) {
        if (required) {
            throw DataError::at(origin, lineno, std::string("missing field '") + name + "'");
        }
        return {};
    }
    if (it->is_string()) {
        return it->get<std::string>();
    }
    if (it->is_number_integer() && std::string_view(name) == "_id") {
        // Some BEIR exports store numeric ids.
        return it->dump();
    }
    throw DataError::at(origin, lineno, std::string("field '") + name + "' is not a string");
}

template <typename Collection, typename Make>
Collection parse_jsonl(std::string_view text, std::string const& origin, Make make)
{
    Collection out;
    detail::for_each_line(text, [&](std::string_view line, std::size_t lineno) {
        if (detail::is_blank(line)) {
            return;
        }
        auto obj = parse_json_line(line, origin, lineno);
        try {
            out.add(make(obj, lineno));
        } catch (DataError const& e) {
            if (std::string_view(e.what()).starts_with(origin)) {
                throw;
            }
            throw DataError::at(origin, lineno, e.what());
        }
    });
    return out;
}

}  // namespace

Corpus parse_corpus_text(std::string_view text, std::string const& origin)
{
    return parse_jsonl<Corpus>(text, origin, [&](json const& obj, std::size_t lineno) {
        Document doc;
        doc.doc_id = string_field(obj, "_id", true, origin, lineno);
        if (doc.doc_id.empty()) {
            throw DataError::at(origin, lineno, "empty '_id'");
        }
        doc.title = string_field(obj, "title", false, origin, lineno);
        doc.body = string_field(obj, "text", false, origin, lineno);
        if (auto it = obj.find("metadata"); it != obj.end() && !it->is_null()) {
            doc.metadata = it->dump(-1, ' ', false, json::error_handler_t::replace);
        }
        return doc;
    });
}

QuerySet parse_queries_text(std::string_view text, std::string const& origin)
{
    return parse_jsonl<QuerySet>(text, origin, [&](json const& obj, std::size_t lineno) {
        Query q;
        q.query_id = string_field(obj, "_id", true, origin, lineno);
        q.text = string_field(obj, "text", true, origin, lineno);
        if (q.query_id.empty()) {
            throw DataError::at(origin, lineno, "empty '_id'");
        }
        if (q.text.empty()) {
            throw DataError::at(origin, lineno, "empty query text for '" + q.query_id + "'");
        }
        return q;
    });
}

Qrels parse_qrels_text(std::string_view text, std::string const& origin)
{
    Qrels qrels;
    detail::for_each_line(text, [&](std::string_view line, std::size_t lineno) {
        if (detail::is_blank(line)) {
            return;
        }
        if (lineno == 1 && line.starts_with("query-id")) {
            return;
        }
        auto cols = detail::split(line, '\t');
        if (cols.size() != 3) {
            throw DataError::at(origin, lineno,
                                "expected 3 tab-separated columns, got " + std::to_string(cols.size()));
        }
        auto grade = detail::parse_int(cols[2]);
        if (!grade) {
            throw DataError::at(origin, lineno, "non-integer grade '" + std::string(cols[2]) + "'");
        }
        if (!valid_grade(*grade)) {
            throw DataError::at(origin, lineno, "grade " + std::to_string(*grade) + " outside {0,1,2}");
        }
        std::string qid(cols[0]);
        std::string did(cols[1]);
        if (qid.empty() || did.empty()) {
            throw DataError::at(origin, lineno, "empty query or document id");
        }
        if (!qrels.insert_if_absent(qid, did, static_cast<Grade>(*grade))) {
            throw DataError::at(origin, lineno, "duplicate judgment for (" + qid + ", " + did + ")");
        }
    });
    return qrels;
}

Run parse_run_text(std::string_view text, std::string const& origin)
{
    std::map<std::string, std::vector<std::pair<std::string, double>>> grouped;
    std::map<std::string, std::unordered_set<std::string>> seen;
    std::string tag;
    detail::for_each_line(text, [&](std::string_view line, std::size_t lineno) {
        if (detail::is_blank(line)) {
            return;
        }
        auto cols = detail::split_ws(line);
        if (cols.size() != 6) {
            throw DataError::at(origin, lineno,
                                "expected 6 whitespace-separated columns, got " + std::to_string(cols.size()));
        }
        if (!detail::parse_int(cols[3])) {
            throw DataError::at(origin, lineno, "non-numeric rank '" + std::string(cols[3]) + "'");
        }
        auto score = detail::parse_double(cols[4]);
        if (!score || !std::isfinite(*score)) {
            throw DataError::at(origin, lineno, "non-numeric score '" + std::string(cols[4]) + "'");
        }
        std::string qid(cols[0]);
        std::string did(cols[2]);
        if (!seen[qid].insert(did).second) {
            throw DataError::at(origin, lineno, "duplicate document '" + did + "' for query '" + qid + "'");
        }
        if (tag.empty()) {
            tag = std::string(cols[5]);
        }
        grouped[qid].emplace_back(std::move(did), *score);
    });
    Run run(tag);
    for (auto& [qid, scored] : grouped) {
        run.set_ranking(qid, std::move(scored));
    }
    return run;
}

Corpus parse_corpus(std::filesystem::path const& path) { return parse_corpus_text(read_file(path), path.string()); }
QuerySet parse_queries(std::filesystem::path const& path)
{
    return parse_queries_text(read_file(path), path.string());
}
Qrels parse_qrels(std::filesystem::path const& path) { return parse_qrels_text(read_file(path), path.string()); }
Run parse_run(std::filesystem::path const& path) { return parse_run_text(read_file(path), path.string()); }

// ---------------------------------------------------------------------------
// Writers

std::string format_corpus(Corpus const& corpus)
{
    std::string out;
    for (auto const& doc : corpus) {
        json obj;
        obj["_id"] = doc.doc_id;
        obj["title"] = doc.title;
        obj["text"] = doc.body;
        if (!doc.metadata.empty()) {
            obj["metadata"] = json::parse(doc.metadata);
        }
        out += obj.dump(-1, ' ', false, json::error_handler_t::replace);
        out += '\n';
    }
    return out;
}

std::string format_queries(QuerySet const& queries)
{
    std::string out;
    for (auto const& q : queries) {
        json obj;
        obj["_id"] = q.query_id;
        obj["text"] = q.text;
        out += obj.dump(-1, ' ', false, json::error_handler_t::replace);
        out += '\n';
    }
    return out;
}

std::string format_qrels(Qrels const& qrels)
{
    std::string out = "query-id\tcorpus-id\tscore\n";
    for (auto const& [qid, docs] : qrels.by_query()) {
        for (auto const& [did, grade] : docs) {
            out += qid;
            out += '\t';
            out += did;
            out += '\t';
            out += std::to_string(grade);
            out += '\n';
        }
    }
    return out;
}

std::string format_run(Run const& run)
{
    std::string tag = run.tag().empty() ? std::string("run") : run.tag();
    std::string out;
    for (auto const& [qid, ranking] : run.rankings()) {
        for (auto const& r : ranking) {
            out += qid;
            out += " Q0 ";
            out += r.doc_id;
            out += ' ';
            out += std::to_string(r.rank);
            out += ' ';
            out += format_double(r.score);
            out += ' ';
            out += tag;
            out += '\n';
        }
    }
    return out;
}

void write_corpus(Corpus const& corpus, std::filesystem::path const& path) { write_file(path, format_corpus(corpus)); }
void write_queries(QuerySet const& queries, std::filesystem::path const& path)
{
    write_file(path, format_queries(queries));
}
void write_qrels(Qrels const& qrels, std::filesystem::path const& path) { write_file(path, format_qrels(qrels)); }
void write_run(Run const& run, std::filesystem::path const& path) { write_file(path, format_run(run)); }

}  // namespace qrelkit
