#include "qrelkit/pooling.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <set>

#include <json.hpp>

#include "qrelkit/error.hpp"
#include "text_util.hpp"

namespace qrelkit {

using json = nlohmann::ordered_json;

bool Pool::add(std::string const& query_id, std::string const& doc_id, std::string const& tag)
{
    auto [it, inserted] = tasks_.try_emplace(TaskKey{query_id, doc_id});
    if (!tag.empty()) {
        auto& tags = it->second;
        auto pos = std::lower_bound(tags.begin(), tags.end(), tag);
        if (pos == tags.end() || *pos != tag) {
            tags.insert(pos, tag);
        }
    }
    return inserted;
}

bool Pool::contains(std::string const& query_id, std::string const& doc_id) const
{
    return tasks_.contains(TaskKey{query_id, doc_id});
}

std::vector<std::string> const* Pool::provenance(std::string const& query_id, std::string const& doc_id) const
{
    auto it = tasks_.find(TaskKey{query_id, doc_id});
    return it == tasks_.end() ? nullptr : &it->second;
}

void Pool::validate(Corpus const& corpus) const
{
    for (auto const& [key, tags] : tasks_) {
        if (!corpus.contains(key.second)) {
            throw DataError("pool task (" + key.first + ", " + key.second + "): document not in corpus");
        }
    }
}

Pool pool_top_k(std::span<Run const* const> runs, std::size_t k)
{
    if (k == 0) {
        throw ValidationError("pool depth k must be >= 1");
    }
    if (runs.size() > 1) {
        std::set<std::string> tags;
        for (auto const* run : runs) {
            if (!tags.insert(run->tag()).second) {
                throw ValidationError("duplicate run tag '" + run->tag() + "'");
            }
        }
    }
    Pool pool;
    for (auto const* run : runs) {
        std::string tag = run->tag().empty() ? std::string("run") : run->tag();
        for (auto const& [qid, ranking] : run->rankings()) {
            for (std::size_t i = 0; i < std::min(k, ranking.size()); ++i) {
                pool.add(qid, ranking[i].doc_id, tag);
            }
        }
    }
    return pool;
}

Pool find_holes(Pool const& pool, Qrels const& qrels)
{
    Pool out;
    for (auto const& [key, tags] : pool.tasks()) {
        if (qrels.contains(key.first, key.second)) {
            continue;
        }
        out.add(key.first, key.second);
        for (auto const& tag : tags) {
            out.add(key.first, key.second, tag);
        }
    }
    return out;
}

std::string format_pool(Pool const& pool)
{
    std::string out = "query-id\tcorpus-id\tscore\n";
    for (auto const& [key, tags] : pool.tasks()) {
        out += key.first + '\t' + key.second + "\t0\n";
    }
    return out;
}

std::string format_pool_provenance(Pool const& pool)
{
    std::string out = "query-id\tcorpus-id\truns\n";
    for (auto const& [key, tags] : pool.tasks()) {
        out += key.first + '\t' + key.second + '\t';
        for (std::size_t i = 0; i < tags.size(); ++i) {
            out += (i == 0 ? "" : ",") + tags[i];
        }
        out += '\n';
    }
    return out;
}

Pool parse_pool_text(std::string_view text, std::string const& origin)
{
    Pool pool;
    detail::for_each_line(text, [&](std::string_view line, std::size_t lineno) {
        if (detail::is_blank(line) || (lineno == 1 && line.starts_with("query-id"))) {
            return;
        }
        auto cols = detail::split(line, '\t');
        if (cols.size() != 3 && cols.size() != 2) {
            throw DataError::at(origin, lineno, "expected `query-id corpus-id [score]`");
        }
        if (cols[0].empty() || cols[1].empty()) {
            throw DataError::at(origin, lineno, "empty query or document id");
        }
        if (!pool.add(std::string(cols[0]), std::string(cols[1]))) {
            throw DataError::at(origin, lineno,
                                "duplicate task (" + std::string(cols[0]) + ", " + std::string(cols[1]) + ")");
        }
    });
    return pool;
}

void attach_provenance_text(Pool& pool, std::string_view text, std::string const& origin)
{
    detail::for_each_line(text, [&](std::string_view line, std::size_t lineno) {
        if (detail::is_blank(line) || (lineno == 1 && line.starts_with("query-id"))) {
            return;
        }
        auto cols = detail::split(line, '\t');
        if (cols.size() != 3) {
            throw DataError::at(origin, lineno, "expected `query-id corpus-id runs`");
        }
        std::string qid(cols[0]);
        std::string did(cols[1]);
        if (!pool.contains(qid, did)) {
            throw DataError::at(origin, lineno, "task (" + qid + ", " + did + ") is not in the pool");
        }
        if (cols[2].empty()) {
            return;
        }
        for (auto tag : detail::split(cols[2], ',')) {
            pool.add(qid, did, std::string(tag));
        }
    });
}

Pool parse_pool(std::filesystem::path const& path, std::optional<std::filesystem::path> const& provenance)
{
    auto pool = parse_pool_text(read_file(path), path.string());
    if (provenance) {
        attach_provenance_text(pool, read_file(*provenance), provenance->string());
    }
    return pool;
}

void write_pool(Pool const& pool, std::filesystem::path const& path,
                std::optional<std::filesystem::path> const& provenance)
{
    write_file(path, format_pool(pool));
    if (provenance) {
        write_file(*provenance, format_pool_provenance(pool));
    }
}

// ---------------------------------------------------------------------------
// Judgments

std::string utc_timestamp()
{
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string format_judgment(JudgmentRecord const& r)
{
    json obj{{"query_id", r.query_id},
             {"doc_id", r.doc_id},
             {"annotator", r.annotator},
             {"grade", r.grade},
             {"timestamp", r.timestamp}};
    return obj.dump(-1, ' ', false, json::error_handler_t::replace);
}

JudgmentRecord parse_judgment(std::string_view line, std::string const& origin, std::size_t lineno)
{
    json obj;
    try {
        obj = json::parse(line);
    } catch (json::parse_error const& e) {
        throw DataError::at(origin, lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) {
        throw DataError::at(origin, lineno, "expected a JSON object");
    }
    auto text_field = [&](char const* name) {
        auto it = obj.find(name);
        if (it == obj.end() || !it->is_string() || it->get_ref<std::string const&>().empty()) {
            throw DataError::at(origin, lineno, std::string("missing or empty string field '") + name + "'");
        }
        return it->get<std::string>();
    };
    JudgmentRecord r;
    r.query_id = text_field("query_id");
    r.doc_id = text_field("doc_id");
    r.annotator = text_field("annotator");
    r.timestamp = text_field("timestamp");
    auto g = obj.find("grade");
    if (g == obj.end() || !g->is_number_integer() || !valid_grade(g->get<long long>())) {
        throw DataError::at(origin, lineno, "grade must be an integer in {0,1,2}");
    }
    r.grade = g->get<Grade>();
    return r;
}

std::vector<JudgmentRecord> parse_judgments_text(std::string_view text, std::string const& origin)
{
    std::vector<JudgmentRecord> out;
    detail::for_each_line(text, [&](std::string_view line, std::size_t lineno) {
        if (!detail::is_blank(line)) {
            out.push_back(parse_judgment(line, origin, lineno));
        }
    });
    return out;
}

std::vector<JudgmentRecord> read_judgment_log(std::filesystem::path const& path)
{
    if (!std::filesystem::exists(path)) {
        return {};
    }
    return parse_judgments_text(read_file(path), path.string());
}

std::string format_judgments(std::span<JudgmentRecord const> records)
{
    std::string out;
    for (auto const& r : records) {
        out += format_judgment(r);
        out += '\n';
    }
    return out;
}

Grade aggregate_grades(std::span<Grade const> grades)
{
    if (grades.empty()) {
        throw ValidationError("cannot aggregate an empty set of grades");
    }
    std::array<int, kMaxGrade + 1> counts{};
    for (auto g : grades) {
        if (!valid_grade(g)) {
            throw ValidationError("grade " + std::to_string(g) + " outside {0,1,2}");
        }
        ++counts[static_cast<std::size_t>(g)];
    }
    int best = *std::max_element(counts.begin(), counts.end());
    if (std::count(counts.begin(), counts.end(), best) == 1) {
        return static_cast<Grade>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    }
    std::vector<Grade> sorted(grades.begin(), grades.end());
    std::sort(sorted.begin(), sorted.end());
    auto n = sorted.size();
    // floor((a + b) / 2) on non-negative grades
    return n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2;
}

MergeResult merge_judgments(Qrels const& base, std::span<JudgmentRecord const> records, int raters_per_item)
{
    if (raters_per_item < 1) {
        throw ValidationError("raters per item must be >= 1");
    }
    std::map<TaskKey, std::vector<JudgmentRecord const*>> by_task;
    for (auto const& r : records) {
        auto& list = by_task[TaskKey{r.query_id, r.doc_id}];
        for (auto const* other : list) {
            if (other->annotator == r.annotator) {
                throw DataError("annotator '" + r.annotator + "' judged (" + r.query_id + ", " + r.doc_id
                                + ") more than once");
            }
        }
        list.push_back(&r);
    }
    std::vector<std::string> wrong;
    for (auto const& [key, list] : by_task) {
        if (static_cast<int>(list.size()) != raters_per_item) {
            wrong.push_back("(" + key.first + ", " + key.second + "): " + std::to_string(list.size()));
        }
    }
    if (!wrong.empty()) {
        std::string msg = std::to_string(wrong.size()) + " task(s) without exactly "
                          + std::to_string(raters_per_item) + " records:";
        for (std::size_t i = 0; i < wrong.size() && i < 20; ++i) {
            msg += ' ' + wrong[i];
        }
        if (wrong.size() > 20) {
            msg += " ...";
        }
        throw ValidationError(msg);
    }

    MergeResult out;
    out.qrels = base;
    out.matrix.raters_per_item = raters_per_item;
    out.matrix.items.reserve(by_task.size());
    for (auto const& [key, list] : by_task) {
        std::vector<Grade> grades;
        RatingMatrix::Item item;
        item.item_id = key.first + '\t' + key.second;
        for (auto const* r : list) {
            grades.push_back(r->grade);
            ++item.counts[r->grade];
        }
        out.matrix.items.push_back(std::move(item));
        auto grade = aggregate_grades(grades);
        if (out.qrels.insert_if_absent(key.first, key.second, grade)) {
            ++out.merged;
            ++out.added[static_cast<std::size_t>(grade)];
        } else {
            ++out.kept_base;
        }
    }
    return out;
}

}  // namespace qrelkit
