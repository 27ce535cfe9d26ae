#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qrelkit/collection.hpp"
#include "qrelkit/metrics.hpp"

namespace qrelkit {

using TaskKey = std::pair<std::string, std::string>;

/// A set of (query_id, doc_id) judgment tasks with the tags of the runs
/// that contributed each task.
class Pool {
  public:
    using Tasks = std::map<TaskKey, std::vector<std::string>>;

    /// Adds the task (if new) and records the tag in its provenance.
    /// An empty tag adds the task without provenance. Returns whether the
    /// task was new.
    bool add(std::string const& query_id, std::string const& doc_id, std::string const& tag = {});

    [[nodiscard]] bool contains(std::string const& query_id, std::string const& doc_id) const;
    [[nodiscard]] std::vector<std::string> const* provenance(std::string const& query_id,
                                                             std::string const& doc_id) const;
    [[nodiscard]] std::size_t size() const noexcept { return tasks_.size(); }
    [[nodiscard]] bool empty() const noexcept { return tasks_.empty(); }
    [[nodiscard]] Tasks const& tasks() const noexcept { return tasks_; }

    /// Throws DataError naming the first task whose document is not in the corpus.
    void validate(Corpus const& corpus) const;

    bool operator==(Pool const&) const = default;

  private:
    Tasks tasks_;
};

/// Union over runs and queries of each ranking's top-k documents. Run tags
/// must be unique when there is more than one run.
[[nodiscard]] Pool pool_top_k(std::span<Run const* const> runs, std::size_t k);

/// Tasks of the pool with no qrels entry.
[[nodiscard]] Pool find_holes(Pool const& pool, Qrels const& qrels);

/// BEIR qrels TSV with the placeholder score 0 on every task.
[[nodiscard]] std::string format_pool(Pool const& pool);
/// TSV `query-id corpus-id runs` with comma-separated run tags.
[[nodiscard]] std::string format_pool_provenance(Pool const& pool);
/// Reads a pool in qrels format; the score column is ignored. When a
/// provenance sidecar is given, its tags are attached.
[[nodiscard]] Pool parse_pool_text(std::string_view text, std::string const& origin = "<memory>");
void attach_provenance_text(Pool& pool, std::string_view text, std::string const& origin = "<memory>");
[[nodiscard]] Pool parse_pool(std::filesystem::path const& path,
                              std::optional<std::filesystem::path> const& provenance = std::nullopt);
void write_pool(Pool const& pool, std::filesystem::path const& path,
                std::optional<std::filesystem::path> const& provenance = std::nullopt);

// ---------------------------------------------------------------------------
// Judgments

struct JudgmentRecord {
    std::string query_id;
    std::string doc_id;
    std::string annotator;
    Grade grade = 0;
    /// ISO 8601 UTC, e.g. 2024-05-01T12:00:00Z.
    std::string timestamp;

    bool operator==(JudgmentRecord const&) const = default;
};

/// Current UTC time in the record timestamp format.
[[nodiscard]] std::string utc_timestamp();

/// One JSON object `{query_id, doc_id, annotator, grade, timestamp}` without a newline.
[[nodiscard]] std::string format_judgment(JudgmentRecord const& record);
[[nodiscard]] JudgmentRecord parse_judgment(std::string_view line, std::string const& origin = "<memory>",
                                            std::size_t lineno = 1);
[[nodiscard]] std::vector<JudgmentRecord> parse_judgments_text(std::string_view text,
                                                               std::string const& origin = "<memory>");
/// A missing file reads as an empty log.
[[nodiscard]] std::vector<JudgmentRecord> read_judgment_log(std::filesystem::path const& path);
[[nodiscard]] std::string format_judgments(std::span<JudgmentRecord const> records);

/// Majority vote; a tie between the most frequent grades goes to the median
/// of all grades, rounded down. Throws ValidationError on an empty span.
[[nodiscard]] Grade aggregate_grades(std::span<Grade const> grades);

struct MergeResult {
    Qrels qrels;
    /// One item per task (id `query_id<TAB>doc_id`), in task order.
    RatingMatrix matrix;
    /// Tasks whose aggregated grade entered the qrels.
    std::size_t merged = 0;
    /// Tasks already judged in the base qrels; their base grade is kept.
    std::size_t kept_base = 0;
    /// Merged tasks per aggregated grade.
    std::array<std::size_t, 3> added{};
};

/// Aggregates the records of each task and adds the result to a copy of
/// the base qrels without overwriting existing entries. Every task must
/// have exactly raters_per_item records from distinct annotators.
[[nodiscard]] MergeResult merge_judgments(Qrels const& base, std::span<JudgmentRecord const> records,
                                          int raters_per_item);

}  // namespace qrelkit
