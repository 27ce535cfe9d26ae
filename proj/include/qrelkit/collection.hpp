#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qrelkit/error.hpp"

namespace qrelkit {

/// One corpus entry. In argument corpora the title holds the conclusion
/// and the body holds the premise.
struct Document {
    std::string doc_id;
    std::string title;
    std::string body;
    /// Opaque compact JSON object text, empty when the input had none.
    std::string metadata;

    bool operator==(Document const&) const = default;
};

struct Query {
    std::string query_id;
    std::string text;

    bool operator==(Query const&) const = default;
};

/// Insertion-ordered collection keyed by a unique id.
template <typename T, std::string T::*Key>
class KeyedCollection {
  public:
    using value_type = T;
    using const_iterator = typename std::vector<T>::const_iterator;

    /// Throws DataError on a duplicate id.
    void add(T item)
    {
        auto [it, inserted] = positions_.try_emplace(item.*Key, items_.size());
        if (!inserted) {
            throw DataError("duplicate id '" + item.*Key + "'");
        }
        items_.push_back(std::move(item));
    }

    [[nodiscard]] T const* find(std::string_view id) const
    {
        auto it = positions_.find(std::string(id));
        return it == positions_.end() ? nullptr : &items_[it->second];
    }
    [[nodiscard]] bool contains(std::string_view id) const { return find(id) != nullptr; }
    [[nodiscard]] std::size_t size() const noexcept { return items_.size(); }
    [[nodiscard]] bool empty() const noexcept { return items_.empty(); }
    [[nodiscard]] T const& operator[](std::size_t i) const { return items_[i]; }
    [[nodiscard]] const_iterator begin() const noexcept { return items_.begin(); }
    [[nodiscard]] const_iterator end() const noexcept { return items_.end(); }
    void reserve(std::size_t n)
    {
        items_.reserve(n);
        positions_.reserve(n);
    }

    bool operator==(KeyedCollection const& other) const { return items_ == other.items_; }

  private:
    std::vector<T> items_;
    std::unordered_map<std::string, std::size_t> positions_;
};

using Corpus = KeyedCollection<Document, &Document::doc_id>;
using QuerySet = KeyedCollection<Query, &Query::query_id>;

using Grade = int;
inline constexpr Grade kMinGrade = 0;
inline constexpr Grade kMaxGrade = 2;

[[nodiscard]] constexpr bool valid_grade(long long g) noexcept { return g >= kMinGrade && g <= kMaxGrade; }

/// Graded judgments, one per (query, document).
class Qrels {
  public:
    using QueryJudgments = std::map<std::string, Grade, std::less<>>;

    /// Throws DataError on a duplicate pair or a grade outside {0,1,2}.
    void add(std::string const& query_id, std::string const& doc_id, Grade grade);
    /// Inserts unless the pair exists; returns whether it was inserted.
    bool insert_if_absent(std::string const& query_id, std::string const& doc_id, Grade grade);
    bool erase(std::string const& query_id, std::string const& doc_id);

    [[nodiscard]] std::optional<Grade> grade(std::string_view query_id, std::string_view doc_id) const;
    [[nodiscard]] bool contains(std::string_view query_id, std::string_view doc_id) const
    {
        return grade(query_id, doc_id).has_value();
    }
    /// Judgments of one query, or nullptr when the query has none.
    [[nodiscard]] QueryJudgments const* for_query(std::string_view query_id) const;

    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] std::map<std::string, QueryJudgments, std::less<>> const& by_query() const noexcept
    {
        return entries_;
    }
    /// Number of judgments per grade, indexed by grade.
    [[nodiscard]] std::array<std::size_t, 3> grade_counts() const;

    bool operator==(Qrels const&) const = default;

  private:
    std::map<std::string, QueryJudgments, std::less<>> entries_;
    std::size_t size_ = 0;
};

struct RankedDoc {
    std::string doc_id;
    int rank = 0;
    double score = 0.0;

    bool operator==(RankedDoc const&) const = default;
};

/// A system's ranked output. Rankings are always normalized: ordered by
/// score descending then doc_id ascending, ranks 1..n.
class Run {
  public:
    using Ranking = std::vector<RankedDoc>;

    Run() = default;
    explicit Run(std::string tag) : tag_(std::move(tag)) {}

    /// Replaces the ranking of a query after normalizing it. Throws
    /// DataError on duplicate doc ids.
    void set_ranking(std::string const& query_id, std::vector<std::pair<std::string, double>> scored);

    [[nodiscard]] std::string const& tag() const noexcept { return tag_; }
    void set_tag(std::string tag) { tag_ = std::move(tag); }
    [[nodiscard]] Ranking const* ranking(std::string_view query_id) const;
    [[nodiscard]] std::map<std::string, Ranking, std::less<>> const& rankings() const noexcept
    {
        return rankings_;
    }
    [[nodiscard]] std::size_t num_queries() const noexcept { return rankings_.size(); }

    bool operator==(Run const&) const = default;

  private:
    std::string tag_;
    std::map<std::string, Ranking, std::less<>> rankings_;
};

/// Orders (doc_id, score) pairs by score desc, doc_id asc.
void sort_scored(std::vector<std::pair<std::string, double>>& scored);

[[nodiscard]] Corpus parse_corpus(std::filesystem::path const& path);
[[nodiscard]] QuerySet parse_queries(std::filesystem::path const& path);
[[nodiscard]] Qrels parse_qrels(std::filesystem::path const& path);
[[nodiscard]] Run parse_run(std::filesystem::path const& path);

[[nodiscard]] Corpus parse_corpus_text(std::string_view text, std::string const& origin = "<memory>");
[[nodiscard]] QuerySet parse_queries_text(std::string_view text, std::string const& origin = "<memory>");
[[nodiscard]] Qrels parse_qrels_text(std::string_view text, std::string const& origin = "<memory>");
[[nodiscard]] Run parse_run_text(std::string_view text, std::string const& origin = "<memory>");

void write_corpus(Corpus const& corpus, std::filesystem::path const& path);
void write_queries(QuerySet const& queries, std::filesystem::path const& path);
void write_qrels(Qrels const& qrels, std::filesystem::path const& path);
void write_run(Run const& run, std::filesystem::path const& path);

[[nodiscard]] std::string format_corpus(Corpus const& corpus);
[[nodiscard]] std::string format_queries(QuerySet const& queries);
[[nodiscard]] std::string format_qrels(Qrels const& qrels);
[[nodiscard]] std::string format_run(Run const& run);

/// Shortest decimal text that reads back to the same double.
[[nodiscard]] std::string format_double(double value);

/// Reads a whole file; throws DataError if it cannot be opened.
[[nodiscard]] std::string read_file(std::filesystem::path const& path);
void write_file(std::filesystem::path const& path, std::string_view content);

}  // namespace qrelkit
