#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qrelkit/collection.hpp"
#include "qrelkit/string_hash.hpp"

namespace qrelkit {

enum class Field : std::uint8_t { title = 0, body = 1 };
inline constexpr std::array<Field, 2> kAllFields{Field::title, Field::body};

[[nodiscard]] std::string_view field_name(Field f);
/// Throws ValidationError on anything other than "title" or "body".
[[nodiscard]] Field parse_field(std::string_view name);

using DocIndex = std::uint32_t;

struct Posting {
    DocIndex doc;
    std::uint32_t tf;

    bool operator==(Posting const&) const = default;
};

/// Postings and length statistics of one indexed field.
class FieldIndex {
  public:
    using PostingList = std::vector<Posting>;

    [[nodiscard]] PostingList const* postings(std::string_view term) const;
    /// Number of distinct documents containing the term in this field.
    [[nodiscard]] std::size_t df(std::string_view term) const;
    /// Term frequency of the term in one document (0 if absent).
    [[nodiscard]] std::uint32_t tf(std::string_view term, DocIndex doc) const;
    [[nodiscard]] std::uint32_t length(DocIndex doc) const { return lengths_[doc]; }
    [[nodiscard]] double avgdl() const noexcept { return avgdl_; }
    [[nodiscard]] std::size_t num_terms() const noexcept { return postings_.size(); }
    [[nodiscard]] auto const& all_postings() const noexcept { return postings_; }
    [[nodiscard]] std::vector<std::uint32_t> const& lengths() const noexcept { return lengths_; }

    bool operator==(FieldIndex const&) const = default;

  private:
    friend class IndexBuilder;
    friend class IndexSerializer;

    StringMap<PostingList> postings_;
    std::vector<std::uint32_t> lengths_;
    double avgdl_ = 0.0;
};

/// Immutable multi-field inverted index over a corpus.
class Index {
  public:
    [[nodiscard]] std::size_t num_docs() const noexcept { return doc_ids_.size(); }
    [[nodiscard]] std::string const& doc_id(DocIndex doc) const { return doc_ids_[doc]; }
    [[nodiscard]] std::vector<std::string> const& doc_ids() const noexcept { return doc_ids_; }
    [[nodiscard]] std::optional<DocIndex> find(std::string_view doc_id) const;
    [[nodiscard]] bool has_field(Field f) const { return fields_[static_cast<std::size_t>(f)].has_value(); }
    /// Throws ValidationError if the field was not indexed.
    [[nodiscard]] FieldIndex const& field(Field f) const;
    [[nodiscard]] std::vector<Field> fields() const;

    bool operator==(Index const&) const = default;

  private:
    friend class IndexBuilder;
    friend class IndexSerializer;

    std::vector<std::string> doc_ids_;
    std::unordered_map<std::string, DocIndex> lookup_;
    std::array<std::optional<FieldIndex>, 2> fields_;
};

/// Builds an index over the given fields. Tokenization runs on `threads`
/// workers; the result does not depend on the thread count.
[[nodiscard]] Index build_index(Corpus const& corpus, std::span<Field const> fields = kAllFields,
                                unsigned threads = 1);

/// Single-file binary serialization with a versioned header.
void save_index(Index const& index, std::filesystem::path const& path);
[[nodiscard]] Index load_index(std::filesystem::path const& path);

}  // namespace qrelkit
