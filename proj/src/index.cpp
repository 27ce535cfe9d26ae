#include "qrelkit/index.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>

#include "qrelkit/error.hpp"
#include "qrelkit/parallel.hpp"
#include "qrelkit/tokenizer.hpp"

namespace qrelkit {

std::string_view field_name(Field f) { return f == Field::title ? "title" : "body"; }

Field parse_field(std::string_view name)
{
    if (name == "title") {
        return Field::title;
    }
    if (name == "body") {
        return Field::body;
    }
    throw ValidationError("unknown field '" + std::string(name) + "' (expected title or body)");
}

FieldIndex::PostingList const* FieldIndex::postings(std::string_view term) const
{
    auto it = postings_.find(term);
    return it == postings_.end() ? nullptr : &it->second;
}

std::size_t FieldIndex::df(std::string_view term) const
{
    auto const* list = postings(term);
    return list == nullptr ? 0 : list->size();
}

std::uint32_t FieldIndex::tf(std::string_view term, DocIndex doc) const
{
    auto const* list = postings(term);
    if (list == nullptr) {
        return 0;
    }
    auto it = std::lower_bound(list->begin(), list->end(), doc,
                               [](Posting const& p, DocIndex d) { return p.doc < d; });
    return (it != list->end() && it->doc == doc) ? it->tf : 0;
}

std::optional<DocIndex> Index::find(std::string_view doc_id) const
{
    auto it = lookup_.find(std::string(doc_id));
    if (it == lookup_.end()) {
        return std::nullopt;
    }
    return it->second;
}

FieldIndex const& Index::field(Field f) const
{
    auto const& slot = fields_[static_cast<std::size_t>(f)];
    if (!slot) {
        throw ValidationError("field '" + std::string(field_name(f)) + "' is not indexed");
    }
    return *slot;
}

std::vector<Field> Index::fields() const
{
    std::vector<Field> out;
    for (auto f : kAllFields) {
        if (has_field(f)) {
            out.push_back(f);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

class IndexBuilder {
  public:
    static Index build(Corpus const& corpus, std::span<Field const> fields, unsigned threads);
};

namespace {

using TermCounts = std::vector<std::pair<std::string, std::uint32_t>>;

struct DocTerms {
    std::uint32_t length = 0;
    TermCounts counts;
};

DocTerms count_terms(std::string_view text)
{
    auto tokens = tokenize(text).tokens;
    DocTerms out;
    out.length = static_cast<std::uint32_t>(tokens.size());
    std::sort(tokens.begin(), tokens.end());
    for (std::size_t i = 0; i < tokens.size();) {
        std::size_t j = i;
        while (j < tokens.size() && tokens[j] == tokens[i]) {
            ++j;
        }
        out.counts.emplace_back(std::move(tokens[i]), static_cast<std::uint32_t>(j - i));
        i = j;
    }
    return out;
}

std::string_view field_text(Document const& doc, Field f) { return f == Field::title ? doc.title : doc.body; }

}  // namespace

Index IndexBuilder::build(Corpus const& corpus, std::span<Field const> fields, unsigned threads)
{
    if (fields.empty()) {
        throw ValidationError("at least one field must be indexed");
    }
    if (corpus.size() >= std::numeric_limits<DocIndex>::max()) {
        throw ValidationError("corpus too large for 32-bit document indexes");
    }
    Index index;
    index.doc_ids_.reserve(corpus.size());
    index.lookup_.reserve(corpus.size());
    for (auto const& doc : corpus) {
        index.lookup_.emplace(doc.doc_id, static_cast<DocIndex>(index.doc_ids_.size()));
        index.doc_ids_.push_back(doc.doc_id);
    }

    constexpr std::size_t kBatch = 4096;
    for (Field f : fields) {
        auto& slot = index.fields_[static_cast<std::size_t>(f)];
        if (slot) {
            continue;
        }
        FieldIndex field;
        field.lengths_.resize(corpus.size());
        std::vector<DocTerms> batch;
        double total_length = 0.0;
        for (std::size_t start = 0; start < corpus.size(); start += kBatch) {
            std::size_t count = std::min(kBatch, corpus.size() - start);
            batch.assign(count, {});
            parallel_for(count, threads, [&](std::size_t i) { batch[i] = count_terms(field_text(corpus[start + i], f)); });
            for (std::size_t i = 0; i < count; ++i) {
                auto doc = static_cast<DocIndex>(start + i);
                field.lengths_[doc] = batch[i].length;
                total_length += batch[i].length;
                for (auto& [term, tf] : batch[i].counts) {
                    field.postings_[std::move(term)].push_back({doc, tf});
                }
            }
        }
        field.avgdl_ = corpus.empty() ? 0.0 : total_length / static_cast<double>(corpus.size());
        slot = std::move(field);
    }
    return index;
}

Index build_index(Corpus const& corpus, std::span<Field const> fields, unsigned threads)
{
    return IndexBuilder::build(corpus, fields, threads);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr char kMagic[8] = {'Q', 'R', 'K', 'I', 'N', 'D', 'E', 'X'};
constexpr std::uint32_t kFormatVersion = 1;

class Writer {
  public:
    explicit Writer(std::ofstream& out) : out_(out) {}
    template <typename T>
    void pod(T value)
    {
        out_.write(reinterpret_cast<char const*>(&value), sizeof(T));
    }
    void str(std::string_view s)
    {
        pod<std::uint64_t>(s.size());
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }

  private:
    std::ofstream& out_;
};

class Reader {
  public:
    Reader(std::ifstream& in, std::string origin) : in_(in), origin_(std::move(origin)) {}
    template <typename T>
    T pod()
    {
        T value{};
        in_.read(reinterpret_cast<char*>(&value), sizeof(T));
        check();
        return value;
    }
    std::string str()
    {
        auto n = pod<std::uint64_t>();
        if (n > (1ULL << 32)) {
            throw DataError(origin_ + ": corrupt index (string length)");
        }
        std::string s(n, '\0');
        in_.read(s.data(), static_cast<std::streamsize>(n));
        check();
        return s;
    }

  private:
    void check()
    {
        if (!in_) {
            throw DataError(origin_ + ": truncated index file");
        }
    }
    std::ifstream& in_;
    std::string origin_;
};

}  // namespace

class IndexSerializer {
  public:
    static void save(Index const& index, std::filesystem::path const& path)
    {
        if (path.has_parent_path()) {
            std::filesystem::create_directories(path.parent_path());
        }
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError(path.string() + ": cannot open for writing");
        }
        Writer w(out);
        out.write(kMagic, sizeof(kMagic));
        w.pod(kFormatVersion);
        w.pod<std::uint64_t>(index.doc_ids_.size());
        for (auto const& id : index.doc_ids_) {
            w.str(id);
        }
        for (auto f : kAllFields) {
            auto const& slot = index.fields_[static_cast<std::size_t>(f)];
            w.pod<std::uint8_t>(slot ? 1 : 0);
            if (!slot) {
                continue;
            }
            for (auto len : slot->lengths_) {
                w.pod(len);
            }
            w.pod(slot->avgdl_);
            std::vector<std::string_view> terms;
            terms.reserve(slot->postings_.size());
            for (auto const& [term, list] : slot->postings_) {
                terms.push_back(term);
            }
            std::sort(terms.begin(), terms.end());
            w.pod<std::uint64_t>(terms.size());
            for (auto term : terms) {
                auto const& list = slot->postings_.find(term)->second;
                w.str(term);
                w.pod<std::uint64_t>(list.size());
                for (auto const& p : list) {
                    w.pod(p.doc);
                    w.pod(p.tf);
                }
            }
        }
        if (!out) {
            throw DataError(path.string() + ": write failed");
        }
    }

    static Index load(std::filesystem::path const& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw DataError(path.string() + ": cannot open file");
        }
        char magic[sizeof(kMagic)];
        in.read(magic, sizeof(magic));
        if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
            throw DataError(path.string() + ": not a qrelkit index");
        }
        Reader r(in, path.string());
        auto version = r.pod<std::uint32_t>();
        if (version != kFormatVersion) {
            throw DataError(path.string() + ": unsupported index version " + std::to_string(version));
        }
        Index index;
        auto n = r.pod<std::uint64_t>();
        index.doc_ids_.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) {
            index.doc_ids_.push_back(r.str());
            index.lookup_.emplace(index.doc_ids_.back(), static_cast<DocIndex>(i));
        }
        for (auto f : kAllFields) {
            if (r.pod<std::uint8_t>() == 0) {
                continue;
            }
            FieldIndex field;
            field.lengths_.resize(n);
            for (auto& len : field.lengths_) {
                len = r.pod<std::uint32_t>();
            }
            field.avgdl_ = r.pod<double>();
            auto terms = r.pod<std::uint64_t>();
            field.postings_.reserve(terms);
            for (std::uint64_t t = 0; t < terms; ++t) {
                auto term = r.str();
                auto count = r.pod<std::uint64_t>();
                FieldIndex::PostingList list(count);
                for (auto& p : list) {
                    p.doc = r.pod<DocIndex>();
                    p.tf = r.pod<std::uint32_t>();
                    if (p.doc >= n) {
                        throw DataError(path.string() + ": corrupt index (posting out of range)");
                    }
                }
                field.postings_.emplace(std::move(term), std::move(list));
            }
            index.fields_[static_cast<std::size_t>(f)] = std::move(field);
        }
        return index;
    }
};

void save_index(Index const& index, std::filesystem::path const& path) { IndexSerializer::save(index, path); }
Index load_index(std::filesystem::path const& path) { return IndexSerializer::load(path); }

}  // namespace qrelkit
