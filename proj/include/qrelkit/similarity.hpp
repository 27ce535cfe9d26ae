#pragma once

#include <filesystem>
#include <initializer_list>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "qrelkit/string_hash.hpp"

namespace qrelkit {

/// Term-to-term semantic similarity used by the STMC axioms.
class SimilarityProvider {
  public:
    virtual ~SimilarityProvider() = default;
    /// Identical terms have similarity 1.
    [[nodiscard]] virtual double similarity(std::string_view a, std::string_view b) const = 0;
};

/// Cosine similarity over word vectors read from a text file with lines
/// `term v1 v2 ... vn`. Unknown terms have similarity 0 to everything but
/// themselves.
class VectorSimilarity final : public SimilarityProvider {
  public:
    static VectorSimilarity load(std::filesystem::path const& path);
    static VectorSimilarity parse(std::string_view text, std::string const& origin = "<memory>");

    [[nodiscard]] double similarity(std::string_view a, std::string_view b) const override;
    [[nodiscard]] std::size_t size() const noexcept { return vectors_.size(); }
    [[nodiscard]] std::size_t dimension() const noexcept { return dim_; }

  private:
    StringMap<std::vector<float>> vectors_;
    std::size_t dim_ = 0;
};

/// Explicit symmetric table; missing pairs have similarity 0.
class TableSimilarity final : public SimilarityProvider {
  public:
    TableSimilarity() = default;
    TableSimilarity(std::initializer_list<std::tuple<std::string, std::string, double>> entries);

    void set(std::string a, std::string b, double value);
    [[nodiscard]] double similarity(std::string_view a, std::string_view b) const override;

  private:
    std::map<std::pair<std::string, std::string>, double, std::less<>> table_;
};

}  // namespace qrelkit
