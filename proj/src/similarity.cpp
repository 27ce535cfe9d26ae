#include "qrelkit/similarity.hpp"

#include <cmath>

#include "qrelkit/collection.hpp"
#include "qrelkit/error.hpp"
#include "text_util.hpp"

namespace qrelkit {

VectorSimilarity VectorSimilarity::load(std::filesystem::path const& path)
{
    return parse(read_file(path), path.string());
}

VectorSimilarity VectorSimilarity::parse(std::string_view text, std::string const& origin)
{
    VectorSimilarity out;
    detail::for_each_line(text, [&](std::string_view line, std::size_t lineno) {
        if (detail::is_blank(line)) {
            return;
        }
        auto cols = detail::split_ws(line);
        // word2vec text files start with a "count dim" header.
        if (lineno == 1 && cols.size() == 2 && detail::parse_int(cols[0]) && detail::parse_int(cols[1])) {
            return;
        }
        if (cols.size() < 2) {
            throw DataError::at(origin, lineno, "expected a term followed by vector components");
        }
        std::vector<float> vec;
        vec.reserve(cols.size() - 1);
        for (std::size_t i = 1; i < cols.size(); ++i) {
            auto v = detail::parse_double(cols[i]);
            if (!v) {
                throw DataError::at(origin, lineno, "non-numeric component '" + std::string(cols[i]) + "'");
            }
            vec.push_back(static_cast<float>(*v));
        }
        if (out.dim_ == 0) {
            out.dim_ = vec.size();
        } else if (vec.size() != out.dim_) {
            throw DataError::at(origin, lineno,
                                "dimension " + std::to_string(vec.size()) + " != " + std::to_string(out.dim_));
        }
        if (!out.vectors_.emplace(std::string(cols[0]), std::move(vec)).second) {
            throw DataError::at(origin, lineno, "duplicate term '" + std::string(cols[0]) + "'");
        }
    });
    return out;
}

double VectorSimilarity::similarity(std::string_view a, std::string_view b) const
{
    if (a == b) {
        return 1.0;
    }
    auto ia = vectors_.find(a);
    auto ib = vectors_.find(b);
    if (ia == vectors_.end() || ib == vectors_.end()) {
        return 0.0;
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        dot += double(ia->second[i]) * ib->second[i];
        na += double(ia->second[i]) * ia->second[i];
        nb += double(ib->second[i]) * ib->second[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return dot / std::sqrt(na * nb);
}

TableSimilarity::TableSimilarity(std::initializer_list<std::tuple<std::string, std::string, double>> entries)
{
    for (auto const& [a, b, v] : entries) {
        set(a, b, v);
    }
}

void TableSimilarity::set(std::string a, std::string b, double value)
{
    if (b < a) {
        std::swap(a, b);
    }
    table_[{std::move(a), std::move(b)}] = value;
}

double TableSimilarity::similarity(std::string_view a, std::string_view b) const
{
    if (a == b) {
        return 1.0;
    }
    if (b < a) {
        std::swap(a, b);
    }
    auto it = table_.find(std::make_pair(std::string(a), std::string(b)));
    return it == table_.end() ? 0.0 : it->second;
}

}  // namespace qrelkit
