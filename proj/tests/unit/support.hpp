#pragma once

#include <cstdlib>
#include <filesystem>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qrelkit/collection.hpp"
#include "qrelkit/random.hpp"

namespace qrelkit::test {

class TempDir {
  public:
    TempDir()
    {
        std::string pattern = (std::filesystem::temp_directory_path() / "qrelkit-XXXXXX").string();
        if (mkdtemp(pattern.data()) == nullptr) {
            throw std::runtime_error("mkdtemp failed");
        }
        path_ = pattern;
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(TempDir const&) = delete;
    TempDir& operator=(TempDir const&) = delete;

    [[nodiscard]] std::filesystem::path const& path() const { return path_; }
    [[nodiscard]] std::filesystem::path operator/(std::string const& name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

inline std::string words(std::size_t n, std::string const& word = "w")
{
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        out += (i == 0 ? "" : " ") + word + std::to_string(i);
    }
    return out;
}

inline std::string random_text(Rng& rng, std::size_t vocab, std::size_t min_len, std::size_t max_len)
{
    auto len = min_len + rng.below(max_len - min_len + 1);
    std::string out;
    for (std::size_t i = 0; i < len; ++i) {
        out += (i == 0 ? "" : " ") + std::string("t") + std::to_string(rng.below(vocab));
    }
    return out;
}

inline Corpus random_corpus(Rng& rng, std::size_t n, std::size_t vocab, std::size_t max_len, bool titles = true)
{
    Corpus corpus;
    for (std::size_t i = 0; i < n; ++i) {
        Document d;
        d.doc_id = "d" + std::to_string(i);
        if (titles) {
            d.title = random_text(rng, vocab, 0, 4);
        }
        d.body = random_text(rng, vocab, 0, max_len);
        corpus.add(std::move(d));
    }
    return corpus;
}

inline Corpus make_corpus(std::initializer_list<std::pair<std::string, std::string>> bodies)
{
    Corpus corpus;
    for (auto const& [id, body] : bodies) {
        corpus.add(Document{id, "", body, ""});
    }
    return corpus;
}

inline Run make_run(std::string tag, std::initializer_list<std::pair<std::string, std::vector<std::string>>> rankings)
{
    Run run(std::move(tag));
    for (auto const& [qid, docs] : rankings) {
        std::vector<std::pair<std::string, double>> scored;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            scored.emplace_back(docs[i], static_cast<double>(docs.size() - i));
        }
        run.set_ranking(qid, scored);
    }
    return run;
}

}  // namespace qrelkit::test
