#pragma once

#include "bookend/corpus.hpp"
#include "bookend/rng.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace fixtures {

inline const std::filesystem::path kSourceDir = BOOKEND_SOURCE_DIR;

inline std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

class TempDir {
  public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("bookend-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir &) = delete;
    TempDir &operator=(const TempDir &) = delete;

    const std::filesystem::path &path() const { return path_; }
    std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

inline const std::vector<std::string> &vocabulary() {
    static const std::vector<std::string> words = [] {
        std::vector<std::string> w{"alice", "bob",   "dog",    "park",  "home",  "went",  "found",
                                   "the",   "a",     "happy",  "rain",  "sun",   "cat",   "car",
                                   "store", "bread", "friend", "night", "river", "house", "school",
                                   "ran",   "saw",   "lost",   "new",   "old",   "big",   "small"};
        for (int i = 0; i < 40; ++i)
            w.push_back("w" + std::to_string(i));
        return w;
    }();
    return words;
}

/// "Word word word." from the shared vocabulary.
inline std::string random_sentence(bookend::Rng &rng, std::size_t min_words = 2, std::size_t max_words = 8) {
    const auto &vocab = vocabulary();
    const auto count = rng.between(min_words, max_words);
    std::string out;
    for (std::size_t i = 0; i < count; ++i) {
        if (i > 0)
            out += ' ';
        out += vocab[rng.below(vocab.size())];
    }
    out[0] = static_cast<char>(out[0] - 'a' + 'A');
    out += rng.below(5) == 0 ? "!" : ".";
    return out;
}

inline bookend::Story random_story(bookend::Rng &rng, std::size_t length, std::string id = {}) {
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < length; ++i)
        texts.push_back(random_sentence(rng));
    return bookend::make_story(texts, id.empty() ? std::nullopt : std::optional<std::string>(id));
}

/// The worked five-sentence example used across the suites.
inline const std::string kStart = "A husband and his wife are looking for a new home.";
inline const std::string kStop = "They are excited to finally have a home!";
inline const std::string kIter1 = "They have been looking for months.";
inline const std::string kIter2 = "They finally found one in their area.";
inline const std::string kIter3 = "Finally they have found the perfect place.";
inline const std::string kGoldenOutput =
    "A husband and his wife are looking for a new home. They have been looking for months. Finally they have "
    "found the perfect place. They finally found one in their area. They are excited to finally have a home!";

} // namespace fixtures
