#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace liqmode {

// Lowercased alphanumeric runs of length >= 2, as a sorted set.
std::vector<std::string> tokenize(std::string_view headline);

struct LabeledDoc {
    std::vector<std::string> tokens;  // sorted, unique (as from tokenize)
    bool bullish = false;
};

LabeledDoc make_doc(std::string_view headline, bool bullish);

// Document frequencies per class.
struct DocFrequency {
    std::size_t docs_bullish = 0;
    std::size_t docs_bearish = 0;
    std::map<std::string, std::pair<std::size_t, std::size_t>> df;  // word -> (bullish, bearish)

    static DocFrequency count(std::span<const LabeledDoc> corpus);
};

// Plug-in I(C; W) in bits from the 2x2 table of (class, word present).
// bullish_with / bearish_with count documents containing the word.
double mutual_information_counts(std::size_t bullish_with, std::size_t bullish_total, std::size_t bearish_with,
                                 std::size_t bearish_total);

// Needs both classes present. A word absent from the corpus scores 0.
double mutual_information(std::span<const LabeledDoc> corpus, std::string_view word);

struct RankedWord {
    std::string word;
    double mutual_information = 0.0;
};

// Words by mutual information, descending, ties alphabetical.
std::vector<RankedWord> top_words(std::span<const LabeledDoc> corpus, std::size_t n, std::size_t min_df = 1);

struct NbcOptions {
    double alpha = 1.0;      // Laplace smoothing
    std::size_t min_df = 5;  // vocabulary threshold over all training documents
    std::vector<std::string> stop_words;

    void validate() const;
};

// Multivariate Bernoulli naive Bayes over word presence.
class SentimentModel {
public:
    struct Word {
        std::string word;
        double p_bullish = 0.5;  // P(f_w = 1 | +)
        double p_bearish = 0.5;  // P(f_w = 1 | -)
        std::size_t df_bullish = 0;
        std::size_t df_bearish = 0;
    };

    SentimentModel() = default;
    SentimentModel(double prior_bullish, double alpha, std::size_t min_df, std::size_t docs_bullish,
                   std::size_t docs_bearish, std::vector<Word> vocabulary);

    double prior_bullish() const noexcept { return prior_bullish_; }
    double prior_bearish() const noexcept { return 1.0 - prior_bullish_; }
    double alpha() const noexcept { return alpha_; }
    std::size_t min_df() const noexcept { return min_df_; }
    std::size_t docs_bullish() const noexcept { return docs_bullish_; }
    std::size_t docs_bearish() const noexcept { return docs_bearish_; }
    const std::vector<Word>& vocabulary() const noexcept { return vocabulary_; }
    const Word* find(std::string_view word) const;

    // log P(c) + sum over the vocabulary of log P(f_w | c).
    double log_joint(std::span<const std::string> tokens, bool bullish) const;

    // (posterior(+), posterior(-)), normalised over the two classes.
    std::pair<double, double> posterior(std::span<const std::string> tokens) const;

    // F = posterior(+) - posterior(-), in [-1, 1].
    double score_tokens(std::span<const std::string> tokens) const;
    double score(std::string_view headline) const;

    void save(const std::filesystem::path& path) const;
    static SentimentModel load(const std::filesystem::path& path);

private:
    void index();

    double prior_bullish_ = 0.5;
    double alpha_ = 1.0;
    std::size_t min_df_ = 1;
    std::size_t docs_bullish_ = 0;
    std::size_t docs_bearish_ = 0;
    std::vector<Word> vocabulary_;  // sorted by word
    std::unordered_map<std::string, std::size_t> lookup_;
    double absent_bullish_ = 0.0;  // sum of log(1 - p) over the vocabulary
    double absent_bearish_ = 0.0;
};

// P(c) = class share; P(f_w = 1 | c) = (df_c(w) + alpha) / (n_c + 2 alpha).
// Throws DegenerateError when either class is empty.
SentimentModel fit_nbc(std::span<const LabeledDoc> train, const NbcOptions& options);

}  // namespace liqmode
