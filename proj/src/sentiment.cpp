#include "liqmode/sentiment.hpp"

#include "liqmode/csv.hpp"
#include "liqmode/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace liqmode {

std::vector<std::string> tokenize(std::string_view headline) {
    std::vector<std::string> out;
    std::string current;
    auto flush = [&] {
        if (current.size() >= 2) {
            out.push_back(current);
        }
        current.clear();
    };
    for (char ch : headline) {
        const auto c = static_cast<unsigned char>(ch);
        if (c < 128 && std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

LabeledDoc make_doc(std::string_view headline, bool bullish) { return LabeledDoc{tokenize(headline), bullish}; }

DocFrequency DocFrequency::count(std::span<const LabeledDoc> corpus) {
    DocFrequency f;
    for (const auto& doc : corpus) {
        (doc.bullish ? f.docs_bullish : f.docs_bearish) += 1;
        // Tokens are a set already, but guard against hand-built docs.
        std::set<std::string_view> seen(doc.tokens.begin(), doc.tokens.end());
        for (auto w : seen) {
            auto& entry = f.df[std::string(w)];
            (doc.bullish ? entry.first : entry.second) += 1;
        }
    }
    return f;
}

double mutual_information_counts(std::size_t bullish_with, std::size_t bullish_total, std::size_t bearish_with,
                                 std::size_t bearish_total) {
    const double n = static_cast<double>(bullish_total + bearish_total);
    if (n == 0.0) {
        return 0.0;
    }
    const double joint[2][2] = {
        {static_cast<double>(bullish_total - bullish_with), static_cast<double>(bullish_with)},
        {static_cast<double>(bearish_total - bearish_with), static_cast<double>(bearish_with)},
    };
    const double p_class[2] = {static_cast<double>(bullish_total) / n, static_cast<double>(bearish_total) / n};
    const double p_word[2] = {(joint[0][0] + joint[1][0]) / n, (joint[0][1] + joint[1][1]) / n};
    double mi = 0.0;
    for (int c = 0; c < 2; ++c) {
        for (int f = 0; f < 2; ++f) {
            const double p = joint[c][f] / n;
            if (p > 0.0) {
                mi += p * std::log2(p / (p_class[c] * p_word[f]));
            }
        }
    }
    return std::max(0.0, mi);
}

double mutual_information(std::span<const LabeledDoc> corpus, std::string_view word) {
    std::size_t pos = 0, neg = 0, pos_with = 0, neg_with = 0;
    for (const auto& doc : corpus) {
        const bool has = std::find(doc.tokens.begin(), doc.tokens.end(), word) != doc.tokens.end();
        if (doc.bullish) {
            ++pos;
            pos_with += has ? 1 : 0;
        } else {
            ++neg;
            neg_with += has ? 1 : 0;
        }
    }
    if (pos == 0 || neg == 0) {
        throw ValidationError("mutual_information needs both classes in the corpus");
    }
    return mutual_information_counts(pos_with, pos, neg_with, neg);
}

std::vector<RankedWord> top_words(std::span<const LabeledDoc> corpus, std::size_t n, std::size_t min_df) {
    if (n < 1) {
        throw ValidationError("top_words: n must be >= 1");
    }
    const DocFrequency f = DocFrequency::count(corpus);
    if (f.docs_bullish == 0 || f.docs_bearish == 0) {
        throw ValidationError("top_words needs both classes in the corpus");
    }
    std::vector<RankedWord> ranked;
    for (const auto& [word, df] : f.df) {
        if (df.first + df.second < min_df) {
            continue;
        }
        ranked.push_back({word, mutual_information_counts(df.first, f.docs_bullish, df.second, f.docs_bearish)});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const RankedWord& a, const RankedWord& b) {
        if (a.mutual_information != b.mutual_information) {
            return a.mutual_information > b.mutual_information;
        }
        return a.word < b.word;
    });
    if (ranked.size() > n) {
        ranked.resize(n);
    }
    return ranked;
}

void NbcOptions::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw ValidationError("sentiment.alpha must be > 0");
    }
}

// --- model ------------------------------------------------------------------

SentimentModel::SentimentModel(double prior_bullish, double alpha, std::size_t min_df, std::size_t docs_bullish,
                               std::size_t docs_bearish, std::vector<Word> vocabulary)
    : prior_bullish_(prior_bullish),
      alpha_(alpha),
      min_df_(min_df),
      docs_bullish_(docs_bullish),
      docs_bearish_(docs_bearish),
      vocabulary_(std::move(vocabulary)) {
    std::sort(vocabulary_.begin(), vocabulary_.end(), [](const Word& a, const Word& b) { return a.word < b.word; });
    index();
}

void SentimentModel::index() {
    lookup_.clear();
    absent_bullish_ = 0.0;
    absent_bearish_ = 0.0;
    for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
        lookup_.emplace(vocabulary_[i].word, i);
        absent_bullish_ += std::log1p(-vocabulary_[i].p_bullish);
        absent_bearish_ += std::log1p(-vocabulary_[i].p_bearish);
    }
}

const SentimentModel::Word* SentimentModel::find(std::string_view word) const {
    auto it = lookup_.find(std::string(word));
    return it == lookup_.end() ? nullptr : &vocabulary_[it->second];
}

double SentimentModel::log_joint(std::span<const std::string> tokens, bool bullish) const {
    double ll = bullish ? std::log(prior_bullish_) + absent_bullish_ : std::log(prior_bearish()) + absent_bearish_;
    for (const auto& tok : tokens) {
        if (const Word* w = find(tok)) {
            const double p = bullish ? w->p_bullish : w->p_bearish;
            ll += std::log(p) - std::log1p(-p);
        }
    }
    return ll;
}

std::pair<double, double> SentimentModel::posterior(std::span<const std::string> tokens) const {
    const double d = log_joint(tokens, true) - log_joint(tokens, false);
    // p+ = 1 / (1 + e^{-d}), p- = 1 / (1 + e^{d})
    return {1.0 / (1.0 + std::exp(-d)), 1.0 / (1.0 + std::exp(d))};
}

double SentimentModel::score_tokens(std::span<const std::string> tokens) const {
    const double d = log_joint(tokens, true) - log_joint(tokens, false);
    return std::tanh(d / 2.0);
}

double SentimentModel::score(std::string_view headline) const {
    const auto tokens = tokenize(headline);
    return score_tokens(tokens);
}

namespace {
constexpr std::string_view kModelMagic = "liqmode-nbc";
constexpr int kModelVersion = 1;
}  // namespace

void SentimentModel::save(const std::filesystem::path& path) const {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write model: " + path.string());
    }
    out << kModelMagic << ' ' << kModelVersion << '\n';
    out << "prior_bullish " << format_double(prior_bullish_) << '\n';
    out << "alpha " << format_double(alpha_) << '\n';
    out << "min_df " << min_df_ << '\n';
    out << "docs " << docs_bullish_ << ' ' << docs_bearish_ << '\n';
    out << "vocabulary " << vocabulary_.size() << '\n';
    for (const auto& w : vocabulary_) {
        out << w.word << ' ' << format_double(w.p_bullish) << ' ' << format_double(w.p_bearish) << ' '
            << w.df_bullish << ' ' << w.df_bearish << '\n';
    }
    if (!out) {
        throw DataError("write failed: " + path.string());
    }
}

SentimentModel SentimentModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("missing file: " + path.string());
    }
    auto bad = [&](const std::string& what) { return ParseError(path.string(), 0, "model file: " + what); };
    std::string magic, key;
    int version = 0;
    if (!(in >> magic >> version) || magic != kModelMagic) {
        throw bad("not a sentiment model");
    }
    if (version != kModelVersion) {
        throw bad("unsupported version " + std::to_string(version));
    }
    std::string prior_text, alpha_text;
    std::size_t min_df = 0, docs_pos = 0, docs_neg = 0, n = 0;
    if (!(in >> key >> prior_text) || key != "prior_bullish") throw bad("expected prior_bullish");
    if (!(in >> key >> alpha_text) || key != "alpha") throw bad("expected alpha");
    if (!(in >> key >> min_df) || key != "min_df") throw bad("expected min_df");
    if (!(in >> key >> docs_pos >> docs_neg) || key != "docs") throw bad("expected docs");
    if (!(in >> key >> n) || key != "vocabulary") throw bad("expected vocabulary");
    const auto prior = parse_double(prior_text);
    const auto alpha = parse_double(alpha_text);
    if (!prior || !alpha) {
        throw bad("bad number");
    }
    std::vector<Word> vocab;
    vocab.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Word w;
        std::string pp, pn;
        if (!(in >> w.word >> pp >> pn >> w.df_bullish >> w.df_bearish)) {
            throw bad("truncated vocabulary");
        }
        const auto a = parse_double(pp);
        const auto b = parse_double(pn);
        if (!a || !b) {
            throw bad("bad probability for '" + w.word + "'");
        }
        w.p_bullish = *a;
        w.p_bearish = *b;
        vocab.push_back(std::move(w));
    }
    return SentimentModel(*prior, *alpha, min_df, docs_pos, docs_neg, std::move(vocab));
}

SentimentModel fit_nbc(std::span<const LabeledDoc> train, const NbcOptions& options) {
    options.validate();
    const DocFrequency f = DocFrequency::count(train);
    if (f.docs_bullish == 0) {
        throw DegenerateError("fit_nbc: the bullish class is empty");
    }
    if (f.docs_bearish == 0) {
        throw DegenerateError("fit_nbc: the bearish class is empty");
    }
    const std::set<std::string> stop(options.stop_words.begin(), options.stop_words.end());
    const double a = options.alpha;
    const auto n_pos = static_cast<double>(f.docs_bullish);
    const auto n_neg = static_cast<double>(f.docs_bearish);
    std::vector<SentimentModel::Word> vocab;
    for (const auto& [word, df] : f.df) {
        if (df.first + df.second < options.min_df || stop.count(word)) {
            continue;
        }
        vocab.push_back({word, (static_cast<double>(df.first) + a) / (n_pos + 2.0 * a),
                         (static_cast<double>(df.second) + a) / (n_neg + 2.0 * a), df.first, df.second});
    }
    return SentimentModel(n_pos / (n_pos + n_neg), a, options.min_df, f.docs_bullish, f.docs_bearish,
                          std::move(vocab));
}

}  // namespace liqmode
