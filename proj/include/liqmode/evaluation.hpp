#pragma once

#include "liqmode/csv.hpp"
#include "liqmode/jump_model.hpp"
#include "liqmode/labeling.hpp"
#include "liqmode/market_data.hpp"
#include "liqmode/screening.hpp"
#include "liqmode/sentiment.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace liqmode {

struct ScoredArticle {
    std::size_t article = 0;  // index into the evaluation news
    double score = 0.0;
};

// Detrended returns of every article at every horizon, computed once.
class ReturnTable {
public:
    ReturnTable() = default;
    ReturnTable(std::span<const NewsArticle> news, const PriceBook& prices, std::vector<int> horizons,
                const BinGrid& grid);

    const std::vector<int>& horizons() const noexcept { return horizons_; }
    std::size_t articles() const noexcept { return values_.size(); }
    std::optional<double> get(std::size_t article, std::size_t horizon_index) const;
    // True when the article has a return at every horizon.
    bool complete(std::size_t article) const;

private:
    std::vector<int> horizons_;
    std::vector<std::vector<std::optional<double>>> values_;  // [article][horizon]
};

inline constexpr std::size_t kMinBucketSize = 30;

struct DriftCurve {
    std::string bucket;  // top, bottom, reference
    std::vector<int> horizons;
    std::vector<double> mean;
    std::vector<double> stderr_of_mean;  // sample sd / sqrt(count)
    std::size_t count = 0;
    bool small_sample = false;  // count < 30
    std::vector<std::size_t> members;

    double terminal_mean() const { return mean.empty() ? 0.0 : mean.back(); }
};

struct DriftReport {
    DriftCurve top;
    DriftCurve bottom;
    DriftCurve reference;
    // top minus bottom mean at the longest horizon
    double terminal_separation = 0.0;
};

// Top and bottom buckets hold ceil(decile * n) articles by score rank (ties by
// article index); the reference bucket holds all n. Articles without a return
// at every horizon are dropped before ranking.
DriftReport drift_curves(std::span<const ScoredArticle> scored, const ReturnTable& returns, double decile);

struct Comparison {
    DriftReport baseline;
    DriftReport candidate;
    double difference = 0.0;  // candidate minus baseline terminal separation
    std::size_t common = 0;
    std::size_t baseline_only = 0;
    std::size_t candidate_only = 0;
};

// Both scorers evaluated on the articles they share. Throws DataError when
// they share none.
Comparison compare(std::span<const ScoredArticle> baseline, std::span<const ScoredArticle> candidate,
                   const ReturnTable& returns, double decile);

// Inputs of a train/evaluate experiment. Fits run on the training days only.
struct ExperimentData {
    BinGrid grid;
    Panel stationarized;
    std::set<DayNumber> train_days;
    std::vector<NewsArticle> train_news;
    std::vector<NewsArticle> eval_news;
    PriceBook prices;
};

struct ExperimentOptions {
    JumpConfig jump;
    NbcOptions nbc;
    std::vector<int> eval_horizons;  // drift-curve grid; the last is terminal
    double decile = 0.1;
    bool cache_fits = true;

    void validate() const;
};

std::vector<int> default_eval_horizons();

struct CellResult {
    std::optional<double> lambda;  // absent: trained on Z without screening
    int h = 0;
    double k = 0.0;
    std::size_t n_train = 0;
    std::size_t n_plus = 0;
    std::size_t n_minus = 0;
    bool degenerate = false;
    std::string reason;  // why the cell is degenerate
    std::optional<DriftReport> report;
    double terminal_separation = 0.0;  // NaN when degenerate
};

class Experiment {
public:
    Experiment(ExperimentData data, ExperimentOptions options);

    const ExperimentData& data() const noexcept { return data_; }
    const ExperimentOptions& options() const noexcept { return options_; }

    std::vector<DayFit> fits(double lambda);
    std::vector<std::size_t> impactful(double lambda);
    const ReturnBatch& train_returns(int h);
    const ReturnTable& eval_returns() const noexcept { return eval_returns_; }

    LabelSets label_sets(std::optional<double> lambda, int h, double k);
    SentimentModel train(std::optional<double> lambda, int h, double k);
    std::vector<ScoredArticle> score(const SentimentModel& model) const;

    // Labels with N (lambda given) or Z (lambda absent), trains, scores the
    // evaluation news and builds its drift curves. Empty classes mark the
    // cell degenerate instead of throwing.
    CellResult run(std::optional<double> lambda, int h, double k);

    std::size_t fits_computed() const noexcept { return fits_computed_; }

private:
    ExperimentData data_;
    ExperimentOptions options_;
    ReturnTable eval_returns_;
    std::map<double, std::vector<DayFit>> fit_cache_;
    std::map<int, ReturnBatch> train_return_cache_;
    std::size_t fits_computed_ = 0;
};

struct SweepGrid {
    std::vector<double> lambdas{0.0, 0.1, 0.25, 0.5, 1.0};
    std::vector<int> horizons{5, 10, 15, 30};
    std::vector<double> ks{1, 5, 10, 25, 50};

    void validate() const;
};

std::vector<CellResult> sweep(Experiment& experiment, const SweepGrid& grid);

// bucket,horizon,mean,stderr,count
void write_curves_csv(const std::filesystem::path& path, const DriftReport& report,
                      const std::string& bucket_prefix = "");
void append_curves(CsvWriter& out, const DriftReport& report, const std::string& bucket_prefix);
// lambda,h,k,terminal_separation,n_train,degenerate
void write_sweep_csv(const std::filesystem::path& path, std::span<const CellResult> cells);

// timestamp,ticker,F,headline
void write_scores_csv(const std::filesystem::path& path, std::span<const NewsArticle> news,
                      std::span<const ScoredArticle> scores);
struct ScoreRecord {
    Millis timestamp = 0;
    std::string ticker;
    double score = 0.0;
    std::string headline;
};
std::vector<ScoreRecord> read_scores_csv(const std::filesystem::path& path);

}  // namespace liqmode
