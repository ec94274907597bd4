#include "liqmode/evaluation.hpp"

#include "liqmode/csv.hpp"
#include "liqmode/errors.hpp"
#include "liqmode/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

namespace liqmode {

ReturnTable::ReturnTable(std::span<const NewsArticle> news, const PriceBook& prices, std::vector<int> horizons,
                         const BinGrid& grid)
    : horizons_(std::move(horizons)), values_(news.size()) {
    for (std::size_t i = 0; i < news.size(); ++i) {
        values_[i].resize(horizons_.size());
        for (std::size_t j = 0; j < horizons_.size(); ++j) {
            if (auto r = post_news_return(news[i], prices, horizons_[j], grid)) {
                values_[i][j] = r->value;
            }
        }
    }
}

std::optional<double> ReturnTable::get(std::size_t article, std::size_t horizon_index) const {
    if (article >= values_.size() || horizon_index >= horizons_.size()) {
        return std::nullopt;
    }
    return values_[article][horizon_index];
}

bool ReturnTable::complete(std::size_t article) const {
    if (article >= values_.size()) {
        return false;
    }
    return std::all_of(values_[article].begin(), values_[article].end(),
                       [](const std::optional<double>& v) { return v.has_value(); });
}

namespace {

DriftCurve make_curve(std::string bucket, std::vector<std::size_t> members, const ReturnTable& returns) {
    DriftCurve c;
    c.bucket = std::move(bucket);
    c.horizons = returns.horizons();
    c.count = members.size();
    c.small_sample = c.count < kMinBucketSize;
    std::vector<double> values(members.size());
    for (std::size_t j = 0; j < c.horizons.size(); ++j) {
        for (std::size_t i = 0; i < members.size(); ++i) {
            values[i] = *returns.get(members[i], j);
        }
        c.mean.push_back(members.empty() ? 0.0 : mean(values));
        c.stderr_of_mean.push_back(
            members.empty() ? 0.0 : sample_stddev(values) / std::sqrt(static_cast<double>(members.size())));
    }
    c.members = std::move(members);
    return c;
}

}  // namespace

DriftReport drift_curves(std::span<const ScoredArticle> scored, const ReturnTable& returns, double decile) {
    if (!(decile > 0.0 && decile <= 0.5)) {
        throw ValidationError("evaluation.decile must lie in (0, 0.5]");
    }
    if (returns.horizons().empty()) {
        throw ValidationError("drift_curves needs at least one horizon");
    }
    std::vector<ScoredArticle> usable;
    for (const auto& s : scored) {
        if (returns.complete(s.article)) {
            usable.push_back(s);
        }
    }
    if (usable.empty()) {
        throw DataError("drift_curves: no scored article has returns at every horizon");
    }
    const std::size_t n = usable.size();
    // Guard the product against representation error, e.g. 0.1 * 30.
    const auto bucket = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(decile * static_cast<double>(n) - 1e-9)));

    std::sort(usable.begin(), usable.end(), [](const ScoredArticle& a, const ScoredArticle& b) {
        return a.score != b.score ? a.score > b.score : a.article < b.article;
    });
    std::vector<std::size_t> top, bottom, all;
    for (std::size_t i = 0; i < bucket; ++i) {
        top.push_back(usable[i].article);
    }
    std::stable_sort(usable.begin(), usable.end(), [](const ScoredArticle& a, const ScoredArticle& b) {
        return a.score != b.score ? a.score < b.score : a.article < b.article;
    });
    for (std::size_t i = 0; i < bucket; ++i) {
        bottom.push_back(usable[i].article);
    }
    for (const auto& s : usable) {
        all.push_back(s.article);
    }
    std::sort(top.begin(), top.end());
    std::sort(bottom.begin(), bottom.end());
    std::sort(all.begin(), all.end());

    DriftReport r;
    r.top = make_curve("top", std::move(top), returns);
    r.bottom = make_curve("bottom", std::move(bottom), returns);
    r.reference = make_curve("reference", std::move(all), returns);
    r.terminal_separation = r.top.terminal_mean() - r.bottom.terminal_mean();
    return r;
}

Comparison compare(std::span<const ScoredArticle> baseline, std::span<const ScoredArticle> candidate,
                   const ReturnTable& returns, double decile) {
    std::unordered_map<std::size_t, double> cand;
    for (const auto& s : candidate) {
        cand.emplace(s.article, s.score);
    }
    std::vector<ScoredArticle> b_common, c_common;
    Comparison out;
    for (const auto& s : baseline) {
        auto it = cand.find(s.article);
        if (it == cand.end()) {
            ++out.baseline_only;
            continue;
        }
        b_common.push_back(s);
        c_common.push_back({s.article, it->second});
    }
    out.common = b_common.size();
    out.candidate_only = candidate.size() - out.common;
    if (out.common == 0) {
        throw DataError("compare: empty intersection between baseline and candidate articles");
    }
    out.baseline = drift_curves(b_common, returns, decile);
    out.candidate = drift_curves(c_common, returns, decile);
    out.difference = out.candidate.terminal_separation - out.baseline.terminal_separation;
    return out;
}

// --- experiment -------------------------------------------------------------

std::vector<int> default_eval_horizons() {
    std::vector<int> h;
    for (int m = 5; m <= 150; m += 5) {
        h.push_back(m);
    }
    return h;
}

void ExperimentOptions::validate() const {
    jump.validate();
    nbc.validate();
    if (eval_horizons.empty()) {
        throw ValidationError("evaluation.horizons must not be empty");
    }
    for (int h : eval_horizons) {
        if (h <= 0) {
            throw ValidationError("evaluation.horizons must be positive minutes");
        }
    }
    if (!std::is_sorted(eval_horizons.begin(), eval_horizons.end())) {
        throw ValidationError("evaluation.horizons must be ascending");
    }
    if (!(decile > 0.0 && decile <= 0.5)) {
        throw ValidationError("evaluation.decile must lie in (0, 0.5]");
    }
}

Experiment::Experiment(ExperimentData data, ExperimentOptions options)
    : data_(std::move(data)), options_(std::move(options)) {
    options_.validate();
    eval_returns_ = ReturnTable(data_.eval_news, data_.prices, options_.eval_horizons, data_.grid);
}

std::vector<DayFit> Experiment::fits(double lambda) {
    if (options_.cache_fits) {
        auto it = fit_cache_.find(lambda);
        if (it != fit_cache_.end()) {
            return it->second;
        }
    }
    JumpConfig cfg = options_.jump;
    cfg.lambda = lambda;
    auto result = fit_panel(data_.stationarized, cfg, &data_.train_days);
    ++fits_computed_;
    if (options_.cache_fits) {
        fit_cache_.emplace(lambda, result);
    }
    return result;
}

std::vector<std::size_t> Experiment::impactful(double lambda) {
    const auto f = fits(lambda);
    const auto screened = select_impactful(data_.train_news, f, data_.grid);
    std::vector<std::size_t> out;
    for (const auto& s : screened.selected) {
        out.push_back(s.index);
    }
    std::sort(out.begin(), out.end());
    return out;
}

const ReturnBatch& Experiment::train_returns(int h) {
    auto it = train_return_cache_.find(h);
    if (it == train_return_cache_.end()) {
        it = train_return_cache_.emplace(h, compute_returns(data_.train_news, data_.prices, h, data_.grid)).first;
    }
    return it->second;
}

LabelSets Experiment::label_sets(std::optional<double> lambda, int h, double k) {
    const auto& returns = train_returns(h);
    std::vector<std::size_t> screened;
    if (lambda) {
        screened = impactful(*lambda);
    }
    return build_label_sets(returns.returns, screened, k);
}

namespace {

std::vector<LabeledDoc> training_docs(std::span<const NewsArticle> news, std::span<const std::size_t> plus,
                                      std::span<const std::size_t> minus) {
    std::vector<LabeledDoc> docs;
    docs.reserve(plus.size() + minus.size());
    for (auto i : plus) {
        docs.push_back(make_doc(news[i].headline, true));
    }
    for (auto i : minus) {
        docs.push_back(make_doc(news[i].headline, false));
    }
    return docs;
}

}  // namespace

SentimentModel Experiment::train(std::optional<double> lambda, int h, double k) {
    const auto sets = label_sets(lambda, h, k);
    const auto& plus = lambda ? sets.n_plus : sets.z_plus;
    const auto& minus = lambda ? sets.n_minus : sets.z_minus;
    return fit_nbc(training_docs(data_.train_news, plus, minus), options_.nbc);
}

std::vector<ScoredArticle> Experiment::score(const SentimentModel& model) const {
    std::vector<ScoredArticle> out;
    out.reserve(data_.eval_news.size());
    for (std::size_t i = 0; i < data_.eval_news.size(); ++i) {
        out.push_back({i, model.score(data_.eval_news[i].headline)});
    }
    return out;
}

CellResult Experiment::run(std::optional<double> lambda, int h, double k) {
    CellResult cell;
    cell.lambda = lambda;
    cell.h = h;
    cell.k = k;
    cell.terminal_separation = std::numeric_limits<double>::quiet_NaN();
    LabelSets sets;
    try {
        sets = label_sets(lambda, h, k);
    } catch (const DegenerateError& e) {
        cell.degenerate = true;
        cell.reason = e.what();
        return cell;
    }
    const auto& plus = lambda ? sets.n_plus : sets.z_plus;
    const auto& minus = lambda ? sets.n_minus : sets.z_minus;
    cell.n_plus = plus.size();
    cell.n_minus = minus.size();
    cell.n_train = plus.size() + minus.size();
    if (plus.empty() || minus.empty()) {
        cell.degenerate = true;
        cell.reason = plus.empty() ? "empty bullish training set" : "empty bearish training set";
        return cell;
    }
    const auto model = fit_nbc(training_docs(data_.train_news, plus, minus), options_.nbc);
    const auto scores = score(model);
    cell.report = drift_curves(scores, eval_returns_, options_.decile);
    cell.terminal_separation = cell.report->terminal_separation;
    return cell;
}

void SweepGrid::validate() const {
    if (lambdas.empty() || horizons.empty() || ks.empty()) {
        throw ValidationError("sweep grids must be non-empty");
    }
    for (double l : lambdas) {
        if (!(l >= 0.0)) {
            throw ValidationError("sweep lambda must be >= 0");
        }
    }
    for (int h : horizons) {
        if (h <= 0) {
            throw ValidationError("sweep h must be positive minutes");
        }
    }
    for (double k : ks) {
        if (!(k > 0.0 && k <= 50.0)) {
            throw ValidationError("sweep k must lie in (0, 50]");
        }
    }
}

std::vector<CellResult> sweep(Experiment& experiment, const SweepGrid& grid) {
    grid.validate();
    std::vector<CellResult> cells;
    for (double lambda : grid.lambdas) {
        for (int h : grid.horizons) {
            for (double k : grid.ks) {
                cells.push_back(experiment.run(lambda, h, k));
            }
        }
    }
    return cells;
}

// --- persistence ------------------------------------------------------------

void append_curves(CsvWriter& out, const DriftReport& report, const std::string& bucket_prefix) {
    for (const DriftCurve* c : {&report.top, &report.bottom, &report.reference}) {
        for (std::size_t j = 0; j < c->horizons.size(); ++j) {
            out.field(bucket_prefix + c->bucket)
                .field(c->horizons[j])
                .field(c->mean[j])
                .field(c->stderr_of_mean[j])
                .field(c->count)
                .end_row();
        }
    }
}

void write_curves_csv(const std::filesystem::path& path, const DriftReport& report,
                      const std::string& bucket_prefix) {
    CsvWriter out(path);
    constexpr std::array<std::string_view, 5> header{"bucket", "horizon", "mean", "stderr", "count"};
    out.header(header);
    append_curves(out, report, bucket_prefix);
    out.close();
}

void write_sweep_csv(const std::filesystem::path& path, std::span<const CellResult> cells) {
    CsvWriter out(path);
    constexpr std::array<std::string_view, 6> header{"lambda", "h", "k", "terminal_separation", "n_train",
                                                     "degenerate"};
    out.header(header);
    for (const auto& c : cells) {
        if (c.lambda) {
            out.field(*c.lambda);
        } else {
            out.field("none");
        }
        out.field(c.h).field(c.k).field(c.terminal_separation).field(c.n_train).field(c.degenerate ? 1 : 0);
        out.end_row();
    }
    out.close();
}

void write_scores_csv(const std::filesystem::path& path, std::span<const NewsArticle> news,
                      std::span<const ScoredArticle> scores) {
    CsvWriter out(path);
    constexpr std::array<std::string_view, 4> header{"timestamp", "ticker", "F", "headline"};
    out.header(header);
    for (const auto& s : scores) {
        const auto& a = news[s.article];
        out.field(a.timestamp).field(a.ticker).field(s.score).quoted(a.headline).end_row();
    }
    out.close();
}

std::vector<ScoreRecord> read_scores_csv(const std::filesystem::path& path) {
    CsvReader in(path);
    constexpr std::array<std::string_view, 4> header{"timestamp", "ticker", "F", "headline"};
    in.expect_header(header);
    std::vector<ScoreRecord> out;
    while (in.next()) {
        ScoreRecord r;
        r.timestamp = in.get_int(0);
        r.ticker = std::string(in.get(1));
        r.score = in.get_double(2);
        r.headline = std::string(in.get(3));
        if (!(r.score >= -1.0 && r.score <= 1.0)) {
            in.fail("F must lie in [-1, 1]");
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace liqmode
