#include "liqmode/labeling.hpp"

#include "liqmode/csv.hpp"
#include "liqmode/errors.hpp"
#include "liqmode/stats.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

namespace liqmode {

std::optional<DetrendedReturn> post_news_return(const NewsArticle& article, const PriceBook& prices,
                                                int horizon_minutes, const BinGrid& grid) {
    if (horizon_minutes <= 0) {
        throw ValidationError("horizon must be positive");
    }
    const DayNumber day = grid.local_day(article.timestamp);
    const Millis start = article.timestamp;
    const Millis end = std::max(start, std::min(start + horizon_minutes * kMillisPerMinute, grid.session_close(day)));

    const auto p0 = prices.last_at_or_before(day, article.ticker, start);
    const auto p1 = prices.last_at_or_before(day, article.ticker, end);
    if (!p0 || !p1) {
        return std::nullopt;
    }
    DetrendedReturn r;
    r.horizon_minutes = horizon_minutes;
    r.raw = *p1 / *p0 - 1.0;

    double sum = 0.0;
    int n = 0;
    for (const auto& ticker : prices.tickers(day)) {
        const auto a = prices.last_at_or_before(day, ticker, start);
        const auto b = prices.last_at_or_before(day, ticker, end);
        if (a && b) {
            sum += *b / *a - 1.0;
            ++n;
        }
    }
    r.universe_size = n;
    r.small_universe = n < kMinUniverse;
    r.value = r.raw - sum / n;  // n >= 1: the article's own stock is priced
    return r;
}

ReturnBatch compute_returns(std::span<const NewsArticle> news, const PriceBook& prices, int horizon_minutes,
                            const BinGrid& grid) {
    ReturnBatch out;
    for (std::size_t i = 0; i < news.size(); ++i) {
        if (auto r = post_news_return(news[i], prices, horizon_minutes, grid)) {
            r->article = i;
            out.returns.push_back(*r);
        } else {
            out.dropped.push_back(i);
        }
    }
    return out;
}

LabelSets build_label_sets(std::span<const DetrendedReturn> returns, std::span<const std::size_t> impactful,
                           double k) {
    if (!(k > 0.0 && k <= 50.0)) {
        throw ValidationError("labeling.k must lie in (0, 50]");
    }
    if (returns.size() < kMinLabelSample) {
        throw DegenerateError("build_label_sets: " + std::to_string(returns.size()) +
                        " returns, at least 100 are needed for stable percentiles");
    }
    std::vector<double> values;
    values.reserve(returns.size());
    for (const auto& r : returns) {
        values.push_back(r.value);
    }
    std::sort(values.begin(), values.end());

    LabelSets sets;
    sets.k = k;
    sets.lower_threshold = percentile_sorted(values, k);
    sets.upper_threshold = percentile_sorted(values, 100.0 - k);
    const std::unordered_set<std::size_t> screened(impactful.begin(), impactful.end());
    for (const auto& r : returns) {
        if (r.value >= sets.upper_threshold) {
            sets.z_plus.push_back(r.article);
            if (screened.count(r.article)) {
                sets.n_plus.push_back(r.article);
            }
        } else if (r.value <= sets.lower_threshold) {
            sets.z_minus.push_back(r.article);
            if (screened.count(r.article)) {
                sets.n_minus.push_back(r.article);
            }
        }
    }
    for (auto* v : {&sets.z_plus, &sets.z_minus, &sets.n_plus, &sets.n_minus}) {
        std::sort(v->begin(), v->end());
    }
    return sets;
}

void write_labels_csv(const std::filesystem::path& path, std::span<const NewsArticle> news,
                      std::span<const DetrendedReturn> returns, const LabelSets& sets) {
    std::map<std::size_t, double> ret;
    for (const auto& r : returns) {
        ret[r.article] = r.value;
    }
    struct Row {
        std::size_t article;
        const char* set;
    };
    std::vector<Row> rows;
    for (auto a : sets.z_plus) rows.push_back({a, "Zp"});
    for (auto a : sets.z_minus) rows.push_back({a, "Zm"});
    for (auto a : sets.n_plus) rows.push_back({a, "Np"});
    for (auto a : sets.n_minus) rows.push_back({a, "Nm"});
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.article < b.article; });

    CsvWriter out(path);
    constexpr std::array<std::string_view, 7> header{"timestamp", "ticker", "score", "confidence",
                                                     "headline", "set",    "detrended_return_h"};
    out.header(header);
    for (const auto& row : rows) {
        const auto& a = news[row.article];
        out.field(a.timestamp).field(a.ticker);
        if (a.vendor_score) {
            out.field(*a.vendor_score);
        } else {
            out.empty();
        }
        if (a.vendor_confidence) {
            out.field(*a.vendor_confidence);
        } else {
            out.empty();
        }
        out.quoted(a.headline).field(row.set).field(ret.at(row.article)).end_row();
    }
    out.close();
}

std::vector<LabelRecord> read_labels_csv(const std::filesystem::path& path) {
    CsvReader in(path);
    const std::size_t c_ts = in.column("timestamp");
    const std::size_t c_ticker = in.column("ticker");
    const std::size_t c_score = in.column("score");
    const std::size_t c_conf = in.column("confidence");
    const std::size_t c_headline = in.column("headline");
    const std::size_t c_set = in.column("set");
    const std::size_t c_ret = in.column("detrended_return_h");
    std::vector<LabelRecord> out;
    while (in.next()) {
        LabelRecord r;
        r.article.timestamp = in.get_int(c_ts);
        r.article.ticker = std::string(in.get(c_ticker));
        r.article.headline = std::string(in.get(c_headline));
        if (!in.get(c_score).empty()) {
            r.article.vendor_score = static_cast<int>(in.get_int(c_score));
        }
        if (!in.get(c_conf).empty()) {
            r.article.vendor_confidence = in.get_double(c_conf);
        }
        r.set = std::string(in.get(c_set));
        if (r.set != "Zp" && r.set != "Zm" && r.set != "Np" && r.set != "Nm") {
            in.fail("set must be one of Zp, Zm, Np, Nm");
        }
        r.detrended_return = in.get_double(c_ret);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace liqmode
