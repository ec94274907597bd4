#include "liqmode/jump_model.hpp"

#include "liqmode/csv.hpp"
#include "liqmode/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace liqmode {

namespace {

constexpr double kMonotonicityTolerance = 1e-12;

std::atomic<std::size_t> g_monotonicity_violations{0};

std::size_t nearest(const Point& x, std::span<const Point> centroids) {
    std::size_t best = 0;
    double best_d = squared_distance(x, centroids[0]);
    for (std::size_t k = 1; k < centroids.size(); ++k) {
        const double d = squared_distance(x, centroids[k]);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

void check_shapes(std::span<const Sequence> sequences) {
    if (sequences.empty()) {
        throw ValidationError("jump model needs at least one sequence");
    }
    for (const auto& s : sequences) {
        if (s.empty()) {
            throw ValidationError("jump model sequences must be non-empty");
        }
        for (const auto& x : s) {
            for (double v : x) {
                if (!std::isfinite(v)) {
                    throw ValidationError("jump model observations must be finite");
                }
            }
        }
    }
}

struct Descent {
    std::vector<Point> centroids;
    std::vector<ModeSequence> modes;
    double loss = std::numeric_limits<double>::infinity();
    int iterations = 0;
    int reseeds = 0;
    int violations = 0;
    std::vector<double> trace;
};

// theta_k = mean of the samples assigned to k. A mode left without samples is
// reseeded at the observation farthest from its nearest populated centroid.
int refit_centroids(std::span<const Sequence> sequences, std::span<const ModeSequence> modes,
                    std::vector<Point>& centroids) {
    const std::size_t K = centroids.size();
    std::vector<Point> sums(K, Point{});
    std::vector<std::size_t> counts(K, 0);
    for (std::size_t s = 0; s < sequences.size(); ++s) {
        for (std::size_t t = 0; t < sequences[s].size(); ++t) {
            const auto k = static_cast<std::size_t>(modes[s][t]);
            for (std::size_t d = 0; d < kFeatureDim; ++d) {
                sums[k][d] += sequences[s][t][d];
            }
            ++counts[k];
        }
    }
    std::vector<std::size_t> populated;
    for (std::size_t k = 0; k < K; ++k) {
        if (counts[k] > 0) {
            for (std::size_t d = 0; d < kFeatureDim; ++d) {
                centroids[k][d] = sums[k][d] / static_cast<double>(counts[k]);
            }
            populated.push_back(k);
        }
    }
    int reseeds = 0;
    for (std::size_t k = 0; k < K; ++k) {
        if (counts[k] > 0) {
            continue;
        }
        const Point* farthest = &sequences[0][0];
        double farthest_d = -1.0;
        for (const auto& seq : sequences) {
            for (const auto& x : seq) {
                double d = std::numeric_limits<double>::infinity();
                for (std::size_t j : populated) {
                    d = std::min(d, squared_distance(x, centroids[j]));
                }
                if (d > farthest_d) {
                    farthest_d = d;
                    farthest = &x;
                }
            }
        }
        centroids[k] = *farthest;
        populated.push_back(k);
        ++reseeds;
    }
    return reseeds;
}

Descent descend(std::span<const Sequence> sequences, std::vector<ModeSequence> modes,
                const JumpConfig& config) {
    Descent run;
    run.modes = std::move(modes);
    run.centroids.assign(static_cast<std::size_t>(config.modes), Point{});
    double previous = std::numeric_limits<double>::infinity();
    for (int l = 1; l <= config.max_iters; ++l) {
        run.reseeds += refit_centroids(sequences, run.modes, run.centroids);
        double loss = 0.0;
        for (std::size_t s = 0; s < sequences.size(); ++s) {
            Segmentation seg = segment(sequences[s], run.centroids, config.lambda);
            run.modes[s] = std::move(seg.modes);
            loss += seg.cost;
        }
        if (loss > previous + kMonotonicityTolerance) {
            ++run.violations;
            g_monotonicity_violations.fetch_add(1, std::memory_order_relaxed);
        }
        run.trace.push_back(loss);
        run.loss = loss;
        run.iterations = l;
        if (std::abs(loss - previous) <= config.epsilon) {
            break;
        }
        previous = loss;
    }
    return run;
}

void validate_initial(std::span<const Sequence> sequences, std::span<const ModeSequence> initial,
                      int K) {
    if (initial.size() != sequences.size()) {
        throw ValidationError("initial mode sequences must match the number of sequences");
    }
    for (std::size_t s = 0; s < sequences.size(); ++s) {
        if (initial[s].size() != sequences[s].size()) {
            throw ValidationError("initial mode sequence length mismatch");
        }
        for (int m : initial[s]) {
            if (m < 0 || m >= K) {
                throw ValidationError("initial mode out of range");
            }
        }
    }
}

ModeFit to_fit(Descent&& run) {
    ModeFit fit;
    fit.centroids = std::move(run.centroids);
    fit.modes = std::move(run.modes);
    fit.loss = run.loss;
    fit.iterations = run.iterations;
    fit.loss_trace = std::move(run.trace);
    return fit;
}

}  // namespace

double squared_distance(const Point& a, const Point& b) noexcept {
    double s = 0.0;
    for (std::size_t d = 0; d < kFeatureDim; ++d) {
        const double diff = a[d] - b[d];
        s += diff * diff;
    }
    return s;
}

void JumpConfig::validate() const {
    if (modes < 1) {
        throw ValidationError("jump_model.modes must be >= 1");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw ValidationError("jump_model.lambda must be >= 0");
    }
    if (!(epsilon > 0.0)) {
        throw ValidationError("jump_model.epsilon must be > 0");
    }
    if (max_iters < 1) {
        throw ValidationError("jump_model.max_iters must be >= 1");
    }
    if (restarts < 1) {
        throw ValidationError("jump_model.restarts must be >= 1");
    }
    if (init_lloyd_iters < 0) {
        throw ValidationError("jump_model.init_lloyd_iters must be >= 0");
    }
}

Segmentation segment(std::span<const Point> sequence, std::span<const Point> centroids, double lambda) {
    const std::size_t T = sequence.size();
    const std::size_t K = centroids.size();
    Segmentation out;
    if (T == 0 || K == 0) {
        return out;
    }
    // F stored row-major, F[t * K + k].
    std::vector<double> F(T * K);
    for (std::size_t k = 0; k < K; ++k) {
        F[(T - 1) * K + k] = squared_distance(sequence[T - 1], centroids[k]);
    }
    for (std::size_t t = T - 1; t-- > 0;) {
        const double* next = &F[(t + 1) * K];
        // min_j {F(t+1,j) + lambda 1{k != j}} = min(F(t+1,k), min_j F(t+1,j) + lambda)
        const double best_next = *std::min_element(next, next + K);
        for (std::size_t k = 0; k < K; ++k) {
            F[t * K + k] = squared_distance(sequence[t], centroids[k]) + std::min(next[k], best_next + lambda);
        }
    }
    out.modes.resize(T);
    std::size_t prev = 0;
    for (std::size_t k = 1; k < K; ++k) {
        if (F[k] < F[prev]) {
            prev = k;
        }
    }
    out.modes[0] = static_cast<int>(prev);
    out.cost = F[prev];
    for (std::size_t t = 1; t < T; ++t) {
        std::size_t best = 0;
        double best_v = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < K; ++k) {
            const double v = F[t * K + k] + (k != prev ? lambda : 0.0);
            if (v < best_v) {
                best_v = v;
                best = k;
            }
        }
        out.modes[t] = static_cast<int>(best);
        prev = best;
    }
    return out;
}

double objective(std::span<const Sequence> sequences, std::span<const Point> centroids,
                 std::span<const ModeSequence> modes, double lambda) {
    if (sequences.size() != modes.size()) {
        throw ValidationError("objective: sequence and mode counts differ");
    }
    double J = 0.0;
    for (std::size_t s = 0; s < sequences.size(); ++s) {
        const auto& x = sequences[s];
        const auto& m = modes[s];
        if (x.size() != m.size()) {
            throw ValidationError("objective: sequence and mode lengths differ");
        }
        double fit = 0.0;
        int switches = 0;
        for (std::size_t t = 0; t < x.size(); ++t) {
            fit += squared_distance(x[t], centroids[static_cast<std::size_t>(m[t])]);
            if (t + 1 < x.size() && m[t] != m[t + 1]) {
                ++switches;
            }
        }
        J += fit + lambda * switches;
    }
    return J;
}

std::vector<ModeSequence> kmeans_initial_modes(std::span<const Sequence> sequences, int modes,
                                               int lloyd_iters, std::uint64_t seed) {
    std::vector<const Point*> pooled;
    for (const auto& s : sequences) {
        for (const auto& x : s) {
            pooled.push_back(&x);
        }
    }
    const auto K = static_cast<std::size_t>(modes);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    std::mt19937_64 rng(seq);

    // K-means++ seeding
    std::vector<Point> centroids;
    std::uniform_int_distribution<std::size_t> pick(0, pooled.size() - 1);
    centroids.push_back(*pooled[pick(rng)]);
    std::vector<double> d2(pooled.size());
    for (std::size_t i = 0; i < pooled.size(); ++i) {
        d2[i] = squared_distance(*pooled[i], centroids[0]);
    }
    while (centroids.size() < K) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t chosen = 0;
        if (total > 0.0) {
            const double r = std::uniform_real_distribution<double>(0.0, total)(rng);
            double acc = 0.0;
            chosen = pooled.size() - 1;
            for (std::size_t i = 0; i < pooled.size(); ++i) {
                acc += d2[i];
                if (acc > r) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        centroids.push_back(*pooled[chosen]);
        for (std::size_t i = 0; i < pooled.size(); ++i) {
            d2[i] = std::min(d2[i], squared_distance(*pooled[i], centroids.back()));
        }
    }

    // Bounded Lloyd refinement; an emptied cluster keeps its previous centroid.
    std::vector<std::size_t> label(pooled.size());
    for (int it = 0; it < lloyd_iters; ++it) {
        for (std::size_t i = 0; i < pooled.size(); ++i) {
            label[i] = nearest(*pooled[i], centroids);
        }
        std::vector<Point> sums(K, Point{});
        std::vector<std::size_t> counts(K, 0);
        for (std::size_t i = 0; i < pooled.size(); ++i) {
            for (std::size_t d = 0; d < kFeatureDim; ++d) {
                sums[label[i]][d] += (*pooled[i])[d];
            }
            ++counts[label[i]];
        }
        for (std::size_t k = 0; k < K; ++k) {
            if (counts[k] > 0) {
                for (std::size_t d = 0; d < kFeatureDim; ++d) {
                    centroids[k][d] = sums[k][d] / static_cast<double>(counts[k]);
                }
            }
        }
    }

    std::vector<ModeSequence> out;
    out.reserve(sequences.size());
    for (const auto& s : sequences) {
        ModeSequence m(s.size());
        for (std::size_t t = 0; t < s.size(); ++t) {
            m[t] = static_cast<int>(nearest(s[t], centroids));
        }
        out.push_back(std::move(m));
    }
    return out;
}

void relabel_by_volatility(ModeFit& fit) {
    const std::size_t K = fit.centroids.size();
    std::vector<std::size_t> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Point& ca = fit.centroids[a];
        const Point& cb = fit.centroids[b];
        if (ca[kSigma] != cb[kSigma]) {
            return ca[kSigma] < cb[kSigma];
        }
        return ca[kTurnover] < cb[kTurnover];
    });
    std::vector<int> new_label(K);
    std::vector<Point> centroids(K);
    for (std::size_t i = 0; i < K; ++i) {
        new_label[order[i]] = static_cast<int>(i);
        centroids[i] = fit.centroids[order[i]];
    }
    fit.centroids = std::move(centroids);
    for (auto& seq : fit.modes) {
        for (int& m : seq) {
            m = new_label[static_cast<std::size_t>(m)];
        }
    }
}

ModeFit fit_from_modes(std::span<const Sequence> sequences, std::vector<ModeSequence> initial,
                       const JumpConfig& config) {
    config.validate();
    check_shapes(sequences);
    validate_initial(sequences, initial, config.modes);
    Descent run = descend(sequences, std::move(initial), config);
    const int reseeds = run.reseeds;
    const int violations = run.violations;
    ModeFit fit = to_fit(std::move(run));
    fit.restart_losses = {fit.loss};
    fit.reseeded_clusters = reseeds;
    fit.monotonicity_violations = violations;
    relabel_by_volatility(fit);
    return fit;
}

ModeFit fit_day(std::span<const Sequence> sequences, const JumpConfig& config) {
    config.validate();
    check_shapes(sequences);
    std::vector<double> losses;
    int reseeds = 0;
    int violations = 0;
    Descent best;
    for (int r = 0; r < config.restarts; ++r) {
        // Distinct, reproducible stream per restart.
        std::seed_seq mix{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                          static_cast<std::uint32_t>(r)};
        std::array<std::uint32_t, 2> words{};
        mix.generate(words.begin(), words.end());
        const std::uint64_t restart_seed = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];

        auto initial = kmeans_initial_modes(sequences, config.modes, config.init_lloyd_iters, restart_seed);
        Descent run = descend(sequences, std::move(initial), config);
        losses.push_back(run.loss);
        reseeds += run.reseeds;
        violations += run.violations;
        if (r == 0 || run.loss < best.loss) {
            best = std::move(run);
        }
    }
    ModeFit fit = to_fit(std::move(best));
    fit.restart_losses = std::move(losses);
    fit.reseeded_clusters = reseeds;
    fit.monotonicity_violations = violations;
    relabel_by_volatility(fit);
    return fit;
}

std::size_t total_monotonicity_violations() noexcept {
    return g_monotonicity_violations.load(std::memory_order_relaxed);
}

// --- panel helpers ------------------------------------------------------------

const ModeSequence* DayFit::modes_for(std::string_view ticker) const {
    auto it = std::lower_bound(tickers.begin(), tickers.end(), ticker);
    if (it == tickers.end() || *it != ticker) {
        return nullptr;
    }
    return &fit.modes[static_cast<std::size_t>(it - tickers.begin())];
}

std::vector<DayFit> fit_panel(const Panel& stationarized, const JumpConfig& config,
                              const std::set<DayNumber>* days) {
    config.validate();
    std::map<DayNumber, std::vector<const StockDay*>> by_day;
    for (const auto& row : stationarized.rows) {
        if (!days || days->count(row.day)) {
            by_day[row.day].push_back(&row);
        }
    }
    std::vector<DayFit> out;
    for (auto& [day, rows] : by_day) {
        std::sort(rows.begin(), rows.end(),
                  [](const StockDay* a, const StockDay* b) { return a->ticker < b->ticker; });
        DayFit df;
        df.day = day;
        std::vector<Sequence> seqs;
        for (const StockDay* r : rows) {
            df.tickers.push_back(r->ticker);
            Sequence s;
            s.reserve(r->bins.size());
            for (const auto& b : r->bins) {
                s.push_back(b.values());
            }
            seqs.push_back(std::move(s));
        }
        JumpConfig day_config = config;
        day_config.seed = config.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(day);
        df.fit = fit_day(seqs, day_config);
        out.push_back(std::move(df));
    }
    return out;
}

void write_centroids_csv(const std::filesystem::path& path, std::span<const DayFit> fits) {
    CsvWriter out(path);
    out.field("date").field("mode");
    for (auto name : kFeatureNames) {
        out.field(name);
    }
    out.end_row();
    for (const auto& df : fits) {
        const std::string date = format_date(df.day);
        for (std::size_t k = 0; k < df.fit.centroids.size(); ++k) {
            out.field(date).field(k + 1);
            for (double v : df.fit.centroids[k]) {
                out.field(v);
            }
            out.end_row();
        }
    }
    out.close();
}

void write_modes_csv(const std::filesystem::path& path, std::span<const DayFit> fits) {
    CsvWriter out(path);
    constexpr std::array<std::string_view, 4> header{"date", "ticker", "bin", "mode"};
    out.header(header);
    for (const auto& df : fits) {
        const std::string date = format_date(df.day);
        for (std::size_t s = 0; s < df.tickers.size(); ++s) {
            const auto& m = df.fit.modes[s];
            for (std::size_t t = 0; t < m.size(); ++t) {
                out.field(date).field(df.tickers[s]).field(t + 1).field(m[t] + 1).end_row();
            }
        }
    }
    out.close();
}

std::vector<DayFit> read_fits_csv(const std::filesystem::path& centroids_path,
                                  const std::filesystem::path& modes_path) {
    std::map<DayNumber, DayFit> fits;
    {
        CsvReader in(centroids_path);
        const std::size_t c_date = in.column("date");
        const std::size_t c_mode = in.column("mode");
        std::array<std::size_t, kFeatureDim> c_var{};
        for (std::size_t v = 0; v < kFeatureDim; ++v) {
            c_var[v] = in.column(kFeatureNames[v]);
        }
        while (in.next()) {
            auto day = parse_date(in.get(c_date));
            if (!day) {
                in.fail("bad date");
            }
            const auto mode = in.get_int(c_mode);
            DayFit& df = fits[*day];
            df.day = *day;
            if (mode != static_cast<std::int64_t>(df.fit.centroids.size()) + 1) {
                in.fail("modes must be listed 1..K per date");
            }
            Point p{};
            for (std::size_t v = 0; v < kFeatureDim; ++v) {
                p[v] = in.get_double(c_var[v]);
            }
            df.fit.centroids.push_back(p);
        }
    }
    {
        CsvReader in(modes_path);
        const std::size_t c_date = in.column("date");
        const std::size_t c_ticker = in.column("ticker");
        const std::size_t c_bin = in.column("bin");
        const std::size_t c_mode = in.column("mode");
        while (in.next()) {
            auto day = parse_date(in.get(c_date));
            if (!day) {
                in.fail("bad date");
            }
            auto it = fits.find(*day);
            if (it == fits.end()) {
                in.fail("date has no centroids");
            }
            DayFit& df = it->second;
            const std::string_view ticker = in.get(c_ticker);
            if (df.tickers.empty() || df.tickers.back() != ticker) {
                df.tickers.emplace_back(ticker);
                df.fit.modes.emplace_back();
            }
            auto& m = df.fit.modes.back();
            if (in.get_int(c_bin) != static_cast<std::int64_t>(m.size()) + 1) {
                in.fail("bins must run 1..T consecutively");
            }
            const auto mode = in.get_int(c_mode);
            if (mode < 1 || mode > static_cast<std::int64_t>(df.fit.centroids.size())) {
                in.fail("mode out of range");
            }
            m.push_back(static_cast<int>(mode - 1));
        }
    }
    std::vector<DayFit> out;
    for (auto& [day, df] : fits) {
        if (!std::is_sorted(df.tickers.begin(), df.tickers.end())) {
            throw ParseError(modes_path.string(), 0, "tickers must be sorted within a date");
        }
        df.fit.loss = std::numeric_limits<double>::quiet_NaN();
        out.push_back(std::move(df));
    }
    return out;
}

}  // namespace liqmode
