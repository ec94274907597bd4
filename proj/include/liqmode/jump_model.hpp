#pragma once

#include "liqmode/market_data.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace liqmode {

// Jump model: K-means with a fixed penalty per consecutive-bin mode switch,
//
//   J(Theta, M) = sum_S [ sum_t |x_t^S - theta_{m_t^S}|^2
//                         + lambda * sum_{t<T} 1{m_t^S != m_{t+1}^S} ],
//
// fitted on one day's pooled stock sequences by coordinate descent that
// alternates centroid refits with an exact dynamic-programming segmentation
// of every sequence.
//
// Modes are 0-based in memory (0 = Mode 1, the calm low-volatility mode) and
// 1-based in files.

using Point = std::array<double, kFeatureDim>;
using Sequence = std::vector<Point>;
using ModeSequence = std::vector<int>;

inline constexpr int kCalmMode = 0;
inline constexpr int kActiveMode = 1;

double squared_distance(const Point& a, const Point& b) noexcept;

struct JumpConfig {
    int modes = 2;             // K
    double lambda = 0.5;       // switch penalty
    double epsilon = 1e-8;     // stop when |J^l - J^{l-1}| <= epsilon
    int max_iters = 100;
    int restarts = 10;
    std::uint64_t seed = 0;
    int init_lloyd_iters = 10;  // Lloyd refinement after K-means++ seeding

    void validate() const;
};

struct Segmentation {
    ModeSequence modes;
    double cost = 0.0;
};

// Optimal mode sequence for fixed centroids. Backward pass
//   F(T,k) = |x_T - theta_k|^2
//   F(t,k) = |x_t - theta_k|^2 + min_j { F(t+1,j) + lambda 1{k != j} },
// then forward reconstruction m_1 = argmin_k F(1,k),
//   m_t = argmin_k { F(t,k) + lambda 1{m_{t-1} != k} }.
// Every argmin breaks ties toward the smaller mode index. cost = F(1, m_1).
Segmentation segment(std::span<const Point> sequence, std::span<const Point> centroids, double lambda);

double objective(std::span<const Sequence> sequences, std::span<const Point> centroids,
                 std::span<const ModeSequence> modes, double lambda);

struct ModeFit {
    std::vector<Point> centroids;      // K centroids, relabelled by (sigma, V) ascending
    std::vector<ModeSequence> modes;   // one per input sequence
    double loss = 0.0;
    int iterations = 0;                // of the selected restart
    std::vector<double> restart_losses;
    std::vector<double> loss_trace;    // J^1, J^2, ... of the selected restart
    int reseeded_clusters = 0;         // empty-cluster reseeds, all restarts
    int monotonicity_violations = 0;   // J^l > J^{l-1} + 1e-12, all restarts
};

// Full fit: `restarts` descents from K-means++ initial sequences, keeping the
// smallest final loss, relabelled so Mode 1 has the lowest sigma centroid.
ModeFit fit_day(std::span<const Sequence> sequences, const JumpConfig& config);

// Single descent from the given initial mode sequences, then relabelled.
ModeFit fit_from_modes(std::span<const Sequence> sequences, std::vector<ModeSequence> initial,
                       const JumpConfig& config);

// Initial mode sequences from K-means++ seeding plus bounded Lloyd refinement
// on the pooled observations.
std::vector<ModeSequence> kmeans_initial_modes(std::span<const Sequence> sequences, int modes,
                                               int lloyd_iters, std::uint64_t seed);

// Reorders modes by ascending (sigma, V) centroid component.
void relabel_by_volatility(ModeFit& fit);

// Process-wide count of loss-monotonicity violations seen by any descent.
std::size_t total_monotonicity_violations() noexcept;

// One fitted day of the panel. `tickers[i]` owns `fit.modes[i]`.
struct DayFit {
    DayNumber day = 0;
    std::vector<std::string> tickers;
    ModeFit fit;

    const ModeSequence* modes_for(std::string_view ticker) const;
};

// Fits every day of a stationarized panel (or only `days` when given). Each
// day gets its own seed derived from config.seed and the date.
std::vector<DayFit> fit_panel(const Panel& stationarized, const JumpConfig& config,
                              const std::set<DayNumber>* days = nullptr);

// centroids.csv: date,mode,phi,V,sigma,B   modes.csv: date,ticker,bin,mode
void write_centroids_csv(const std::filesystem::path& path, std::span<const DayFit> fits);
void write_modes_csv(const std::filesystem::path& path, std::span<const DayFit> fits);
std::vector<DayFit> read_fits_csv(const std::filesystem::path& centroids_path,
                                  const std::filesystem::path& modes_path);

}  // namespace liqmode
