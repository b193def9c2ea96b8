#pragma once

#include "nrcid/dataset.hpp"
#include "nrcid/io.hpp"
#include "nrcid/mlp.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nrcid {

enum class Regime { OverCompressed, Balanced, UnderCompressed };

std::string_view regime_name(Regime r);
Regime parse_regime(std::string_view name);

/// Balanced when |id_h - id_y| <= rel_tol * id_y, OverCompressed below that
/// band, UnderCompressed above it.
Regime classify_regime(double id_h, double id_y, double rel_tol = 0.15);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> xs, std::span<const double> ys);

/// id_h of the record with the smallest test MSE; ties go to the smaller id_h.
double ushape_min_location(std::span<const double> id_h, std::span<const double> test_mse);

struct Architecture {
    std::size_t layers = 3;
    std::size_t width = 64;

    std::string label() const; ///< "LxW"
    static Architecture parse(std::string_view text);
    auto operator<=>(const Architecture&) const = default;
};

struct SweepGrid {
    std::vector<Architecture> architectures;
    std::vector<double> weight_decays;
    std::size_t epochs = 1000;
    std::size_t batch_size = 32;
    double learning_rate = 1e-2;
    double train_fraction = 0.8;
    std::size_t probe_size = 2000;
    std::uint64_t seed = 0;
    std::vector<std::size_t> probe_epochs; ///< non-empty enables per-layer dynamics
    double regime_tol = 0.15;
    double collapse_threshold = 0.05;
    bool normalize_targets = true;
    BiasPenalty bias_penalty = BiasPenalty::IncludeHiddenBias;
    std::size_t workers = 1;

    void validate() const;
    KeyValues to_key_values() const;
    static SweepGrid from_key_values(const KeyValues& kv);
};

SweepGrid load_sweep_grid(const std::filesystem::path& path);

/// Seed of one grid cell, derived from the sweep seed, the architecture and the decay.
std::uint64_t cell_seed(std::uint64_t base_seed, const Architecture& arch, double weight_decay);

struct SweepRecord {
    Architecture arch;
    double weight_decay = 0.0;
    double train_mse = 0.0;
    double test_mse = 0.0;
    double gap = 0.0; ///< test_mse - train_mse
    double nrc1 = 0.0;
    double id_h = 0.0;
    double id_p = 0.0;
    double id_y = 0.0;
    std::optional<Regime> regime; ///< empty when the run diverged or id_h could not be measured
    std::size_t epochs = 0;
    bool diverged = false;
    double wall_time_s = 0.0; ///< not part of records.csv

    /// Excludes wall time.
    bool same_measurements(const SweepRecord& other) const;
};

/// Intrinsic dimension of one layer at one probe epoch.
struct LayerIdRow {
    std::size_t epoch = 0;
    std::string layer;
    double id = 0.0; ///< NaN when the estimator could not run (e.g. collapsed activations)
};

/// Per-epoch, per-layer ID table from a training log. The "input" and "target"
/// rows are constant references; "features" repeats the last hidden layer.
std::vector<LayerIdRow> layer_id_dynamics(const ProbeLog& log, double id_y);

struct DynamicsRow {
    Architecture arch;
    double weight_decay = 0.0;
    LayerIdRow row;
};

struct SweepResult {
    double id_y = 0.0;
    std::vector<SweepRecord> records; ///< sorted by architecture, then decay
    std::vector<DynamicsRow> dynamics;
};

/// Intrinsic dimension, or NaN when the estimator rejects the points.
double try_estimate_id(const Matrix& points);

/// Trains every (architecture, decay) cell and measures it. Divergent runs are
/// kept with diverged = true and NaN metrics.
SweepResult run_sweep(const SweepGrid& grid, const Dataset& data);

} // namespace nrcid
