#pragma once

#include "nrcid/dataset.hpp"
#include "nrcid/io.hpp"
#include "nrcid/matrix.hpp"
#include "nrcid/random.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace nrcid {

/// Synthetic regression task whose inputs and targets are both smooth images
/// of the same latent cube [0,1]^latent_dim.
struct ManifoldSpec {
    std::size_t latent_dim = 2;
    std::size_t input_dim = 20;
    std::size_t target_dim = 2;
    std::size_t samples = 1000;
    double target_noise_sigma = 0.0;
    std::size_t embed_layers = 2;
    std::uint64_t seed = 0;

    void validate() const;
    KeyValues to_key_values() const;
    static ManifoldSpec from_key_values(const KeyValues& kv);
};

ManifoldSpec load_manifold_spec(const std::filesystem::path& path);

/// A frozen random network of tanh layers followed by a linear lift, with each
/// output coordinate standardised against a fixed reference sample of latents.
class SmoothMap {
public:
    static constexpr std::size_t kHiddenWidth = 32;

    static SmoothMap draw(std::size_t in_dim, std::size_t out_dim, std::size_t tanh_layers, Rng& rng);

    std::size_t in_dim() const { return in_dim_; }
    std::size_t out_dim() const { return out_dim_; }

    Matrix apply(const Matrix& latents) const;

    /// out_dim x in_dim Jacobian at one latent point.
    Matrix jacobian(std::span<const double> latent) const;

    /// Smallest singular value of the Jacobian over the given latents.
    double min_singular_value(const Matrix& latents) const;

private:
    struct Layer {
        Matrix weights; // out x in
        std::vector<double> bias;
    };
    std::size_t in_dim_ = 0;
    std::size_t out_dim_ = 0;
    std::vector<Layer> tanh_layers_;
    Matrix lift_; // out x width
    std::vector<double> offset_;
    std::vector<double> scale_;
};

/// The frozen input and target maps of one ManifoldSpec.
struct ManifoldTask {
    ManifoldSpec spec;
    SmoothMap input_map;
    SmoothMap target_map;

    /// Draws maps from the spec's seed, redrawing any map whose Jacobian is
    /// nearly singular at 32 probe latents.
    static ManifoldTask build(const ManifoldSpec& spec);
};

struct GeneratedTask {
    Dataset data;
    Matrix latents;
    Matrix clean_targets; ///< targets before noise
};

GeneratedTask generate_manifold_task(const ManifoldSpec& spec);

/// Same as generate_manifold_task(spec).data.
Dataset gen_manifold_task(const ManifoldSpec& spec);

/// `dim` x `k` matrix with orthonormal columns, from a seeded Gaussian draw.
Matrix random_orthonormal(std::size_t dim, std::size_t k, Rng& rng);

/// Uniform points in [0,1]^d mapped into R^D by a seeded orthonormal map.
Matrix gen_hypercube(std::size_t d, std::size_t ambient_dim, std::size_t samples, std::uint64_t seed);

/// Loads paired CSV files; no normalisation is applied.
Dataset load_csv_dataset(const std::filesystem::path& inputs_path, const std::filesystem::path& targets_path);

/// Writes inputs.csv, targets.csv and (with ground truth) meta.txt into `dir`.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir, const KeyValues& extra_meta = {});

/// Reads a directory written by save_dataset.
Dataset load_dataset_dir(const std::filesystem::path& dir);

struct NormStats {
    std::vector<double> mean;
    std::vector<double> stddev; ///< population standard deviation

    Matrix apply(const Matrix& targets) const;
    Matrix invert(const Matrix& normalized) const;
};

/// Standardises each target coordinate to zero mean and unit population variance.
std::pair<Dataset, NormStats> normalize_targets(const Dataset& ds);

/// Seeded disjoint split; both parts keep the original row order.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double train_fraction, std::uint64_t seed);

} // namespace nrcid
