#include "nrcid/datagen.hpp"
#include "nrcid/errors.hpp"

#include "eigen_view.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

namespace nrcid {
namespace {

constexpr std::size_t kReferenceLatents = 1024;
constexpr std::size_t kJacobianProbes = 32;
constexpr double kMinSingularValue = 1e-3;
constexpr int kMaxRedraws = 64;

Matrix uniform_latents(std::size_t count, std::size_t dim, Rng& rng) {
    Matrix z(count, dim);
    for (double& v : z.values()) {
        v = uniform01(rng);
    }
    return z;
}

std::string dataset_name(const ManifoldSpec& s) {
    return "manifold_dz" + std::to_string(s.latent_dim) + "_D" + std::to_string(s.input_dim) + "_n" +
           std::to_string(s.target_dim) + "_M" + std::to_string(s.samples) + "_seed" + std::to_string(s.seed);
}

} // namespace

void ManifoldSpec::validate() const {
    if (latent_dim < 1) {
        throw std::invalid_argument("latent_dim must be at least 1");
    }
    if (input_dim < latent_dim || target_dim < latent_dim) {
        throw std::invalid_argument("latent_dim must not exceed input_dim or target_dim");
    }
    if (samples < 10) {
        throw std::invalid_argument("samples must be at least 10");
    }
    if (!(target_noise_sigma >= 0.0) || !std::isfinite(target_noise_sigma)) {
        throw std::invalid_argument("target_noise_sigma must be finite and non-negative");
    }
    if (embed_layers < 1) {
        throw std::invalid_argument("embed_layers must be at least 1");
    }
}

KeyValues ManifoldSpec::to_key_values() const {
    return {
        {"latent_dim", std::to_string(latent_dim)},
        {"input_dim", std::to_string(input_dim)},
        {"target_dim", std::to_string(target_dim)},
        {"samples", std::to_string(samples)},
        {"target_noise_sigma", format_double(target_noise_sigma)},
        {"embed_layers", std::to_string(embed_layers)},
        {"seed", std::to_string(seed)},
    };
}

ManifoldSpec ManifoldSpec::from_key_values(const KeyValues& kv) {
    static const std::set<std::string> known = {"latent_dim", "input_dim",    "target_dim", "samples",
                                                "target_noise_sigma", "embed_layers", "seed"};
    for (const auto& [k, v] : kv) {
        if (!known.contains(k)) {
            throw DataError("unknown manifold spec key '" + k + "'");
        }
    }
    ManifoldSpec s;
    s.latent_dim = get_count(kv, "latent_dim", s.latent_dim);
    s.input_dim = get_count(kv, "input_dim", s.input_dim);
    s.target_dim = get_count(kv, "target_dim", s.target_dim);
    s.samples = get_count(kv, "samples", s.samples);
    s.target_noise_sigma = get_real(kv, "target_noise_sigma", s.target_noise_sigma);
    s.embed_layers = get_count(kv, "embed_layers", s.embed_layers);
    s.seed = get_count(kv, "seed", s.seed);
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("invalid manifold spec: ") + e.what());
    }
    return s;
}

ManifoldSpec load_manifold_spec(const std::filesystem::path& path) {
    return ManifoldSpec::from_key_values(load_key_values(path));
}

SmoothMap SmoothMap::draw(std::size_t in_dim, std::size_t out_dim, std::size_t tanh_layers, Rng& rng) {
    SmoothMap map;
    map.in_dim_ = in_dim;
    map.out_dim_ = out_dim;
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::size_t fan_in = in_dim;
    for (std::size_t l = 0; l < tanh_layers; ++l) {
        const double gain = l == 0 ? 3.0 : 1.5;
        Layer layer{Matrix(kHiddenWidth, fan_in), std::vector<double>(kHiddenWidth)};
        const double sd = gain / std::sqrt(static_cast<double>(fan_in));
        for (double& w : layer.weights.values()) {
            w = sd * gauss(rng);
        }
        for (double& b : layer.bias) {
            b = 0.5 * gauss(rng);
        }
        map.tanh_layers_.push_back(std::move(layer));
        fan_in = kHiddenWidth;
    }
    map.lift_ = Matrix(out_dim, kHiddenWidth);
    const double lift_sd = 1.0 / std::sqrt(static_cast<double>(kHiddenWidth));
    for (double& w : map.lift_.values()) {
        w = lift_sd * gauss(rng);
    }

    map.offset_.assign(out_dim, 0.0);
    map.scale_.assign(out_dim, 1.0);
    const Matrix reference = map.apply(uniform_latents(kReferenceLatents, in_dim, rng));
    const auto ref = detail::view(reference);
    const Eigen::RowVectorXd mean = ref.colwise().mean();
    for (std::size_t c = 0; c < out_dim; ++c) {
        const auto ci = static_cast<Eigen::Index>(c);
        const double var = (ref.col(ci).array() - mean[ci]).square().mean();
        map.offset_[c] = mean[ci];
        map.scale_[c] = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    }
    return map;
}

Matrix SmoothMap::apply(const Matrix& latents) const {
    if (latents.cols() != in_dim_) {
        throw std::invalid_argument("latent dimension does not match the map");
    }
    detail::RowMat a = (2.0 * detail::view(latents).array() - 1.0).matrix();
    for (const auto& layer : tanh_layers_) {
        detail::RowMat z = a * detail::view(layer.weights).transpose();
        z.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(layer.bias.data(), static_cast<Eigen::Index>(layer.bias.size()));
        a = z.array().tanh().matrix();
    }
    detail::RowMat out = a * detail::view(lift_).transpose();
    for (std::size_t c = 0; c < out_dim_; ++c) {
        const auto ci = static_cast<Eigen::Index>(c);
        out.col(ci) = ((out.col(ci).array() - offset_[c]) * scale_[c]).matrix();
    }
    return detail::to_matrix(out);
}

Matrix SmoothMap::jacobian(std::span<const double> latent) const {
    if (latent.size() != in_dim_) {
        throw std::invalid_argument("latent dimension does not match the map");
    }
    Eigen::VectorXd a(static_cast<Eigen::Index>(in_dim_));
    for (std::size_t i = 0; i < in_dim_; ++i) {
        a[static_cast<Eigen::Index>(i)] = 2.0 * latent[i] - 1.0;
    }
    // d a / d z, starting from the affine rescaling u = 2z - 1.
    Eigen::MatrixXd jac = 2.0 * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(in_dim_),
                                                          static_cast<Eigen::Index>(in_dim_));
    for (const auto& layer : tanh_layers_) {
        const Eigen::MatrixXd w = detail::view(layer.weights);
        Eigen::VectorXd z = w * a;
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            z[i] += layer.bias[static_cast<std::size_t>(i)];
        }
        a = z.array().tanh().matrix();
        const Eigen::VectorXd slope = (1.0 - a.array().square()).matrix();
        jac = slope.asDiagonal() * (w * jac);
    }
    Eigen::MatrixXd out = detail::view(lift_) * jac;
    for (std::size_t c = 0; c < out_dim_; ++c) {
        out.row(static_cast<Eigen::Index>(c)) *= scale_[c];
    }
    return detail::to_matrix(out);
}

double SmoothMap::min_singular_value(const Matrix& latents) const {
    double smallest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < latents.rows(); ++i) {
        const Matrix j = jacobian(latents.row(i));
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(detail::view(j));
        smallest = std::min(smallest, svd.singularValues().minCoeff());
    }
    return smallest;
}

ManifoldTask ManifoldTask::build(const ManifoldSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, 1));
    const Matrix probes = uniform_latents(kJacobianProbes, spec.latent_dim, rng);
    auto draw_conditioned = [&](std::size_t out_dim) {
        for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
            SmoothMap map = SmoothMap::draw(spec.latent_dim, out_dim, spec.embed_layers, rng);
            if (map.min_singular_value(probes) >= kMinSingularValue) {
                return map;
            }
        }
        throw NumericalError("could not draw a well-conditioned embedding map");
    };
    ManifoldTask task{spec, draw_conditioned(spec.input_dim), draw_conditioned(spec.target_dim)};
    return task;
}

GeneratedTask generate_manifold_task(const ManifoldSpec& spec) {
    const ManifoldTask task = ManifoldTask::build(spec);
    Rng latent_rng(derive_seed(spec.seed, 2));
    Rng noise_rng(derive_seed(spec.seed, 3));

    GeneratedTask out;
    out.latents = uniform_latents(spec.samples, spec.latent_dim, latent_rng);
    out.data.inputs = task.input_map.apply(out.latents);
    out.clean_targets = task.target_map.apply(out.latents);
    out.data.targets = out.clean_targets;
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& y : out.data.targets.values()) {
        const double eps = gauss(noise_rng);
        if (spec.target_noise_sigma > 0.0) {
            y += spec.target_noise_sigma * eps;
        }
    }
    out.data.name = dataset_name(spec);
    out.data.meta = GroundTruth{spec.latent_dim, spec.target_noise_sigma, spec.seed};
    return out;
}

Dataset gen_manifold_task(const ManifoldSpec& spec) {
    return generate_manifold_task(spec).data;
}

Matrix random_orthonormal(std::size_t dim, std::size_t k, Rng& rng) {
    if (k < 1 || k > dim) {
        throw std::invalid_argument("random_orthonormal needs 1 <= k <= dim");
    }
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd g(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(k));
    for (Eigen::Index c = 0; c < g.cols(); ++c) {
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
            g(r, c) = gauss(rng);
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(g.rows(), g.cols());
    return detail::to_matrix(q);
}

Matrix gen_hypercube(std::size_t d, std::size_t ambient_dim, std::size_t samples, std::uint64_t seed) {
    if (d < 1 || d > ambient_dim) {
        throw std::invalid_argument("gen_hypercube needs 1 <= d <= D");
    }
    if (samples < 1) {
        throw std::invalid_argument("gen_hypercube needs at least one sample");
    }
    Rng rng(seed);
    const Matrix cube = uniform_latents(samples, d, rng);
    if (d == ambient_dim) {
        return cube;
    }
    const Matrix basis = random_orthonormal(ambient_dim, d, rng);
    return detail::to_matrix(detail::view(cube) * detail::view(basis).transpose());
}

Dataset load_csv_dataset(const std::filesystem::path& inputs_path, const std::filesystem::path& targets_path) {
    Dataset ds;
    ds.inputs = load_csv(inputs_path);
    ds.targets = load_csv(targets_path);
    ds.name = inputs_path.stem().string() + "+" + targets_path.stem().string();
    if (ds.inputs.rows() != ds.targets.rows()) {
        throw DataError("row-count mismatch: " + inputs_path.string() + " has " + std::to_string(ds.inputs.rows()) +
                        " rows, " + targets_path.string() + " has " + std::to_string(ds.targets.rows()));
    }
    return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir, const KeyValues& extra_meta) {
    std::filesystem::create_directories(dir);
    save_csv(dir / "inputs.csv", ds.inputs, "inputs " + std::to_string(ds.inputs.rows()) + "x" +
                                               std::to_string(ds.inputs.cols()));
    save_csv(dir / "targets.csv", ds.targets, "targets " + std::to_string(ds.targets.rows()) + "x" +
                                                  std::to_string(ds.targets.cols()));
    KeyValues meta = extra_meta;
    meta["name"] = ds.name;
    meta["rows"] = std::to_string(ds.inputs.rows());
    meta["input_cols"] = std::to_string(ds.inputs.cols());
    meta["target_cols"] = std::to_string(ds.targets.cols());
    if (ds.meta) {
        meta["latent_dim"] = std::to_string(ds.meta->latent_dim);
        meta["target_noise_sigma"] = format_double(ds.meta->noise_sigma);
        meta["seed"] = std::to_string(ds.meta->seed);
    }
    std::string text;
    for (const auto& [k, v] : meta) {
        text += k + ": " + v + "\n";
    }
    write_text_file(dir / "meta.txt", text);
}

Dataset load_dataset_dir(const std::filesystem::path& dir) {
    Dataset ds = load_csv_dataset(dir / "inputs.csv", dir / "targets.csv");
    const auto meta_path = dir / "meta.txt";
    if (std::filesystem::exists(meta_path)) {
        const KeyValues kv = load_key_values(meta_path);
        if (auto it = kv.find("name"); it != kv.end()) {
            ds.name = it->second;
        }
        if (kv.contains("latent_dim")) {
            GroundTruth gt;
            gt.latent_dim = get_count(kv, "latent_dim", 0);
            gt.noise_sigma = get_real(kv, "target_noise_sigma", 0.0);
            gt.seed = get_count(kv, "seed", 0);
            ds.meta = gt;
        }
    }
    ds.validate();
    return ds;
}

Matrix NormStats::apply(const Matrix& targets) const {
    if (targets.cols() != mean.size()) {
        throw DataError("normalisation stats do not match target width");
    }
    Matrix out = targets;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            row[c] = (row[c] - mean[c]) / stddev[c];
        }
    }
    return out;
}

Matrix NormStats::invert(const Matrix& normalized) const {
    if (normalized.cols() != mean.size()) {
        throw DataError("normalisation stats do not match target width");
    }
    Matrix out = normalized;
    for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            row[c] = row[c] * stddev[c] + mean[c];
        }
    }
    return out;
}

std::pair<Dataset, NormStats> normalize_targets(const Dataset& ds) {
    ds.validate();
    const Matrix& y = ds.targets;
    const auto m = static_cast<double>(y.rows());
    NormStats stats;
    stats.mean.assign(y.cols(), 0.0);
    stats.stddev.assign(y.cols(), 0.0);
    for (std::size_t r = 0; r < y.rows(); ++r) {
        for (std::size_t c = 0; c < y.cols(); ++c) {
            stats.mean[c] += y(r, c);
        }
    }
    for (double& v : stats.mean) {
        v /= m;
    }
    for (std::size_t r = 0; r < y.rows(); ++r) {
        for (std::size_t c = 0; c < y.cols(); ++c) {
            const double d = y(r, c) - stats.mean[c];
            stats.stddev[c] += d * d;
        }
    }
    for (std::size_t c = 0; c < y.cols(); ++c) {
        stats.stddev[c] = std::sqrt(stats.stddev[c] / m);
        if (!(stats.stddev[c] > 1e-12)) {
            throw DataError("target coordinate " + std::to_string(c) + " is constant and cannot be normalised");
        }
    }
    Dataset out = ds;
    out.targets = stats.apply(y);
    return {std::move(out), std::move(stats)};
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("train_fraction must lie strictly between 0 and 1");
    }
    const std::size_t m = ds.size();
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(m) + 0.5));
    if (n_train == 0 || n_train >= m) {
        throw DataError("split of " + std::to_string(m) + " rows at fraction " + format_double(train_fraction) +
                        " leaves an empty part");
    }
    Rng rng(seed);
    std::vector<std::size_t> perm = random_permutation(m, rng);
    std::vector<std::size_t> train_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test_idx(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    auto take = [&](const std::vector<std::size_t>& idx, const char* suffix) {
        Dataset part;
        part.inputs = ds.inputs.select_rows(idx);
        part.targets = ds.targets.select_rows(idx);
        part.name = ds.name + suffix;
        part.meta = ds.meta;
        return part;
    };
    return {take(train_idx, "/train"), take(test_idx, "/test")};
}

} // namespace nrcid
