#include "nrcid/experiments.hpp"
#include "nrcid/collapse.hpp"
#include "nrcid/datagen.hpp"
#include "nrcid/errors.hpp"
#include "nrcid/idest.hpp"
#include "nrcid/random.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace nrcid {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) {
            ++j;
        }
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = avg;
        }
        i = j + 1;
    }
    return ranks;
}

std::vector<std::size_t> parse_count_list(const std::string& text, const std::string& key) {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(text)) {
        std::size_t v = 0;
        const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
        if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
            throw DataError("key '" + key + "' expects a list of integers, got '" + item + "'");
        }
        out.push_back(v);
    }
    return out;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        out += (i ? ", " : "") + items[i];
    }
    return out;
}

bool same_double(double a, double b) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b) || (std::isnan(a) && std::isnan(b));
}

} // namespace

std::string_view regime_name(Regime r) {
    switch (r) {
    case Regime::OverCompressed:
        return "OverCompressed";
    case Regime::Balanced:
        return "Balanced";
    case Regime::UnderCompressed:
        return "UnderCompressed";
    }
    return "?";
}

Regime parse_regime(std::string_view name) {
    for (Regime r : {Regime::OverCompressed, Regime::Balanced, Regime::UnderCompressed}) {
        if (name == regime_name(r)) {
            return r;
        }
    }
    throw DataError("unknown regime label '" + std::string(name) + "'");
}

Regime classify_regime(double id_h, double id_y, double rel_tol) {
    if (!(id_h > 0.0) || !(id_y > 0.0)) {
        throw std::invalid_argument("classify_regime needs positive intrinsic dimensions");
    }
    if (!(rel_tol >= 0.0)) {
        throw std::invalid_argument("classify_regime needs a non-negative tolerance");
    }
    if (std::abs(id_h - id_y) <= rel_tol * id_y) {
        return Regime::Balanced;
    }
    return id_h < id_y ? Regime::OverCompressed : Regime::UnderCompressed;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 3) {
        throw std::invalid_argument("spearman needs two lists of equal length >= 3");
    }
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    const double n = static_cast<double>(xs.size());
    const double mean = (n + 1.0) / 2.0;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mean) * (ry[i] - mean);
        sxx += (rx[i] - mean) * (rx[i] - mean);
        syy += (ry[i] - mean) * (ry[i] - mean);
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw NumericalError("undefined correlation: a list is constant");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double ushape_min_location(std::span<const double> id_h, std::span<const double> test_mse) {
    if (id_h.size() != test_mse.size()) {
        throw std::invalid_argument("ushape_min_location: lists differ in length");
    }
    if (id_h.size() < 5) {
        throw std::invalid_argument("ushape_min_location needs at least 5 records");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < id_h.size(); ++i) {
        if (test_mse[i] < test_mse[best] || (test_mse[i] == test_mse[best] && id_h[i] < id_h[best])) {
            best = i;
        }
    }
    return id_h[best];
}

std::string Architecture::label() const {
    return std::to_string(layers) + "x" + std::to_string(width);
}

Architecture Architecture::parse(std::string_view text) {
    const auto x = text.find('x');
    Architecture a;
    auto parse_part = [&](std::string_view part, std::size_t& out) {
        const auto res = std::from_chars(part.data(), part.data() + part.size(), out);
        return !part.empty() && res.ec == std::errc() && res.ptr == part.data() + part.size() && out > 0;
    };
    if (x == std::string_view::npos || !parse_part(text.substr(0, x), a.layers) ||
        !parse_part(text.substr(x + 1), a.width)) {
        throw DataError("architecture must look like <layers>x<width>, got '" + std::string(text) + "'");
    }
    return a;
}

void SweepGrid::validate() const {
    if (architectures.empty() || weight_decays.empty()) {
        throw std::invalid_argument("sweep grid needs at least one architecture and one weight decay");
    }
    for (double wd : weight_decays) {
        if (!(wd >= 0.0) || !std::isfinite(wd)) {
            throw std::invalid_argument("weight decays must be finite and non-negative");
        }
    }
    if (batch_size < 1 || !(learning_rate > 0.0)) {
        throw std::invalid_argument("sweep needs batch_size >= 1 and a positive learning rate");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("train_fraction must lie strictly between 0 and 1");
    }
    if (probe_size < 10) {
        throw std::invalid_argument("probe_size must be at least 10");
    }
    if (!std::is_sorted(probe_epochs.begin(), probe_epochs.end()) ||
        (!probe_epochs.empty() && probe_epochs.back() > epochs)) {
        throw std::invalid_argument("probe_epochs must be sorted and at most epochs");
    }
    if (workers < 1) {
        throw std::invalid_argument("workers must be at least 1");
    }
}

KeyValues SweepGrid::to_key_values() const {
    std::vector<std::string> archs, decays, probes;
    for (const auto& a : architectures) {
        archs.push_back(a.label());
    }
    for (double wd : weight_decays) {
        decays.push_back(format_double(wd));
    }
    for (auto e : probe_epochs) {
        probes.push_back(std::to_string(e));
    }
    return {
        {"architectures", join(archs)},
        {"weight_decays", join(decays)},
        {"epochs", std::to_string(epochs)},
        {"batch_size", std::to_string(batch_size)},
        {"learning_rate", format_double(learning_rate)},
        {"train_fraction", format_double(train_fraction)},
        {"probe_size", std::to_string(probe_size)},
        {"seed", std::to_string(seed)},
        {"probe_epochs", join(probes)},
        {"regime_tol", format_double(regime_tol)},
        {"collapse_threshold", format_double(collapse_threshold)},
        {"normalize_targets", normalize_targets ? "true" : "false"},
        {"penalize_hidden_bias", bias_penalty == BiasPenalty::IncludeHiddenBias ? "true" : "false"},
        {"workers", std::to_string(workers)},
    };
}

SweepGrid SweepGrid::from_key_values(const KeyValues& kv) {
    static const std::set<std::string> known = {
        "architectures", "weight_decays", "epochs",     "batch_size",         "learning_rate",
        "train_fraction", "probe_size",   "seed",       "probe_epochs",       "regime_tol",
        "collapse_threshold", "normalize_targets", "penalize_hidden_bias", "workers"};
    for (const auto& [k, v] : kv) {
        if (!known.contains(k)) {
            throw DataError("unknown sweep grid key '" + k + "'");
        }
    }
    auto flag = [&](const std::string& key, bool fallback) {
        const auto it = kv.find(key);
        if (it == kv.end()) {
            return fallback;
        }
        if (it->second == "true" || it->second == "1") {
            return true;
        }
        if (it->second == "false" || it->second == "0") {
            return false;
        }
        throw DataError("key '" + key + "' expects true or false");
    };

    SweepGrid g;
    if (auto it = kv.find("architectures"); it != kv.end()) {
        for (const auto& item : split_list(it->second)) {
            g.architectures.push_back(Architecture::parse(item));
        }
    }
    if (auto it = kv.find("weight_decays"); it != kv.end()) {
        for (const auto& item : split_list(it->second)) {
            double v = 0.0;
            if (!parse_double(item, v)) {
                throw DataError("bad weight decay '" + item + "'");
            }
            g.weight_decays.push_back(v);
        }
    }
    g.epochs = get_count(kv, "epochs", g.epochs);
    g.batch_size = get_count(kv, "batch_size", g.batch_size);
    g.learning_rate = get_real(kv, "learning_rate", g.learning_rate);
    g.train_fraction = get_real(kv, "train_fraction", g.train_fraction);
    g.probe_size = get_count(kv, "probe_size", g.probe_size);
    g.seed = get_count(kv, "seed", g.seed);
    if (auto it = kv.find("probe_epochs"); it != kv.end()) {
        g.probe_epochs = parse_count_list(it->second, "probe_epochs");
    }
    g.regime_tol = get_real(kv, "regime_tol", g.regime_tol);
    g.collapse_threshold = get_real(kv, "collapse_threshold", g.collapse_threshold);
    g.normalize_targets = flag("normalize_targets", g.normalize_targets);
    g.bias_penalty = flag("penalize_hidden_bias", true) ? BiasPenalty::IncludeHiddenBias : BiasPenalty::WeightsOnly;
    g.workers = get_count(kv, "workers", g.workers);
    try {
        g.validate();
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("invalid sweep grid: ") + e.what());
    }
    return g;
}

SweepGrid load_sweep_grid(const std::filesystem::path& path) {
    return SweepGrid::from_key_values(load_key_values(path));
}

std::uint64_t cell_seed(std::uint64_t base_seed, const Architecture& arch, double weight_decay) {
    const std::uint64_t arch_key = (static_cast<std::uint64_t>(arch.layers) << 32) ^ arch.width;
    return derive_seed(base_seed, arch_key, std::bit_cast<std::uint64_t>(weight_decay));
}

bool SweepRecord::same_measurements(const SweepRecord& o) const {
    return arch == o.arch && same_double(weight_decay, o.weight_decay) && same_double(train_mse, o.train_mse) &&
           same_double(test_mse, o.test_mse) && same_double(gap, o.gap) && same_double(nrc1, o.nrc1) &&
           same_double(id_h, o.id_h) && same_double(id_p, o.id_p) && same_double(id_y, o.id_y) &&
           regime == o.regime && epochs == o.epochs && diverged == o.diverged;
}

double try_estimate_id(const Matrix& points) {
    try {
        return estimate_id(points).id;
    } catch (const DataError&) {
        return kNaN;
    } catch (const NumericalError&) {
        return kNaN;
    }
}

std::vector<LayerIdRow> layer_id_dynamics(const ProbeLog& log, double id_y) {
    if (log.probes.empty()) {
        throw std::invalid_argument("layer_id_dynamics needs at least one probe epoch");
    }
    const double id_input = try_estimate_id(log.probes.front().trace.inputs);
    std::vector<LayerIdRow> rows;
    for (const auto& probe : log.probes) {
        const ActivationTrace& t = probe.trace;
        rows.push_back({probe.epoch, "input", id_input});
        rows.push_back({probe.epoch, "target", id_y});
        double last = kNaN;
        for (std::size_t l = 0; l < t.post_activations.size(); ++l) {
            last = try_estimate_id(t.post_activations[l]);
            rows.push_back({probe.epoch, "hidden" + std::to_string(l + 1), last});
        }
        rows.push_back({probe.epoch, "features", last});
        rows.push_back({probe.epoch, "predictions", try_estimate_id(t.predictions)});
    }
    return rows;
}

namespace {

struct CellOutput {
    SweepRecord record;
    std::vector<LayerIdRow> dynamics;
};

CellOutput run_cell(const SweepGrid& grid, const Architecture& arch, double wd, const Dataset& train_set,
                    const Dataset& test_set, const Matrix& probe_inputs, double id_y) {
    const auto start = std::chrono::steady_clock::now();
    CellOutput out;
    SweepRecord& rec = out.record;
    rec.arch = arch;
    rec.weight_decay = wd;
    rec.id_y = id_y;
    rec.epochs = grid.epochs;

    MlpConfig config;
    config.input_dim = train_set.inputs.cols();
    config.target_dim = train_set.targets.cols();
    config.hidden_layers = arch.layers;
    config.hidden_width = arch.width;
    config.seed = cell_seed(grid.seed, arch, wd);

    TrainOptions opts;
    opts.epochs = grid.epochs;
    opts.batch_size = std::min(grid.batch_size, train_set.size());
    opts.learning_rate = grid.learning_rate;
    opts.weight_decay = wd;
    opts.shuffle_seed = derive_seed(config.seed, 0x5eed);
    opts.probe_epochs = grid.probe_epochs;
    opts.bias_penalty = grid.bias_penalty;

    try {
        TrainResult result = train(init_model(config), train_set, opts, probe_inputs);
        rec.train_mse = mse(predict(result.model, train_set.inputs), train_set.targets);
        rec.test_mse = mse(predict(result.model, test_set.inputs), test_set.targets);
        rec.gap = rec.test_mse - rec.train_mse;

        const ForwardResult probe = forward(result.model, probe_inputs, true);
        const Matrix& features = probe.trace->features;
        try {
            rec.nrc1 = nrc1(features, config.target_dim).nrc1;
        } catch (const std::exception&) {
            rec.nrc1 = kNaN;
        }
        rec.id_h = try_estimate_id(features);
        rec.id_p = try_estimate_id(probe.trace->predictions);
        if (std::isfinite(rec.id_h) && std::isfinite(id_y) && id_y > 0.0) {
            rec.regime = classify_regime(rec.id_h, id_y, grid.regime_tol);
        }
        if (!grid.probe_epochs.empty()) {
            out.dynamics = layer_id_dynamics(result.log, id_y);
        }
    } catch (const DivergenceError& e) {
        rec.diverged = true;
        rec.epochs = e.epoch();
        rec.train_mse = rec.test_mse = rec.gap = rec.nrc1 = rec.id_h = rec.id_p = kNaN;
        rec.regime.reset();
    }
    rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

} // namespace

SweepResult run_sweep(const SweepGrid& grid, const Dataset& data) {
    grid.validate();
    data.validate();
    Dataset prepared = grid.normalize_targets ? normalize_targets(data).first : data;
    auto [train_set, test_set] = split_dataset(prepared, grid.train_fraction, derive_seed(grid.seed, 0x5b11));

    Matrix probe_inputs = train_set.inputs;
    if (train_set.size() > grid.probe_size) {
        Rng rng(derive_seed(grid.seed, 0x9b0b));
        auto idx = sample_without_replacement(train_set.size(), grid.probe_size, rng);
        std::sort(idx.begin(), idx.end());
        probe_inputs = train_set.inputs.select_rows(idx);
    }

    SweepResult result;
    result.id_y = try_estimate_id(prepared.targets);

    struct Cell {
        Architecture arch;
        double wd;
    };
    std::vector<Cell> cells;
    for (const auto& a : grid.architectures) {
        for (double wd : grid.weight_decays) {
            cells.push_back({a, wd});
        }
    }
    std::vector<CellOutput> outputs(cells.size());
    const auto n_cells = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for num_threads(static_cast<int>(grid.workers)) schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n_cells; ++i) {
        const Cell& c = cells[static_cast<std::size_t>(i)];
        outputs[static_cast<std::size_t>(i)] =
            run_cell(grid, c.arch, c.wd, train_set, test_set, probe_inputs, result.id_y);
    }

    std::vector<std::size_t> order(cells.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (cells[a].arch != cells[b].arch) {
            return cells[a].arch < cells[b].arch;
        }
        return cells[a].wd < cells[b].wd;
    });
    for (std::size_t i : order) {
        result.records.push_back(outputs[i].record);
        for (const auto& row : outputs[i].dynamics) {
            result.dynamics.push_back({cells[i].arch, cells[i].wd, row});
        }
    }
    return result;
}

} // namespace nrcid
