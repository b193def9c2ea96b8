// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//
//   nrcid_acceptance [--only A1,A5,...] [--out DIR]
//
// --out keeps the sweep reports (records.csv, summary.txt, ...) of A5-A7.

#include "nrcid/collapse.hpp"
#include "nrcid/datagen.hpp"
#include "nrcid/errors.hpp"
#include "nrcid/experiments.hpp"
#include "nrcid/idest.hpp"
#include "nrcid/io.hpp"
#include "nrcid/mlp.hpp"
#include "nrcid/random.hpp"
#include "nrcid/report.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace nrcid;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

std::optional<fs::path> g_out_dir;

void keep_report(const SweepResult& r, const std::string& name) {
    if (g_out_dir) {
        emit_report(r, *g_out_dir / name);
    }
}

Dataset regression_task(std::size_t samples, double sigma) {
    ManifoldSpec spec;
    spec.latent_dim = 2;
    spec.input_dim = 20;
    spec.target_dim = 2;
    spec.samples = samples;
    spec.target_noise_sigma = sigma;
    spec.seed = 0;
    return gen_manifold_task(spec);
}

std::vector<Architecture> three_layer(std::initializer_list<std::size_t> widths) {
    std::vector<Architecture> out;
    for (std::size_t w : widths) {
        out.push_back({3, w});
    }
    return out;
}

// Sweeps shared by several criteria, computed on first use.

const SweepResult& noisy_sweep() {
    static const SweepResult result = [] {
        SweepGrid g;
        g.architectures = three_layer({16, 32, 64, 128, 256});
        g.weight_decays = {0.0, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
        g.epochs = 3000;
        g.batch_size = 32;
        g.learning_rate = 1e-2;
        SweepResult r = run_sweep(g, regression_task(800, 0.5));
        keep_report(r, "noisy_sweep");
        return r;
    }();
    return result;
}

const SweepResult& clean_sweep() {
    static const SweepResult result = [] {
        SweepGrid g;
        g.architectures = three_layer({4, 8, 16, 32, 64});
        g.weight_decays = {0.0, 1e-4, 1e-3, 1e-2, 3e-2, 1e-1};
        g.epochs = 500;
        g.batch_size = 32;
        g.learning_rate = 1e-2;
        SweepResult r = run_sweep(g, regression_task(10000, 0.0));
        keep_report(r, "clean_sweep");
        return r;
    }();
    return result;
}

double sweep_seconds(const SweepResult& r) {
    double total = 0.0;
    for (const auto& rec : r.records) {
        total += rec.wall_time_s;
    }
    return total;
}

bool usable(const SweepRecord& r) {
    return !r.diverged && std::isfinite(r.id_h) && std::isfinite(r.test_mse) && std::isfinite(r.train_mse);
}

std::optional<double> spearman_or_empty(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 3) {
        return std::nullopt;
    }
    try {
        return spearman(a, b);
    } catch (const NumericalError&) {
        return std::nullopt;
    }
}

std::string opt_text(const std::optional<double>& v) {
    return v ? fmt(*v) : "undefined";
}

Outcome a1_pareto() {
    Outcome o{true, ""};
    for (double d : {1.0, 3.0, 7.0}) {
        Stopwatch sw;
        Rng rng(static_cast<std::uint64_t>(d) * 7919);
        std::vector<double> mu(100000);
        for (auto& v : mu) {
            v = std::pow(1.0 - uniform01(rng), -1.0 / d);
        }
        const double est = estimate_id_from_ratios(mu).id;
        const double t = sw.seconds();
        const bool ok = std::abs(est - d) <= 0.02 * d && t < 5.0;
        o.pass = o.pass && ok;
        o.detail += "d=" + fmt(d) + " est=" + fmt(est, 5) + " (" + fmt(t, 2) + " s) ";
    }
    return o;
}

Outcome a2_manifold() {
    Stopwatch sw;
    Outcome o{true, ""};
    double previous = 0.0;
    for (std::size_t d : {1u, 2u, 5u, 8u}) {
        const double est = estimate_id(gen_hypercube(d, 50, 10000, d)).id;
        const double target = static_cast<double>(d);
        o.pass = o.pass && std::abs(est - target) <= 0.1 * target && est > previous;
        previous = est;
        o.detail += "d=" + std::to_string(d) + " est=" + fmt(est, 5) + " ";
    }
    const double t = sw.seconds();
    o.pass = o.pass && t < 30.0;
    o.detail += "total " + fmt(t, 3) + " s";
    return o;
}

Outcome a3_nrc1() {
    Outcome o{true, ""};
    double worst = 0.0;
    for (std::size_t n : {1u, 2u, 3u}) {
        const Matrix h = oracle::matmul(oracle::gaussian_matrix(2000, n, 10 + n), oracle::gaussian_matrix(n, 32, 20 + n));
        worst = std::max(worst, nrc1(h, n).nrc1);
    }
    const double iso = nrc1(oracle::gaussian_matrix(100000, 64, 1), 2).nrc1;
    o.pass = worst <= 1e-10 && std::abs(iso - 62.0 / 64.0) <= 0.005;
    o.detail = "exact-rank max=" + fmt(worst, 3) + " isotropic=" + fmt(iso, 6);
    return o;
}

Outcome a4_gradients() {
    Stopwatch sw;
    std::mt19937 gen(2025);
    std::uniform_int_distribution<std::size_t> dim(1, 5), depth(1, 3), width(2, 8), rows(3, 16);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        MlpConfig c;
        c.input_dim = dim(gen);
        c.hidden_layers = depth(gen);
        c.hidden_width = width(gen);
        c.target_dim = dim(gen);
        c.seed = 500 + trial;
        MlpModel m = init_model(c);
        const Matrix jitter = oracle::random_matrix(1, m.parameter_count(), 600 + trial, -0.3, 0.3);
        std::size_t k = 0;
        for (double* p : oracle::parameters(m)) {
            if (*p == 0.0) {
                *p = jitter.values()[k];
            }
            ++k;
        }
        const std::size_t n = rows(gen);
        const Matrix x = oracle::random_matrix(n, c.input_dim, 700 + trial);
        const Matrix y = oracle::random_matrix(n, c.target_dim, 800 + trial);
        const double wd = 0.005 * trial;
        const auto analytic = oracle::flatten(backward(m, x, y, wd));
        const auto numeric = oracle::finite_difference_gradient(m, x, y, wd);
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-6});
            worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
        }
    }
    const double t = sw.seconds();
    return {worst < 1e-5 && t < 10.0, "max relative error " + fmt(worst, 3) + " (" + fmt(t, 2) + " s)"};
}

Outcome a5_collapse_vs_decay() {
    Stopwatch sw;
    SweepGrid g;
    g.architectures = {{3, 64}};
    g.weight_decays = {0.0, 1e-4, 1e-3, 1e-2};
    g.epochs = 2000;
    g.batch_size = 32;
    g.learning_rate = 1e-2;
    const SweepResult r = run_sweep(g, regression_task(5000, 0.0));
    keep_report(r, "collapse_vs_decay");
    std::vector<double> seq;
    for (const auto& rec : r.records) {
        seq.push_back(rec.diverged ? std::nan("") : rec.nrc1);
    }
    int inversions = 0;
    bool finite = true;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        finite = finite && std::isfinite(seq[i]);
        if (i > 0 && seq[i] > seq[i - 1]) {
            ++inversions;
        }
    }
    const double t = sw.seconds();
    const bool pass = finite && inversions <= 1 && seq.back() < 0.1 * seq.front() && t < 600.0;
    std::string detail = "NRC1 by decay:";
    for (double v : seq) {
        detail += " " + fmt(v, 3);
    }
    detail += ", inversions " + std::to_string(inversions) + " (" + fmt(t, 3) + " s)";
    return {pass, detail};
}

Outcome a6_ushape() {
    const SweepResult& r = noisy_sweep();
    const double t = sweep_seconds(r);
    std::vector<double> idh, test, idh_hi, test_hi;
    for (const auto& rec : r.records) {
        if (!usable(rec)) {
            continue;
        }
        idh.push_back(rec.id_h);
        test.push_back(rec.test_mse);
        if (rec.id_h > 1.5 * r.id_y) {
            idh_hi.push_back(rec.id_h);
            test_hi.push_back(rec.test_mse);
        }
    }
    std::optional<double> location;
    if (idh.size() >= 5) {
        location = ushape_min_location(idh, test);
    }
    const auto rho = spearman_or_empty(idh_hi, test_hi);
    const double max_idh = idh.empty() ? std::nan("") : *std::max_element(idh.begin(), idh.end());
    const bool loc_ok = location && *location >= 0.5 * r.id_y && *location <= 2.0 * r.id_y;
    const bool rho_ok = rho && *rho > 0.0;
    std::string detail = "ID_Y=" + fmt(r.id_y) + " min-error ID_H=" + opt_text(location) + (loc_ok ? " ok" : " out of band") +
                         "; records with ID_H>1.5*ID_Y: " + std::to_string(idh_hi.size()) +
                         " (largest ID_H " + fmt(max_idh) + "), Spearman=" + opt_text(rho) + " (" + fmt(t, 4) + " s)";
    return {loc_ok && rho_ok && t < 1800.0, detail};
}

Outcome a7_monotone() {
    const SweepResult& r = clean_sweep();
    const double t = sweep_seconds(r);
    std::vector<double> idh, train, test;
    for (const auto& rec : r.records) {
        if (usable(rec)) {
            idh.push_back(rec.id_h);
            train.push_back(rec.train_mse);
            test.push_back(rec.test_mse);
        }
    }
    const auto rho_train = spearman_or_empty(idh, train);
    const auto rho_test = spearman_or_empty(idh, test);
    const bool pass = rho_train && rho_test && *rho_train < -0.6 && *rho_test < -0.5 && t < 2700.0;
    return {pass, "Spearman(ID_H, train)=" + opt_text(rho_train) + " Spearman(ID_H, test)=" + opt_text(rho_test) +
                      " over " + std::to_string(idh.size()) + " records (" + fmt(t, 4) + " s)"};
}

Outcome a8_collapse_overcompression() {
    std::size_t collapsed = 0, compressed = 0;
    for (const SweepResult* r : {&noisy_sweep(), &clean_sweep()}) {
        for (const auto& rec : r->records) {
            if (rec.diverged || !std::isfinite(rec.nrc1) || !std::isfinite(rec.id_h) || rec.nrc1 >= 0.05) {
                continue;
            }
            ++collapsed;
            compressed += rec.id_h < 1.2 * rec.id_y;
        }
    }
    const double frac = collapsed ? static_cast<double>(compressed) / static_cast<double>(collapsed) : 0.0;
    return {collapsed > 0 && frac >= 0.8, std::to_string(compressed) + " of " + std::to_string(collapsed) +
                                              " collapsed records have ID_H < 1.2*ID_Y (" + fmt(100 * frac, 3) + "%)"};
}

Outcome a9_output_tracking() {
    const SweepResult& r = clean_sweep();
    const SweepRecord* best = nullptr;
    for (const auto& rec : r.records) {
        if (!usable(rec) || !std::isfinite(rec.nrc1) || rec.nrc1 < 0.05 || !std::isfinite(rec.id_p)) {
            continue;
        }
        if (!best || rec.test_mse < best->test_mse) {
            best = &rec;
        }
    }
    if (!best) {
        return {false, "no usable non-collapsed record"};
    }
    const double dev = std::abs(best->id_p - best->id_y);
    return {dev <= 0.25 * best->id_y, "best " + best->arch.label() + " wd=" + fmt(best->weight_decay) +
                                          ": ID_P=" + fmt(best->id_p) + " ID_Y=" + fmt(best->id_y) +
                                          " |diff|/ID_Y=" + fmt(dev / best->id_y, 3)};
}

Outcome a10_determinism() {
    const fs::path root = fs::temp_directory_path() / "nrcid_acceptance_a10";
    fs::remove_all(root);
    SweepGrid g;
    g.architectures = {{2, 8}, {3, 16}};
    g.weight_decays = {0.0, 1e-3};
    g.epochs = 40;
    g.batch_size = 16;
    g.probe_epochs = {0, 20, 40};
    g.probe_size = 200;
    g.seed = 11;
    const Dataset data = regression_task(600, 0.1);
    emit_report(run_sweep(g, data), root / "first");
    g.workers = 2;
    emit_report(run_sweep(g, data), root / "second");
    std::vector<std::string> diffs;
    for (const char* f : {"records.csv", "dynamics.csv", "summary.txt", "collapse_vs_error.csv"}) {
        if (read_text_file(root / "first" / f) != read_text_file(root / "second" / f)) {
            diffs.emplace_back(f);
        }
    }

    Matrix m = oracle::gaussian_matrix(50, 7, 3);
    m(0, 0) = 1e-300;
    m(1, 1) = -0.0;
    m(2, 2) = 1.0 / 3.0;
    m(3, 3) = 6.02214076e23;
    save_csv(root / "m.csv", m);
    const bool csv_ok = bitwise_equal(load_csv(root / "m.csv"), m);

    const Dataset ds_back = [&] {
        save_dataset(data, root / "data");
        return load_dataset_dir(root / "data");
    }();
    const bool dataset_ok = bitwise_equal(ds_back.inputs, data.inputs) && bitwise_equal(ds_back.targets, data.targets);

    MlpConfig c;
    c.input_dim = 20;
    c.hidden_layers = 3;
    c.hidden_width = 16;
    c.target_dim = 2;
    c.seed = 5;
    TrainOptions opts;
    opts.epochs = 3;
    opts.weight_decay = 1e-3;
    const MlpModel trained = train(init_model(c), data, opts, Matrix()).model;
    save_checkpoint(trained, root / "model.bin");
    const bool ckpt_ok = load_checkpoint(root / "model.bin") == trained;

    const auto records = load_records_csv(root / "first" / "records.csv");
    const bool records_ok = records_to_csv(records) + "" == read_text_file(root / "first" / "records.csv");

    fs::remove_all(root);
    std::string detail = diffs.empty() ? "repeated sweep identical" : "sweep outputs differ:";
    for (const auto& d : diffs) {
        detail += " " + d;
    }
    detail += std::string("; csv ") + (csv_ok ? "ok" : "changed") + ", dataset " + (dataset_ok ? "ok" : "changed") +
              ", checkpoint " + (ckpt_ok ? "ok" : "changed") + ", records " + (records_ok ? "ok" : "changed");
    return {diffs.empty() && csv_ok && dataset_ok && ckpt_ok && records_ok, detail};
}

} // namespace

int main(int argc, char** argv) {
    std::set<std::string> only;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc) {
            for (const auto& id : split_list(argv[++i])) {
                only.insert(id);
            }
        } else if (arg == "--out" && i + 1 < argc) {
            g_out_dir = fs::path(argv[++i]);
        } else {
            std::cerr << "usage: nrcid_acceptance [--only A1,A2,...] [--out DIR]\n";
            return 2;
        }
    }

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"A1", a1_pareto},         {"A2", a2_manifold},        {"A3", a3_nrc1},
        {"A4", a4_gradients},      {"A5", a5_collapse_vs_decay}, {"A6", a6_ushape},
        {"A7", a7_monotone},       {"A8", a8_collapse_overcompression},
        {"A9", a9_output_tracking}, {"A10", a10_determinism},
    };

    int failures = 0;
    for (const auto& [id, check] : criteria) {
        if (!only.empty() && !only.contains(id)) {
            continue;
        }
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << id << ": " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
