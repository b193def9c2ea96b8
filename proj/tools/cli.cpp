#include "nrcid/cli.hpp"
#include "nrcid/collapse.hpp"
#include "nrcid/datagen.hpp"
#include "nrcid/errors.hpp"
#include "nrcid/experiments.hpp"
#include "nrcid/idest.hpp"
#include "nrcid/io.hpp"
#include "nrcid/random.hpp"
#include "nrcid/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <ostream>

namespace fs = std::filesystem;

namespace nrcid {
namespace {

struct GenArgs {
    std::string spec;
    std::string out;
};

struct EstimateArgs {
    std::string data;
    double discard = 0.0;
    std::string decimate;
    std::size_t reps = 5;
    std::uint64_t seed = 0;
};

struct Nrc1Args {
    std::string features;
    std::size_t n = 0;
};

struct TrainArgs {
    std::string data_dir;
    std::size_t layers = 3;
    std::size_t width = 64;
    double wd = 0.0;
    std::size_t epochs = 100;
    double lr = 1e-2;
    std::uint64_t seed = 0;
    std::string probe_epochs;
    std::size_t batch_size = 32;
    std::size_t probe_size = 2000;
    double train_fraction = 0.8;
    std::string out = ".";
};

struct SweepArgs {
    std::string grid;
    std::string data_dir;
    std::string out;
    std::size_t workers = 0;
};

struct ReportArgs {
    std::string records;
};

std::vector<std::size_t> parse_sizes(const std::string& text, const char* what) {
    std::vector<std::size_t> out;
    for (const auto& item : split_list(text)) {
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(item, &used);
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::logic_error&) {
            throw std::invalid_argument(std::string(what) + " expects comma separated integers, got '" + item + "'");
        }
    }
    return out;
}

void run_gen(const GenArgs& a, std::ostream& out) {
    const ManifoldSpec spec = load_manifold_spec(a.spec);
    const Dataset ds = gen_manifold_task(spec);
    save_dataset(ds, a.out, spec.to_key_values());
    out << "wrote " << ds.size() << " samples to " << a.out << '\n';
}

void run_estimate(const EstimateArgs& a, std::ostream& out) {
    const Matrix points = load_csv(a.data);
    IdOptions opts;
    opts.discard_fraction = a.discard;
    opts.seed = a.seed;
    if (a.decimate.empty()) {
        const IdEstimate est = estimate_id(points, opts);
        out << "id: " << format_double(est.id) << '\n'
            << "pairs_used: " << est.pairs_used << '\n'
            << "discard_fraction: " << format_double(est.discard_fraction) << '\n'
            << "fit_rmse: " << format_double(est.fit_rmse) << '\n'
            << "duplicates_removed: " << est.duplicates_removed << '\n';
        return;
    }
    const auto sizes = parse_sizes(a.decimate, "--decimate");
    const auto curve = decimation_curve(points, sizes, a.reps, a.seed, opts);
    out << "# subsample_size,mean_id,std_id,repetitions\n";
    for (const auto& p : curve) {
        out << p.subsample_size << ',' << format_double(p.mean_id) << ',' << format_double(p.std_id) << ','
            << p.repetitions << '\n';
    }
}

void run_nrc1(const Nrc1Args& a, std::ostream& out) {
    const Nrc1Result r = nrc1(load_csv(a.features), a.n);
    out << "nrc1: " << format_double(r.nrc1) << '\n'
        << "n_components: " << r.n_components << '\n'
        << "skipped_points: " << r.skipped_points << '\n'
        << "collapsed: " << (collapse_flag(r.nrc1) ? "yes" : "no") << '\n';
}

void run_train(const TrainArgs& a, std::ostream& out) {
    const Dataset raw = load_dataset_dir(a.data_dir);
    const Dataset data = normalize_targets(raw).first;
    auto [train_set, test_set] = split_dataset(data, a.train_fraction, derive_seed(a.seed, 0x5b11));

    Matrix probe = train_set.inputs;
    if (train_set.size() > a.probe_size) {
        Rng rng(derive_seed(a.seed, 0x9b0b));
        auto idx = sample_without_replacement(train_set.size(), a.probe_size, rng);
        std::sort(idx.begin(), idx.end());
        probe = train_set.inputs.select_rows(idx);
    }

    MlpConfig config;
    config.input_dim = data.inputs.cols();
    config.target_dim = data.targets.cols();
    config.hidden_layers = a.layers;
    config.hidden_width = a.width;
    config.seed = a.seed;

    TrainOptions opts;
    opts.epochs = a.epochs;
    opts.batch_size = std::min(a.batch_size, train_set.size());
    opts.learning_rate = a.lr;
    opts.weight_decay = a.wd;
    opts.shuffle_seed = derive_seed(a.seed, 0x5eed);
    opts.probe_epochs = parse_sizes(a.probe_epochs, "--probe-epochs");

    const TrainResult result = train(init_model(config), train_set, opts, probe);
    fs::create_directories(a.out);
    const fs::path ckpt = fs::path(a.out) / "model.bin";
    save_checkpoint(result.model, ckpt);

    const double train_mse = mse(predict(result.model, train_set.inputs), train_set.targets);
    const double test_mse = mse(predict(result.model, test_set.inputs), test_set.targets);
    out << "checkpoint: " << ckpt.string() << '\n'
        << "train_mse: " << format_double(train_mse) << '\n'
        << "test_mse: " << format_double(test_mse) << '\n'
        << "gap: " << format_double(test_mse - train_mse) << '\n';

    if (!opts.probe_epochs.empty()) {
        const double id_y = try_estimate_id(data.targets);
        std::vector<DynamicsRow> rows;
        for (const auto& row : layer_id_dynamics(result.log, id_y)) {
            rows.push_back({{a.layers, a.width}, a.wd, row});
        }
        const fs::path dyn = fs::path(a.out) / "dynamics.csv";
        write_text_file(dyn, dynamics_to_csv(rows));
        out << "dynamics: " << dyn.string() << '\n';
    }
}

void run_sweep_cmd(const SweepArgs& a, std::ostream& out, std::ostream& err) {
    SweepGrid grid = load_sweep_grid(a.grid);
    if (a.workers > 0) {
        grid.workers = a.workers;
    }
    const Dataset data = load_dataset_dir(a.data_dir);
    const SweepResult result = run_sweep(grid, data);
    for (const auto& r : result.records) {
        err << r.arch.label() << " wd=" << format_double(r.weight_decay) << " took "
            << format_double(r.wall_time_s) << " s" << (r.diverged ? " (diverged)" : "") << '\n';
    }
    emit_report(result, a.out, grid.collapse_threshold);
    out << format_summary(summarize(result.records, grid.collapse_threshold));
}

void run_report(const ReportArgs& a, std::ostream& out) {
    const auto records = load_records_csv(a.records);
    const std::string summary = format_summary(summarize(records));
    write_text_file(fs::path(a.records).parent_path() / "summary.txt", summary);
    out << summary;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Intrinsic dimension and collapse diagnostics for regression networks", "nrcid"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic manifold task");
    gen_cmd->add_option("--spec", gen.spec, "key: value task description")->required()->check(CLI::ExistingFile);
    gen_cmd->add_option("--out", gen.out, "output directory")->required();

    EstimateArgs est;
    auto* est_cmd = app.add_subcommand("estimate-id", "two-nearest-neighbour intrinsic dimension of a CSV");
    est_cmd->add_option("--data", est.data, "numeric CSV, one point per row")->required();
    est_cmd->add_option("--discard", est.discard, "fraction of largest ratios to drop")->check(CLI::Range(0.0, 0.999));
    est_cmd->add_option("--decimate", est.decimate, "comma separated subsample sizes");
    est_cmd->add_option("--reps", est.reps, "repetitions per subsample size")->check(CLI::PositiveNumber);
    est_cmd->add_option("--seed", est.seed);

    Nrc1Args nrc;
    auto* nrc_cmd = app.add_subcommand("nrc1", "collapse metric of a feature CSV");
    nrc_cmd->add_option("--features", nrc.features)->required();
    nrc_cmd->add_option("--n", nrc.n, "number of target variates")->required();

    TrainArgs tr;
    auto* tr_cmd = app.add_subcommand("train", "train one network and write a checkpoint");
    tr_cmd->add_option("--data-dir", tr.data_dir, "directory with inputs.csv and targets.csv")->required();
    tr_cmd->add_option("--layers", tr.layers)->required()->check(CLI::PositiveNumber);
    tr_cmd->add_option("--width", tr.width)->required()->check(CLI::PositiveNumber);
    tr_cmd->add_option("--wd", tr.wd)->required()->check(CLI::NonNegativeNumber);
    tr_cmd->add_option("--epochs", tr.epochs)->required();
    tr_cmd->add_option("--lr", tr.lr)->required()->check(CLI::PositiveNumber);
    tr_cmd->add_option("--seed", tr.seed)->required();
    tr_cmd->add_option("--probe-epochs", tr.probe_epochs, "comma separated epochs to probe");
    tr_cmd->add_option("--batch-size", tr.batch_size)->check(CLI::PositiveNumber);
    tr_cmd->add_option("--probe-size", tr.probe_size)->check(CLI::Range(std::size_t{10}, std::size_t{1} << 30));
    tr_cmd->add_option("--train-fraction", tr.train_fraction)->check(CLI::Range(0.0, 1.0));
    tr_cmd->add_option("--out", tr.out, "output directory");

    SweepArgs sw;
    auto* sw_cmd = app.add_subcommand("sweep", "train and measure every architecture and decay of a grid");
    sw_cmd->add_option("--grid", sw.grid)->required();
    sw_cmd->add_option("--data-dir", sw.data_dir)->required();
    sw_cmd->add_option("--out", sw.out)->required();
    sw_cmd->add_option("--workers", sw.workers)->check(CLI::PositiveNumber);

    ReportArgs rep;
    auto* rep_cmd = app.add_subcommand("report", "recompute summary.txt from records.csv");
    rep_cmd->add_option("--records", rep.records)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (gen_cmd->parsed()) {
            run_gen(gen, out);
        } else if (est_cmd->parsed()) {
            run_estimate(est, out);
        } else if (nrc_cmd->parsed()) {
            run_nrc1(nrc, out);
        } else if (tr_cmd->parsed()) {
            run_train(tr, out);
        } else if (sw_cmd->parsed()) {
            run_sweep_cmd(sw, out, err);
        } else if (rep_cmd->parsed()) {
            run_report(rep, out);
        }
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const fs::filesystem_error& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

} // namespace nrcid
