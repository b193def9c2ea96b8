#include "nrcid/report.hpp"
#include "nrcid/errors.hpp"
#include "nrcid/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace nrcid {
namespace {

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') {
        line.remove_suffix(1);
    }
    return line;
}

std::vector<std::string> split_cells(std::string_view line) {
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        cells.emplace_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (comma == std::string_view::npos) {
            return cells;
        }
        pos = comma + 1;
    }
}

std::size_t parse_size(const std::string& cell, const std::string& where) {
    std::size_t v = 0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        throw DataError(where + ": expected an integer, got '" + cell + "'");
    }
    return v;
}

double parse_real(const std::string& cell, const std::string& where) {
    double v = 0.0;
    if (!parse_double(cell, v)) {
        throw DataError(where + ": expected a number, got '" + cell + "'");
    }
    return v;
}

std::optional<double> safe_spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() < 3) {
        return std::nullopt;
    }
    try {
        return spearman(xs, ys);
    } catch (const NumericalError&) {
        return std::nullopt;
    }
}

std::string optional_text(const std::optional<double>& v) {
    return v ? format_double(*v) : "undefined";
}

} // namespace

std::string records_to_csv(const std::vector<SweepRecord>& records) {
    std::string out = "# " + std::string(kRecordsHeader) + "\n";
    for (const auto& r : records) {
        out += std::to_string(r.arch.layers) + ',' + std::to_string(r.arch.width) + ',' + format_double(r.weight_decay) +
               ',' + format_double(r.train_mse) + ',' + format_double(r.test_mse) + ',' + format_double(r.gap) + ',' +
               format_double(r.nrc1) + ',' + format_double(r.id_h) + ',' + format_double(r.id_p) + ',' +
               format_double(r.id_y) + ',' + (r.regime ? std::string(regime_name(*r.regime)) : "NA") + ',' +
               std::to_string(r.epochs) + ',' + (r.diverged ? "1" : "0") + '\n';
    }
    return out;
}

std::vector<SweepRecord> parse_records_csv(std::string_view text, const std::string& source) {
    std::vector<SweepRecord> records;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        const std::string_view line =
            strip_cr(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const std::string where = source + ":" + std::to_string(line_no);
        const auto cells = split_cells(line);
        if (cells.size() != 13) {
            throw DataError(where + ": expected 13 cells, got " + std::to_string(cells.size()));
        }
        SweepRecord r;
        r.arch.layers = parse_size(cells[0], where);
        r.arch.width = parse_size(cells[1], where);
        r.weight_decay = parse_real(cells[2], where);
        r.train_mse = parse_real(cells[3], where);
        r.test_mse = parse_real(cells[4], where);
        r.gap = parse_real(cells[5], where);
        r.nrc1 = parse_real(cells[6], where);
        r.id_h = parse_real(cells[7], where);
        r.id_p = parse_real(cells[8], where);
        r.id_y = parse_real(cells[9], where);
        if (cells[10] != "NA") {
            r.regime = parse_regime(cells[10]);
        }
        r.epochs = parse_size(cells[11], where);
        if (cells[12] != "0" && cells[12] != "1") {
            throw DataError(where + ": diverged flag must be 0 or 1");
        }
        r.diverged = cells[12] == "1";
        records.push_back(r);
    }
    if (records.empty()) {
        throw DataError(source + ": no records");
    }
    return records;
}

std::vector<SweepRecord> load_records_csv(const std::filesystem::path& path) {
    return parse_records_csv(read_text_file(path), path.string());
}

std::string dynamics_to_csv(const std::vector<DynamicsRow>& rows) {
    std::string out = "# layers,width,weight_decay,epoch,layer,id\n";
    for (const auto& d : rows) {
        out += std::to_string(d.arch.layers) + ',' + std::to_string(d.arch.width) + ',' +
               format_double(d.weight_decay) + ',' + std::to_string(d.row.epoch) + ',' + d.row.layer + ',' +
               format_double(d.row.id) + '\n';
    }
    return out;
}

std::string collapse_vs_error_csv(const std::vector<SweepRecord>& records) {
    std::vector<const SweepRecord*> usable;
    for (const auto& r : records) {
        if (!r.diverged && std::isfinite(r.nrc1) && std::isfinite(r.test_mse)) {
            usable.push_back(&r);
        }
    }
    auto range = [&](auto field) {
        double lo = INFINITY, hi = -INFINITY;
        for (const auto* r : usable) {
            lo = std::min(lo, field(*r));
            hi = std::max(hi, field(*r));
        }
        return std::pair{lo, hi};
    };
    auto scale = [](double v, std::pair<double, double> lh) {
        return lh.second > lh.first ? (v - lh.first) / (lh.second - lh.first) : 0.0;
    };
    const auto nrc_range = range([](const SweepRecord& r) { return r.nrc1; });
    const auto mse_range = range([](const SweepRecord& r) { return r.test_mse; });
    std::string out = "# layers,width,weight_decay,nrc1_norm,test_mse_norm\n";
    for (const auto* r : usable) {
        out += std::to_string(r->arch.layers) + ',' + std::to_string(r->arch.width) + ',' +
               format_double(r->weight_decay) + ',' + format_double(scale(r->nrc1, nrc_range)) + ',' +
               format_double(scale(r->test_mse, mse_range)) + '\n';
    }
    return out;
}

SweepSummary summarize(const std::vector<SweepRecord>& records, double collapse_threshold) {
    if (records.empty()) {
        throw std::invalid_argument("summarize needs at least one record");
    }
    SweepSummary s;
    s.records = records.size();
    s.collapse_threshold = collapse_threshold;
    s.id_y = records.front().id_y;

    std::vector<double> idh_train, train, idh_test, test, nrc_hi, idh_hi;
    for (const auto& r : records) {
        if (r.diverged) {
            ++s.diverged;
            continue;
        }
        if (!r.regime) {
            ++s.unmeasured;
        } else if (*r.regime == Regime::OverCompressed) {
            ++s.over_compressed;
        } else if (*r.regime == Regime::Balanced) {
            ++s.balanced;
        } else {
            ++s.under_compressed;
        }
        if (std::isfinite(r.nrc1) && r.nrc1 < collapse_threshold) {
            ++s.collapsed;
        }
        if (!std::isfinite(r.id_h)) {
            continue;
        }
        if (std::isfinite(r.train_mse)) {
            idh_train.push_back(r.id_h);
            train.push_back(r.train_mse);
        }
        if (std::isfinite(r.test_mse)) {
            idh_test.push_back(r.id_h);
            test.push_back(r.test_mse);
        }
        if (std::isfinite(r.nrc1) && r.nrc1 > collapse_threshold) {
            nrc_hi.push_back(r.nrc1);
            idh_hi.push_back(r.id_h);
        }
    }
    s.spearman_id_h_train = safe_spearman(idh_train, train);
    s.spearman_id_h_test = safe_spearman(idh_test, test);
    s.spearman_nrc1_id_h = safe_spearman(nrc_hi, idh_hi);
    if (idh_test.size() >= 5) {
        s.ushape_min_id_h = ushape_min_location(idh_test, test);
    }
    return s;
}

std::string format_summary(const SweepSummary& s) {
    std::ostringstream out;
    out << "records: " << s.records << '\n'
        << "diverged: " << s.diverged << '\n'
        << "id_y: " << format_double(s.id_y) << '\n'
        << "regime_over_compressed: " << s.over_compressed << '\n'
        << "regime_balanced: " << s.balanced << '\n'
        << "regime_under_compressed: " << s.under_compressed << '\n'
        << "regime_unmeasured: " << s.unmeasured << '\n'
        << "init: " << kInitScheme << '\n'
        << "collapse_threshold: " << format_double(s.collapse_threshold) << '\n'
        << "collapsed: " << s.collapsed << '\n'
        << "spearman_id_h_train_mse: " << optional_text(s.spearman_id_h_train) << '\n'
        << "spearman_id_h_test_mse: " << optional_text(s.spearman_id_h_test) << '\n'
        << "spearman_nrc1_id_h_uncollapsed: " << optional_text(s.spearman_nrc1_id_h) << '\n'
        << "ushape_min_id_h: " << optional_text(s.ushape_min_id_h) << '\n';
    return out.str();
}

void emit_report(const SweepResult& result, const std::filesystem::path& out_dir, double collapse_threshold) {
    if (result.records.empty()) {
        throw std::invalid_argument("emit_report needs at least one record");
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw DataError("cannot create " + out_dir.string() + ": " + ec.message());
    }
    write_text_file(out_dir / "records.csv", records_to_csv(result.records));
    write_text_file(out_dir / "summary.txt", format_summary(summarize(result.records, collapse_threshold)));
    write_text_file(out_dir / "collapse_vs_error.csv", collapse_vs_error_csv(result.records));
    if (!result.dynamics.empty()) {
        write_text_file(out_dir / "dynamics.csv", dynamics_to_csv(result.dynamics));
    }
}

} // namespace nrcid
