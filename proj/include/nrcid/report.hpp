#pragma once

#include "nrcid/experiments.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nrcid {

inline constexpr std::string_view kRecordsHeader =
    "layers,width,weight_decay,train_mse,test_mse,gap,nrc1,id_h,id_p,id_y,regime,epochs,diverged";

std::string records_to_csv(const std::vector<SweepRecord>& records);
std::vector<SweepRecord> parse_records_csv(std::string_view text, const std::string& source = "<records>");
std::vector<SweepRecord> load_records_csv(const std::filesystem::path& path);

std::string dynamics_to_csv(const std::vector<DynamicsRow>& rows);

/// Test MSE against NRC1, both min-max normalised over the non-diverged records of one sweep.
std::string collapse_vs_error_csv(const std::vector<SweepRecord>& records);

struct SweepSummary {
    std::size_t records = 0;
    std::size_t diverged = 0;
    double id_y = 0.0;
    std::size_t over_compressed = 0;
    std::size_t balanced = 0;
    std::size_t under_compressed = 0;
    std::size_t unmeasured = 0;
    double collapse_threshold = 0.05;
    std::size_t collapsed = 0;
    std::optional<double> spearman_id_h_train;
    std::optional<double> spearman_id_h_test;
    std::optional<double> spearman_nrc1_id_h; ///< over records with nrc1 above the threshold
    std::optional<double> ushape_min_id_h;
};

/// Diverged records and non-finite values are left out of every statistic;
/// a statistic with too few usable records stays empty.
SweepSummary summarize(const std::vector<SweepRecord>& records, double collapse_threshold = 0.05);
std::string format_summary(const SweepSummary& s);

/// Writes records.csv, summary.txt, collapse_vs_error.csv and, when present,
/// dynamics.csv into `out_dir` (created if missing).
void emit_report(const SweepResult& result, const std::filesystem::path& out_dir, double collapse_threshold = 0.05);

} // namespace nrcid
