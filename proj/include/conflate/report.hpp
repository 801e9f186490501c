#pragma once

#include <ostream>
#include <span>
#include <string>

#include <json.hpp>

#include "conflate/datagen.hpp"
#include "conflate/trainer.hpp"

namespace conflate {

// Aligned text table, one block per query direction and one row per report.
std::string format_report_table(std::span<const RankingReport> reports);

// Mean +- std of the k-th retrieved score plus the suggested decision threshold.
std::string format_score_table(const ThresholdAnalysis& analysis);

nlohmann::json metrics_to_json(const DirectionMetrics& m);
nlohmann::json report_to_json(const RankingReport& report, const nlohmann::json& run_config);

// Per-query listing: query, ground truth, rank of the truth, top-4 results with scores.
void write_rank_csv_header(std::ostream& out);
void write_rank_csv_rows(std::ostream& out, const SplitEvaluation& eval, const Dataset& data,
                         std::span<const std::size_t> split, std::size_t fold);
void write_rank_csv(std::ostream& out, const RankingReport& report, const Dataset& data);

}  // namespace conflate
