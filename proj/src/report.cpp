#include "conflate/report.hpp"

#include <cstdio>
#include <sstream>

namespace conflate {
namespace {

std::string pm(double mean, double sd, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f +- %.*f", decimals, mean, decimals, sd);
  return buf;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string model_label(ModelKind kind) {
  switch (kind) {
    case ModelKind::BoC: return "BoC";
    case ModelKind::LSTM: return "LSTM";
    case ModelKind::CNN: return "CNN";
  }
  return "?";
}

std::string direction_title(Direction d) {
  return d == Direction::CleanToCorrupted ? "Using clean strings to query corrupted strings"
                                          : "Using corrupted strings to query clean strings";
}

}  // namespace

std::string format_report_table(std::span<const RankingReport> reports) {
  constexpr std::size_t kModel = 7;
  constexpr std::size_t kCol = 17;
  std::ostringstream out;
  out << pad("Model", kModel) << pad("R@1", kCol) << pad("R@3", kCol) << pad("R@10", kCol)
      << pad("Med r", kCol) << pad("Mean r", kCol) << "Harmonic Mean r\n";
  for (std::size_t d = 0; d < 2; ++d) {
    const auto dir = d == 0 ? Direction::CleanToCorrupted : Direction::CorruptedToClean;
    out << direction_title(dir) << "\n";
    for (const auto& r : reports) {
      const auto& dr = r.directions[d];
      out << pad(model_label(r.kind), kModel) << pad(pm(dr.mean.recall1, dr.stddev.recall1, 2), kCol)
          << pad(pm(dr.mean.recall3, dr.stddev.recall3, 2), kCol)
          << pad(pm(dr.mean.recall10, dr.stddev.recall10, 2), kCol)
          << pad(pm(dr.mean.median_rank, dr.stddev.median_rank, 1), kCol)
          << pad(pm(dr.mean.mean_rank, dr.stddev.mean_rank, 3), kCol)
          << pm(dr.mean.harmonic_mean_rank, dr.stddev.harmonic_mean_rank, 3) << "\n";
    }
  }
  return out.str();
}

std::string format_score_table(const ThresholdAnalysis& a) {
  std::ostringstream out;
  out << pad("top 1", 17) << pad("top 2", 17) << pad("top 3", 17) << "top 4\n";
  for (std::size_t k = 0; k < kTopScores; ++k) {
    const std::string cell = pm(a.means[k], a.stddevs[k], 3);
    out << (k + 1 < kTopScores ? pad(cell, 17) : cell);
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "\nsuggested threshold: (%.3f + %.3f) / 2 = %.3f\n", a.means[0], a.means[1],
                a.threshold);
  out << buf;
  return out.str();
}

nlohmann::json metrics_to_json(const DirectionMetrics& m) {
  return {{"recall_at_1", m.recall1},
          {"recall_at_3", m.recall3},
          {"recall_at_10", m.recall10},
          {"median_rank", m.median_rank},
          {"mean_rank", m.mean_rank},
          {"harmonic_mean_rank", m.harmonic_mean_rank},
          {"top_score_means", m.top_score_means}};
}

nlohmann::json report_to_json(const RankingReport& report, const nlohmann::json& run_config) {
  nlohmann::json j;
  j["model_kind"] = std::string(to_string(report.kind));
  j["run_config"] = run_config;
  j["fold_count"] = report.folds.size();
  nlohmann::json dirs = nlohmann::json::array();
  for (const auto& dr : report.directions) {
    nlohmann::json d;
    d["direction"] = std::string(to_string(dr.direction));
    d["mean"] = metrics_to_json(dr.mean);
    d["stddev"] = metrics_to_json(dr.stddev);
    d["per_fold"] = nlohmann::json::array();
    for (const auto& f : dr.folds) d["per_fold"].push_back(metrics_to_json(f));
    d["threshold_analysis"] = {{"means", dr.threshold.means},
                               {"stddevs", dr.threshold.stddevs},
                               {"threshold", dr.threshold.threshold}};
    dirs.push_back(std::move(d));
  }
  j["directions"] = std::move(dirs);
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : report.folds) {
    nlohmann::json fj;
    fj["fold"] = f.fold;
    fj["epochs_run"] = f.epochs_run;
    fj["best_epoch"] = f.best_epoch;
    fj["best_validation_recall_at_1"] = f.best_validation_recall1;
    fj["curve"] = nlohmann::json::array();
    for (const auto& e : f.curve) {
      fj["curve"].push_back(
          {{"epoch", e.epoch}, {"mean_loss", e.mean_loss}, {"validation_recall_at_1", e.validation_recall1}});
    }
    folds.push_back(std::move(fj));
  }
  j["folds"] = std::move(folds);
  return j;
}

void write_rank_csv_header(std::ostream& out) {
  out << "fold,direction,query,ground_truth,rank";
  for (std::size_t k = 1; k <= kTopScores; ++k) out << ",result" << k << ",score" << k;
  out << "\n";
}

void write_rank_csv_rows(std::ostream& out, const SplitEvaluation& eval, const Dataset& data,
                         std::span<const std::size_t> split, std::size_t fold) {
  const bool a2b = eval.direction == Direction::CleanToCorrupted;
  auto query_of = [&](std::size_t pos) -> const std::string& {
    const auto& p = data.pairs.at(split[pos]);
    return a2b ? p.clean : p.corrupted;
  };
  auto target_of = [&](std::size_t pos) -> const std::string& {
    const auto& p = data.pairs.at(split[pos]);
    return a2b ? p.corrupted : p.clean;
  };
  char score[32];
  for (std::size_t i = 0; i < eval.ranks.size(); ++i) {
    out << fold << ',' << to_string(eval.direction) << ',' << query_of(i) << ',' << target_of(i) << ','
        << eval.ranks[i];
    for (std::size_t k = 0; k < kTopScores; ++k) {
      if (k < eval.top_indices[i].size()) {
        std::snprintf(score, sizeof score, "%.3f", eval.top_scores[i][k]);
        out << ',' << target_of(eval.top_indices[i][k]) << ',' << score;
      } else {
        out << ",,";
      }
    }
    out << "\n";
  }
}

void write_rank_csv(std::ostream& out, const RankingReport& report, const Dataset& data) {
  write_rank_csv_header(out);
  for (const auto& f : report.folds) {
    const FoldSplit split = split_for_fold(data, f.fold);
    for (const auto& eval : f.evaluations) write_rank_csv_rows(out, eval, data, split.test, f.fold);
  }
}

}  // namespace conflate
