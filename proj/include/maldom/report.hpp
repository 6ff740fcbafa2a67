#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maldom/bpso.hpp"
#include "maldom/evaluation.hpp"
#include "maldom/stats.hpp"

namespace maldom {

/// One evaluated (model, dataset) cell of a study.
struct EvaluationRow {
    std::string model;
    std::string dataset;
    CvResult cv;
};

/// Long-form summary: model,dataset,metric,mean,std,defined_folds,
/// total_folds. Metrics without a single defined fold keep empty value cells.
void write_report_csv(const std::string& path, const std::vector<EvaluationRow>& rows);

/// Per-fold metrics with full pairing context: model,dataset,seed,k,repeats,
/// repeat,fold,accuracy,precision,recall,f_measure. Values are printed with
/// round-trip precision; undefined metrics are empty cells.
void write_folds_csv(const std::string& path, const std::vector<EvaluationRow>& rows,
                     std::uint64_t seed, int k, int repeats);

struct FoldRow {
    std::string model;
    std::string dataset;
    std::uint64_t seed = 0;
    int k = 0;
    int repeats = 0;
    int repeat = 0;
    int fold = 0;
    MetricsReport report;
};

std::vector<FoldRow> read_folds_csv(const std::string& path);

/// Global-best fitness trace: iteration,gbest_fitness, one row per
/// iteration run, numbered from 1.
void write_history_csv(const std::string& path, const std::vector<double>& history);

void write_pvalues_csv(const std::string& path, const std::vector<PairwiseComparison>& table);

/// Mean ranks, lower = better: model,mean_rank.
void write_ranks_csv(const std::string& path, const std::vector<std::string>& names,
                     const FriedmanResult& fr);

std::string format_report_table(const std::vector<EvaluationRow>& rows);
std::string format_rank_table(const std::vector<std::string>& names, const FriedmanResult& fr);
std::string format_pvalue_table(const std::vector<PairwiseComparison>& table);
std::string format_tune_table(const TuneResult& tuned);
std::string format_mask(const FeatureMask& mask, const std::vector<std::string>& schema);

}  // namespace maldom
