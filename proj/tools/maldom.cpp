// Command line front end: generate synthetic data, evaluate model suites
// with repeated cross-validation, tune hyperparameter grids, run swarm
// feature selection and compare paired fold results.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>

#include "maldom/bpso.hpp"
#include "maldom/dataset.hpp"
#include "maldom/evaluation.hpp"
#include "maldom/report.hpp"
#include "maldom/stats.hpp"

namespace {

using namespace maldom;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitComputation = 4;

struct GenerateOptions {
    std::string out;
    int n_per_class = 500;
    double separation = 3.0;
    std::uint64_t seed = 0;
    bool scaled = false;
    std::string scaling_out;
};

struct ModelOverrides {
    int knn_k = KnnParams{}.k;
    double svm_gamma = SvmParams{}.gamma;
    double svm_c = SvmParams{}.c;
    double c45_confidence = C45Params{}.prune_confidence;
    int mlp_max_iterations = MlpParams{}.max_iterations;
    int mlp_hidden = MlpParams{}.hidden;
    int bagging_learners = BaggingParams{}.n_learners;
    int adaboost_learners = AdaBoostParams{}.n_learners;
    int rf_trees = RandomForestParams{}.n_trees;
    int gbm_trees = GbmParams{}.n_trees;

    void apply(ModelSpec& spec) const {
        if (auto* single = std::get_if<ClassifierSpec>(&spec.params)) {
            if (auto* knn = std::get_if<KnnParams>(single)) knn->k = knn_k;
            if (auto* svm = std::get_if<SvmParams>(single)) {
                svm->gamma = svm_gamma;
                svm->c = svm_c;
            }
            if (auto* c45 = std::get_if<C45Params>(single))
                c45->prune_confidence = c45_confidence;
            if (auto* mlp = std::get_if<MlpParams>(single)) {
                mlp->max_iterations = mlp_max_iterations;
                mlp->hidden = mlp_hidden;
            }
        } else {
            auto& ensemble = std::get<EnsembleSpec>(spec.params);
            if (auto* bag = std::get_if<BaggingParams>(&ensemble))
                bag->n_learners = bagging_learners;
            if (auto* ada = std::get_if<AdaBoostParams>(&ensemble))
                ada->n_learners = adaboost_learners;
            if (auto* rf = std::get_if<RandomForestParams>(&ensemble)) rf->n_trees = rf_trees;
            if (auto* gbm = std::get_if<GbmParams>(&ensemble)) gbm->n_trees = gbm_trees;
        }
    }
};

struct EvaluateOptions {
    std::string data;
    std::vector<std::string> models;
    std::string dataset_name;
    int k = 10;
    int repeats = 10;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    int threads = 1;
    bool per_fold_scaling = false;
    std::string mask;
    bool with_selection = false;
    int swarm_size = 30;
    int iterations = 500;
    int fitness_folds = 5;
    ModelOverrides overrides;
};

struct TuneOptions {
    std::string data;
    std::string model = "svm";
    int k = 5;
    int repeats = 1;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    int threads = 1;
};

struct SelectOptions {
    std::string data;
    std::string model = "svm";
    std::string dataset_name;
    int swarm_size = 30;
    int iterations = 500;
    double c1 = 2.0;
    double c2 = 2.0;
    double inertia = 1.0;
    double v_max = 4.0;
    int fitness_folds = 5;
    std::optional<int> stall_window;
    int k = 10;
    int repeats = 10;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    int threads = 1;
    ModelOverrides overrides;
};

struct CompareOptions {
    std::vector<std::string> folds_files;
    std::string metric = "f_measure";
    std::string blocks = "metric";
    double alpha = 0.05;
    std::string out_dir = ".";
};

std::string default_dataset_name(const std::string& data_path) {
    return std::filesystem::path(data_path).stem().string();
}

void ensure_out_dir(const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());
}

std::string out_path(const std::string& out_dir, const std::string& name) {
    return (std::filesystem::path(out_dir) / name).string();
}

void write_effective_config(const CLI::App& app, const std::string& out_dir) {
    std::ofstream out(out_path(out_dir, "effective_config.txt"));
    if (!out) throw IoError("cannot write effective_config.txt in " + out_dir);
    out << app.config_to_str(true, true);
}

void run_generate(const GenerateOptions& opt) {
    if (opt.n_per_class < 1) throw ConfigError("--n-per-class must be positive");
    if (opt.separation < 0.0) throw ConfigError("--separation must be non-negative");
    Dataset data = generate_synthetic(opt.n_per_class, opt.separation, opt.seed);
    if (opt.scaled) data = min_max_scale(data);
    save_csv(data, opt.out);
    if (!opt.scaling_out.empty()) {
        if (!opt.scaled)
            throw ConfigError("--scaling-out needs --scaled; raw output has no parameters");
        save_scaling_params(data, opt.scaling_out);
    }
    std::cout << "wrote " << data.n_records() << " records ("
              << data.class_count(Label::Malicious) << " malicious, "
              << data.class_count(Label::Benign) << " benign) to " << opt.out << '\n';
}

Dataset load_for_cli(const std::string& path, const std::string& mask_string) {
    Dataset data = load_csv_any_schema(path);
    if (mask_string.empty()) return data;
    FeatureMask mask = FeatureMask::from_string(mask_string);
    if (static_cast<Eigen::Index>(mask.size()) != data.n_features())
        throw ConfigError("--mask has " + std::to_string(mask.size()) + " bits but " + path +
                          " has " + std::to_string(data.n_features()) + " features");
    return apply_mask(data, mask);
}

CvOptions cv_options_from(int k, int repeats, std::uint64_t seed, int threads,
                          bool per_fold_scaling) {
    CvOptions cv;
    cv.k = k;
    cv.repeats = repeats;
    cv.seed = seed;
    cv.n_threads = threads;
    cv.scale_per_fold = per_fold_scaling;
    return cv;
}

bool run_evaluate(const EvaluateOptions& opt) {
    ensure_out_dir(opt.out_dir);
    Dataset data = load_for_cli(opt.data, opt.mask);
    std::string dataset_name =
        opt.dataset_name.empty() ? default_dataset_name(opt.data) : opt.dataset_name;
    CvOptions cv = cv_options_from(opt.k, opt.repeats, opt.seed, opt.threads,
                                   opt.per_fold_scaling);

    std::vector<ModelSpec> suite;
    for (const std::string& name : opt.models) {
        ModelSpec spec = model_spec_by_name(name);
        opt.overrides.apply(spec);
        suite.push_back(std::move(spec));
    }

    std::vector<EvaluationRow> rows;
    std::map<std::string, std::string> failures;
    for (std::size_t m = 0; m < suite.size(); ++m) {
        const ModelSpec& spec = suite[m];
        try {
            if (opt.with_selection) {
                BpsoConfig bpso;
                bpso.swarm_size = opt.swarm_size;
                bpso.iterations = opt.iterations;
                bpso.fitness_folds = opt.fitness_folds;
                bpso.seed = derive_seed(opt.seed, 7000 + m);
                bpso.n_threads = opt.threads;
                SelectionResult sel = select_features(data, spec, bpso);
                write_history_csv(out_path(opt.out_dir, "history_" + spec.name + ".csv"),
                                  sel.swarm.history);
                std::ofstream mask_out(out_path(opt.out_dir, "mask_" + spec.name + ".txt"));
                mask_out << sel.swarm.best_mask.to_string() << '\n';
                Dataset masked = apply_mask(data, sel.swarm.best_mask);
                rows.push_back({"FS_" + spec.name, dataset_name,
                                cross_validate(spec, masked, cv)});
            } else {
                rows.push_back({spec.name, dataset_name, cross_validate(spec, data, cv)});
            }
        } catch (const Error& e) {
            failures[spec.name] = e.what();
            std::cerr << "model " << spec.name << " failed: " << e.what() << '\n';
        }
    }
    if (rows.empty())
        throw FitError("every requested model failed; see messages above");

    write_report_csv(out_path(opt.out_dir, "report.csv"), rows);
    write_folds_csv(out_path(opt.out_dir, "folds.csv"), rows, opt.seed, opt.k, opt.repeats);
    std::cout << format_report_table(rows);
    if (!failures.empty()) {
        std::cout << "failed models:";
        for (const auto& [name, _] : failures) std::cout << ' ' << name;
        std::cout << '\n';
    }
    return failures.empty();
}

void run_tune(const TuneOptions& opt) {
    ensure_out_dir(opt.out_dir);
    Dataset data = load_csv_any_schema(opt.data);
    CvOptions cv = cv_options_from(opt.k, opt.repeats, opt.seed, opt.threads, false);
    std::vector<ModelSpec> grid;
    if (opt.model == "svm")
        grid = default_svm_grid();
    else if (opt.model == "knn")
        grid = default_knn_grid();
    else
        throw ConfigError("tuning grids exist for svm and knn, not '" + opt.model + "'");
    TuneResult tuned = grid_tune(grid, data, cv);

    std::ofstream out(out_path(opt.out_dir, "tune.csv"));
    if (!out) throw IoError("cannot write tune.csv in " + opt.out_dir);
    out << "candidate,mean_f_measure,std_dev,best\n";
    for (std::size_t i = 0; i < tuned.table.size(); ++i) {
        const TuneEntry& entry = tuned.table[i];
        out << entry.description << ',';
        char buf[80];
        if (entry.f_measure.defined()) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g", entry.f_measure.mean,
                          entry.f_measure.std_dev);
            out << buf;
        } else {
            out << ',';
        }
        out << ',' << (i == tuned.best ? "true" : "false") << '\n';
    }
    std::cout << format_tune_table(tuned);
    std::cout << "best: " << tuned.table[tuned.best].description << '\n';
}

void run_select(const SelectOptions& opt) {
    ensure_out_dir(opt.out_dir);
    Dataset data = load_csv_any_schema(opt.data);
    ModelSpec spec = model_spec_by_name(opt.model);
    opt.overrides.apply(spec);
    BpsoConfig config;
    config.swarm_size = opt.swarm_size;
    config.iterations = opt.iterations;
    config.c1 = opt.c1;
    config.c2 = opt.c2;
    config.inertia = opt.inertia;
    config.v_max = opt.v_max;
    config.fitness_folds = opt.fitness_folds;
    config.stall_window = opt.stall_window;
    config.seed = opt.seed;
    config.n_threads = opt.threads;

    SelectionResult sel = select_features(data, spec, config);
    write_history_csv(out_path(opt.out_dir, "history.csv"), sel.swarm.history);
    std::ofstream mask_out(out_path(opt.out_dir, "mask.txt"));
    if (!mask_out) throw IoError("cannot write mask.txt in " + opt.out_dir);
    mask_out << sel.swarm.best_mask.to_string() << '\n';

    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", sel.swarm.best_fitness);
    std::cout << "selected features for " << spec.name << ":\n"
              << format_mask(sel.swarm.best_mask, data.schema()) << "fitness (mean f-measure): "
              << buf << " over " << sel.swarm.evaluations << " evaluated subsets\n\n";

    // Re-evaluate the winning subset with the full repeated-CV protocol so
    // the selection run ends in a report row comparable to `evaluate` output.
    std::string dataset_name =
        opt.dataset_name.empty() ? default_dataset_name(opt.data) : opt.dataset_name;
    CvOptions cv = cv_options_from(opt.k, opt.repeats, opt.seed, opt.threads, false);
    Dataset masked = apply_mask(data, sel.swarm.best_mask);
    std::vector<EvaluationRow> rows;
    rows.push_back({"FS_" + spec.name, dataset_name, cross_validate(spec, masked, cv)});
    write_report_csv(out_path(opt.out_dir, "report.csv"), rows);
    write_folds_csv(out_path(opt.out_dir, "folds.csv"), rows, opt.seed, opt.k, opt.repeats);
    std::cout << format_report_table(rows);
}

void run_compare(const CompareOptions& opt) {
    ensure_out_dir(opt.out_dir);
    if (opt.metric != "accuracy" && opt.metric != "precision" && opt.metric != "recall" &&
        opt.metric != "f_measure")
        throw ConfigError("--metric must be accuracy, precision, recall or f_measure");
    if (opt.blocks != "metric" && opt.blocks != "repeat" && opt.blocks != "fold")
        throw ConfigError("--blocks must be metric, repeat or fold");

    std::vector<FoldRow> rows;
    for (const std::string& path : opt.folds_files)
        for (FoldRow& row : read_folds_csv(path)) rows.push_back(std::move(row));

    auto pick = [&](const MetricsReport& m) -> std::optional<double> {
        if (opt.metric == "accuracy") return m.accuracy;
        if (opt.metric == "precision") return m.precision;
        if (opt.metric == "recall") return m.recall;
        return m.f_measure;
    };

    // Pairing check first: every model must have scored every
    // (dataset, seed, repeat, fold) cell or the fold files were not produced
    // as one paired run. The surviving cells feed the signed-rank tests.
    std::set<std::string> model_set;
    for (const FoldRow& row : rows) model_set.insert(row.model);
    std::vector<std::string> models(model_set.begin(), model_set.end());
    std::map<std::string, std::map<std::string, double>> fold_blocks;
    std::set<std::string> dropped;
    for (const FoldRow& row : rows) {
        std::string key = row.dataset + "|" + std::to_string(row.seed) + "|" +
                          std::to_string(row.repeat) + "|" + std::to_string(row.fold);
        if (auto v = pick(row.report))
            fold_blocks[key][row.model] = *v;
        else
            dropped.insert(key);  // undefined metric: the cell cannot be paired
    }
    for (const std::string& key : dropped) fold_blocks.erase(key);

    std::vector<const std::map<std::string, double>*> complete;
    for (const auto& [key, cells] : fold_blocks) {
        if (cells.size() == models.size()) {
            complete.push_back(&cells);
        } else {
            throw PairingError("block " + key + " covers " + std::to_string(cells.size()) +
                               " of " + std::to_string(models.size()) +
                               " models; fold files must come from one paired run");
        }
    }
    if (complete.size() < 2)
        throw PairingError("need at least two complete blocks to compare");

    Matrix fold_scores(static_cast<Eigen::Index>(complete.size()),
                       static_cast<Eigen::Index>(models.size()));
    for (std::size_t b = 0; b < complete.size(); ++b)
        for (std::size_t m = 0; m < models.size(); ++m)
            fold_scores(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(m)) =
                complete[b]->at(models[m]);

    // Rank blocks are configurable: mean performance per dataset x metric
    // cell (the default), per-repeat means, or the raw paired fold cells.
    Matrix rank_scores;
    std::string block_desc;
    long rank_dropped = 0;
    if (opt.blocks == "fold") {
        rank_scores = fold_scores;
        block_desc = "per-fold " + opt.metric;
    } else {
        struct Group {
            std::vector<FoldMetrics> folds;
            int repeats = 1;
        };
        std::map<std::string, std::map<std::string, Group>> by_dataset;
        for (const FoldRow& row : rows) {
            Group& g = by_dataset[row.dataset][row.model];
            g.folds.push_back({row.repeat, row.fold, row.report});
            g.repeats = std::max(g.repeats, row.repeats);
        }
        using Picker = std::function<std::optional<double>(const MetricsReport&)>;
        const std::pair<const char*, Picker> metrics_table[] = {
            {"accuracy", [](const MetricsReport& m) { return std::optional{m.accuracy}; }},
            {"precision", [](const MetricsReport& m) { return m.precision; }},
            {"recall", [](const MetricsReport& m) { return m.recall; }},
            {"f_measure", [](const MetricsReport& m) { return m.f_measure; }},
        };
        std::vector<std::vector<double>> block_rows;
        for (const auto& [dataset, groups] : by_dataset) {
            for (const auto& [metric_name, metric_pick] : metrics_table) {
                (void)metric_name;
                if (opt.blocks == "metric") {
                    std::vector<double> cells;
                    for (const std::string& m : models) {
                        MetricAggregate agg = aggregate_metric(
                            groups.at(m).folds, groups.at(m).repeats, metric_pick);
                        if (!agg.defined()) break;
                        cells.push_back(agg.mean);
                    }
                    if (cells.size() == models.size())
                        block_rows.push_back(std::move(cells));
                    else
                        ++rank_dropped;
                } else {
                    int max_repeats = 1;
                    for (const auto& [m, g] : groups)
                        max_repeats = std::max(max_repeats, g.repeats);
                    for (int r = 0; r < max_repeats; ++r) {
                        std::vector<double> cells;
                        for (const std::string& m : models) {
                            double sum = 0.0;
                            long n = 0;
                            for (const FoldMetrics& fm : groups.at(m).folds)
                                if (fm.repeat == r)
                                    if (auto v = metric_pick(fm.report)) {
                                        sum += *v;
                                        ++n;
                                    }
                            if (n == 0) break;
                            cells.push_back(sum / static_cast<double>(n));
                        }
                        if (cells.size() == models.size())
                            block_rows.push_back(std::move(cells));
                        else
                            ++rank_dropped;
                    }
                }
            }
        }
        if (block_rows.size() < 2)
            throw PairingError("need at least two defined rank blocks; got " +
                               std::to_string(block_rows.size()));
        rank_scores.resize(static_cast<Eigen::Index>(block_rows.size()),
                           static_cast<Eigen::Index>(models.size()));
        for (std::size_t b = 0; b < block_rows.size(); ++b)
            for (std::size_t m = 0; m < models.size(); ++m)
                rank_scores(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(m)) =
                    block_rows[b][m];
        block_desc = opt.blocks == "metric" ? "dataset x metric"
                                            : "dataset x metric x repeat";
    }

    FriedmanResult fr = friedman(rank_scores);
    std::vector<PairwiseComparison> table =
        pairwise_comparison_table(models, fold_scores, opt.alpha);
    write_ranks_csv(out_path(opt.out_dir, "ranks.csv"), models, fr);
    write_pvalues_csv(out_path(opt.out_dir, "pvalues.csv"), table);
    std::cout << "ranks: " << rank_scores.rows() << ' ' << block_desc << " blocks";
    if (rank_dropped > 0) std::cout << " (" << rank_dropped << " dropped as undefined)";
    std::cout << "; tests: " << opt.metric << " over " << complete.size() << " paired folds";
    if (!dropped.empty()) std::cout << " (" << dropped.size() << " cells dropped as undefined)";
    std::cout << "\n\n" << format_rank_table(models, fr) << '\n'
              << format_pvalue_table(table);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"malicious web domain classification toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from an INI file");
    app.failure_message(CLI::FailureMessage::help);

    GenerateOptions gen;
    CLI::App* generate = app.add_subcommand("generate", "write a synthetic labelled dataset");
    generate->add_option("--out", gen.out, "output CSV path")->required();
    generate->add_option("--per-class,--n-per-class", gen.n_per_class, "records per class")
        ->capture_default_str();
    generate->add_option("--separation", gen.separation, "class mean distance in noise units")
        ->capture_default_str();
    generate->add_option("--seed", gen.seed, "Rng seed")->capture_default_str();
    generate->add_flag("--scaled", gen.scaled, "min-max scale before writing");
    generate->add_option("--scaling-out", gen.scaling_out,
                         "also write feature,min,max parameters here");

    EvaluateOptions ev;
    CLI::App* evaluate =
        app.add_subcommand("evaluate", "repeated stratified cross-validation of a model suite");
    evaluate->add_option("--data", ev.data, "dataset CSV")->required();
    std::vector<std::string> all_models = {"ann", "svm", "c45", "knn", "bayes",
                                           "bagging", "adaboost", "rf", "gbm"};
    ev.models = all_models;
    evaluate->add_option("--models", ev.models, "models to run")
        ->delimiter(',')
        ->capture_default_str();
    evaluate->add_option("--dataset-name", ev.dataset_name,
                         "label used in reports (default: data file stem)");
    evaluate->add_option("--k", ev.k, "folds")->capture_default_str();
    evaluate->add_option("--repeats", ev.repeats, "cross-validation repeats")
        ->capture_default_str();
    evaluate->add_option("--seed", ev.seed, "Rng seed")->capture_default_str();
    evaluate->add_option("--out-dir", ev.out_dir, "directory for report.csv and folds.csv")
        ->capture_default_str();
    evaluate->add_option("--threads", ev.threads, "worker threads")->capture_default_str();
    evaluate->add_flag("--per-fold-scaling", ev.per_fold_scaling,
                       "refit min-max scaling inside each training fold instead of once "
                       "globally (leakage-aware mode)");
    evaluate->add_option("--mask", ev.mask, "0/1 feature mask applied before evaluation");
    evaluate->add_flag("--with-selection", ev.with_selection,
                       "run swarm feature selection per model first (FS_ rows)");
    evaluate->add_option("--swarm", ev.swarm_size, "selection swarm size")
        ->capture_default_str();
    evaluate->add_option("--max-iterations,--iterations", ev.iterations,
                         "selection iterations")
        ->capture_default_str();
    evaluate->add_option("--fitness-folds", ev.fitness_folds, "selection fitness folds")
        ->capture_default_str();
    auto add_overrides = [](CLI::App* cmd, ModelOverrides& o) {
        cmd->add_option("--knn-k", o.knn_k, "neighbours for knn")->capture_default_str();
        cmd->add_option("--svm-gamma", o.svm_gamma, "rbf width for svm")->capture_default_str();
        cmd->add_option("--svm-c", o.svm_c, "box constraint for svm")->capture_default_str();
        cmd->add_option("--c45-confidence", o.c45_confidence, "pruning confidence for c45")
            ->capture_default_str();
        cmd->add_option("--mlp-maxit", o.mlp_max_iterations, "training iterations for ann")
            ->capture_default_str();
        cmd->add_option("--mlp-hidden", o.mlp_hidden, "hidden units for ann")
            ->capture_default_str();
        cmd->add_option("--bagging-learners", o.bagging_learners, "trees for bagging")
            ->capture_default_str();
        cmd->add_option("--adaboost-learners", o.adaboost_learners, "stages for adaboost")
            ->capture_default_str();
        cmd->add_option("--rf-trees", o.rf_trees, "trees for rf")->capture_default_str();
        cmd->add_option("--gbm-trees", o.gbm_trees, "stages for gbm")->capture_default_str();
    };
    add_overrides(evaluate, ev.overrides);

    TuneOptions tu;
    CLI::App* tune = app.add_subcommand("tune", "grid-search svm or knn hyperparameters");
    tune->add_option("--data", tu.data, "dataset CSV")->required();
    tune->add_option("--model", tu.model, "svm or knn")->capture_default_str();
    tune->add_option("--k", tu.k, "folds")->capture_default_str();
    tune->add_option("--repeats", tu.repeats, "cross-validation repeats")->capture_default_str();
    tune->add_option("--seed", tu.seed, "Rng seed")->capture_default_str();
    tune->add_option("--out-dir", tu.out_dir, "directory for tune.csv")->capture_default_str();
    tune->add_option("--threads", tu.threads, "worker threads")->capture_default_str();

    SelectOptions se;
    CLI::App* select = app.add_subcommand("select", "binary particle swarm feature selection");
    select->add_option("--data", se.data, "dataset CSV")->required();
    select->add_option("--model", se.model, "wrapped model family")->capture_default_str();
    select->add_option("--dataset-name", se.dataset_name,
                       "label used in reports (default: data file stem)");
    select->add_option("--swarm", se.swarm_size, "swarm size")->capture_default_str();
    select->add_option("--max-iterations,--iterations", se.iterations, "iterations")
        ->capture_default_str();
    select->add_option("--c1", se.c1, "cognitive weight")->capture_default_str();
    select->add_option("--c2", se.c2, "social weight")->capture_default_str();
    select->add_option("--inertia", se.inertia, "inertia weight")->capture_default_str();
    select->add_option("--vmax", se.v_max, "velocity clamp")->capture_default_str();
    select->add_option("--fitness-folds", se.fitness_folds, "folds for the fitness CV")
        ->capture_default_str();
    select->add_option("--stall-window", se.stall_window,
                       "stop early after this many iterations without improvement");
    select->add_option("--k", se.k, "folds for the post-selection report")
        ->capture_default_str();
    select->add_option("--repeats", se.repeats, "repeats for the post-selection report")
        ->capture_default_str();
    select->add_option("--seed", se.seed, "Rng seed")->capture_default_str();
    select->add_option("--out-dir", se.out_dir, "directory for mask.txt and history.csv")
        ->capture_default_str();
    select->add_option("--threads", se.threads, "worker threads")->capture_default_str();
    add_overrides(select, se.overrides);

    CompareOptions co;
    CLI::App* compare =
        app.add_subcommand("compare", "rank models and test paired fold differences");
    compare->add_option("--folds", co.folds_files, "folds.csv files from evaluate runs")
        ->required();
    compare->add_option("--metric", co.metric, "metric for the signed-rank tests")
        ->capture_default_str();
    compare->add_option("--blocks", co.blocks,
                        "rank blocking: metric (dataset x metric means), repeat, or fold")
        ->capture_default_str();
    compare->add_option("--alpha", co.alpha, "significance level")->capture_default_str();
    compare->add_option("--out-dir", co.out_dir, "directory for ranks.csv and pvalues.csv")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (generate->parsed()) {
            run_generate(gen);
        } else {
            std::string out_dir = evaluate->parsed() ? ev.out_dir
                                  : tune->parsed()   ? tu.out_dir
                                  : select->parsed() ? se.out_dir
                                                     : co.out_dir;
            ensure_out_dir(out_dir);
            write_effective_config(app, out_dir);
            if (evaluate->parsed() && !run_evaluate(ev)) return kExitComputation;
            if (tune->parsed()) run_tune(tu);
            if (select->parsed()) run_select(se);
            if (compare->parsed()) run_compare(co);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidMaskError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const PairingError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitComputation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitComputation;
    }
    return 0;
}
