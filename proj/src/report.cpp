#include "maldom/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace maldom {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string opt17(const std::optional<double>& v) { return v ? g17(*v) : std::string(); }

std::string f4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

std::string cell(const MetricAggregate& agg) {
    if (!agg.defined()) return "--";
    return f4(agg.mean) + " +/- " + f4(agg.std_dev);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string pad(const std::string& s, std::size_t width) {
    return s + std::string(width > s.size() ? width - s.size() : 0, ' ');
}

std::string render_columns(const std::vector<std::vector<std::string>>& rows) {
    if (rows.empty()) return "";
    std::vector<std::size_t> widths(rows.front().size(), 0);
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c)
            widths[c] = std::max(widths[c], row[c].size());
    std::string out;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            out += c + 1 == row.size() ? row[c] : pad(row[c], widths[c] + 2);
        }
        out += '\n';
    }
    return out;
}

}  // namespace

void write_report_csv(const std::string& path, const std::vector<EvaluationRow>& rows) {
    std::ofstream out = open_out(path);
    out << "model,dataset,metric,mean,std,defined_folds,total_folds\n";
    for (const EvaluationRow& row : rows) {
        auto line = [&](const char* metric, const MetricAggregate& agg) {
            out << row.model << ',' << row.dataset << ',' << metric << ',';
            if (agg.defined()) out << g17(agg.mean) << ',' << g17(agg.std_dev);
            else out << ',';
            out << ',' << agg.defined_folds << ',' << agg.total_folds << '\n';
        };
        line("accuracy", row.cv.accuracy);
        line("precision", row.cv.precision);
        line("recall", row.cv.recall);
        line("f_measure", row.cv.f_measure);
    }
}

void write_folds_csv(const std::string& path, const std::vector<EvaluationRow>& rows,
                     std::uint64_t seed, int k, int repeats) {
    std::ofstream out = open_out(path);
    out << "model,dataset,seed,k,repeats,repeat,fold,accuracy,precision,recall,f_measure\n";
    for (const EvaluationRow& row : rows)
        for (const FoldMetrics& fm : row.cv.folds) {
            out << row.model << ',' << row.dataset << ',' << seed << ',' << k << ',' << repeats
                << ',' << fm.repeat << ',' << fm.fold << ',' << g17(fm.report.accuracy) << ','
                << opt17(fm.report.precision) << ',' << opt17(fm.report.recall) << ','
                << opt17(fm.report.f_measure) << '\n';
        }
}

std::vector<FoldRow> read_folds_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path + " is empty");
    const std::string expected =
        "model,dataset,seed,k,repeats,repeat,fold,accuracy,precision,recall,f_measure";
    {
        std::string header = line;
        if (!header.empty() && header.back() == '\r') header.pop_back();
        if (header != expected)
            throw SchemaError(path + " does not look like a fold report (bad header)");
    }
    std::vector<FoldRow> rows;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != 11)
            throw ParseError(path + ": line " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " cells, expected 11");
        auto num = [&](const std::string& s, const char* what) {
            try {
                std::size_t used = 0;
                double v = std::stod(s, &used);
                if (used != s.size()) throw std::invalid_argument(s);
                return v;
            } catch (const std::exception&) {
                throw ParseError(path + ": line " + std::to_string(line_no) + ": bad " + what +
                                 " '" + s + "'");
            }
        };
        FoldRow row;
        row.model = cells[0];
        row.dataset = cells[1];
        row.seed = static_cast<std::uint64_t>(num(cells[2], "seed"));
        row.k = static_cast<int>(num(cells[3], "k"));
        row.repeats = static_cast<int>(num(cells[4], "repeats"));
        row.repeat = static_cast<int>(num(cells[5], "repeat"));
        row.fold = static_cast<int>(num(cells[6], "fold"));
        row.report.accuracy = num(cells[7], "accuracy");
        if (!cells[8].empty()) row.report.precision = num(cells[8], "precision");
        if (!cells[9].empty()) row.report.recall = num(cells[9], "recall");
        if (!cells[10].empty()) row.report.f_measure = num(cells[10], "f_measure");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw SchemaError(path + " holds no fold rows");
    return rows;
}

void write_history_csv(const std::string& path, const std::vector<double>& history) {
    std::ofstream out = open_out(path);
    out << "iteration,gbest_fitness\n";
    for (std::size_t i = 0; i < history.size(); ++i)
        out << i + 1 << ',' << g17(history[i]) << '\n';
}

void write_pvalues_csv(const std::string& path, const std::vector<PairwiseComparison>& table) {
    std::ofstream out = open_out(path);
    out << "model_a,model_b,w_statistic,n_effective,method,p_value,significant\n";
    for (const PairwiseComparison& cmp : table) {
        out << cmp.model_a << ',' << cmp.model_b << ',' << g17(cmp.test.statistic) << ','
            << cmp.test.n_effective << ','
            << (cmp.test.method == WilcoxonMethod::Exact ? "exact" : "normal") << ','
            << g17(cmp.test.p_value) << ',' << (cmp.significant ? "true" : "false") << '\n';
    }
}

void write_ranks_csv(const std::string& path, const std::vector<std::string>& names,
                     const FriedmanResult& fr) {
    std::ofstream out = open_out(path);
    out << "model,mean_rank\n";
    for (std::size_t i = 0; i < names.size(); ++i)
        out << names[i] << ',' << g17(fr.mean_ranks[static_cast<Eigen::Index>(i)]) << '\n';
}

std::string format_report_table(const std::vector<EvaluationRow>& rows) {
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"model", "dataset", "accuracy", "precision", "recall", "f-measure"});
    for (const EvaluationRow& row : rows)
        cells.push_back({row.model, row.dataset, cell(row.cv.accuracy), cell(row.cv.precision),
                         cell(row.cv.recall), cell(row.cv.f_measure)});
    return render_columns(cells);
}

std::string format_rank_table(const std::vector<std::string>& names, const FriedmanResult& fr) {
    std::vector<std::size_t> order(names.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        double ra = fr.mean_ranks[static_cast<Eigen::Index>(a)];
        double rb = fr.mean_ranks[static_cast<Eigen::Index>(b)];
        return ra < rb || (ra == rb && a < b);
    });
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"model", "mean rank"});
    for (std::size_t i : order)
        cells.push_back({names[i], f4(fr.mean_ranks[static_cast<Eigen::Index>(i)])});
    std::ostringstream tail;
    tail << "blocks: " << fr.n_blocks << "  chi-square: " << f4(fr.chi_square) << '\n';
    return render_columns(cells) + tail.str();
}

std::string format_pvalue_table(const std::vector<PairwiseComparison>& table) {
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"pair", "W", "n", "method", "p-value", ""});
    for (const PairwiseComparison& cmp : table) {
        std::string method = cmp.test.method == WilcoxonMethod::Exact ? "exact" : "normal";
        if (cmp.test.degenerate) method = "degenerate";
        cells.push_back({cmp.model_a + " vs " + cmp.model_b, f4(cmp.test.statistic),
                         std::to_string(cmp.test.n_effective), method, f4(cmp.test.p_value),
                         cmp.significant ? "*" : ""});
    }
    return render_columns(cells);
}

std::string format_tune_table(const TuneResult& tuned) {
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"candidate", "mean f-measure", ""});
    for (std::size_t i = 0; i < tuned.table.size(); ++i) {
        const TuneEntry& entry = tuned.table[i];
        cells.push_back({entry.description,
                         entry.f_measure.defined() ? f4(entry.f_measure.mean) : "--",
                         i == tuned.best ? "<- best" : ""});
    }
    return render_columns(cells);
}

std::string format_mask(const FeatureMask& mask, const std::vector<std::string>& schema) {
    if (mask.size() != schema.size())
        throw ShapeError("mask width does not match the schema");
    std::string out = mask.to_string() + " (" + std::to_string(mask.count()) + " of " +
                      std::to_string(mask.size()) + ")\n";
    for (std::size_t i = 0; i < schema.size(); ++i)
        if (mask.test(i)) out += "  " + schema[i] + "\n";
    return out;
}

}  // namespace maldom
