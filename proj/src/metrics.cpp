#include "ratas/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ratas/errors.hpp"
#include "ratas/text.hpp"

namespace ratas {

std::size_t EvalRecord::words() const {
    if (word_count) return *word_count;
    return text::count_words(answer_text);
}

EvalMetrics compute_metrics(const std::vector<double>& predicted,
                            const std::vector<double>& gold) {
    if (predicted.empty()) throw std::invalid_argument("compute_metrics: empty input");
    if (predicted.size() != gold.size()) {
        throw std::invalid_argument("compute_metrics: length mismatch (" +
                                    std::to_string(predicted.size()) + " vs " +
                                    std::to_string(gold.size()) + ")");
    }
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] < 0.0 || predicted[i] > 1.0 || gold[i] < 0.0 || gold[i] > 1.0) {
            throw std::invalid_argument("compute_metrics: value outside [0, 1] at index " +
                                        std::to_string(i));
        }
    }

    const std::size_t n = predicted.size();
    const double dn = static_cast<double>(n);

    double abs_sum = 0.0, sq_sum = 0.0;
    double p_mean = 0.0, g_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = predicted[i] - gold[i];
        abs_sum += std::abs(d);
        sq_sum += d * d;
        p_mean += predicted[i];
        g_mean += gold[i];
    }
    p_mean /= dn;
    g_mean /= dn;

    double ss_tot = 0.0, p_var = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double gd = gold[i] - g_mean;
        const double pd = predicted[i] - p_mean;
        ss_tot += gd * gd;
        p_var += pd * pd;
        cov += pd * gd;
    }

    EvalMetrics m;
    m.n = n;
    m.mae = abs_sum / dn;
    m.rmse = std::sqrt(sq_sum / dn);
    if (ss_tot > 0.0) m.r2 = 1.0 - sq_sum / ss_tot;
    if (ss_tot > 0.0 && p_var > 0.0) {
        m.pearson_r = cov / std::sqrt(p_var * ss_tot);
    }
    return m;
}

ReliabilityResult compute_icc(const std::vector<std::vector<double>>& score_matrix) {
    const std::size_t n = score_matrix.size();
    if (n < 2) throw std::invalid_argument("compute_icc: need >= 2 subjects");
    const std::size_t k = score_matrix.front().size();
    if (k < 2) throw std::invalid_argument("compute_icc: need >= 2 runs");
    for (const auto& row : score_matrix) {
        if (row.size() != k) throw std::invalid_argument("compute_icc: incomplete grid");
    }
    const double dn = static_cast<double>(n);
    const double dk = static_cast<double>(k);

    double grand = 0.0;
    for (const auto& row : score_matrix) {
        for (double v : row) grand += v;
    }
    grand /= dn * dk;

    std::vector<double> row_mean(n, 0.0), col_mean(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            row_mean[i] += score_matrix[i][j];
            col_mean[j] += score_matrix[i][j];
        }
        row_mean[i] /= dk;
    }
    for (std::size_t j = 0; j < k; ++j) col_mean[j] /= dn;

    double ss_rows = 0.0, ss_cols = 0.0, ss_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss_rows += (row_mean[i] - grand) * (row_mean[i] - grand);
    ss_rows *= dk;
    for (std::size_t j = 0; j < k; ++j) ss_cols += (col_mean[j] - grand) * (col_mean[j] - grand);
    ss_cols *= dn;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const double d = score_matrix[i][j] - grand;
            ss_total += d * d;
        }
    }
    const double ss_error = ss_total - ss_rows - ss_cols;

    const double ms_rows = ss_rows / (dn - 1.0);
    const double ms_cols = ss_cols / (dk - 1.0);
    const double ms_error = std::max(0.0, ss_error) / ((dn - 1.0) * (dk - 1.0));

    ReliabilityResult result;
    result.runs = k;
    result.subjects = n;
    const double denom =
        ms_rows + (dk - 1.0) * ms_error + dk * (ms_cols - ms_error) / dn;
    if (ss_total <= 1e-15 || std::abs(denom) < 1e-15) {
        result.icc = 1.0;
        result.degenerate = true;
        return result;
    }
    result.icc = (ms_rows - ms_error) / denom;
    return result;
}

std::pair<std::vector<EvalRecord>, std::vector<EvalRecord>> split_by_length(
    const std::vector<EvalRecord>& records, std::size_t threshold_words) {
    std::pair<std::vector<EvalRecord>, std::vector<EvalRecord>> buckets;
    for (const auto& record : records) {
        if (record.words() <= threshold_words) {
            buckets.first.push_back(record);
        } else {
            buckets.second.push_back(record);
        }
    }
    return buckets;
}

namespace {

std::string stat_cell(const std::optional<double>& v) {
    return v ? text::format_fixed(*v, 4) : std::string("undef");
}

/// Display width in code points; the table contains only short UTF-8 labels.
std::size_t display_width(const std::string& s) {
    std::size_t width = 0;
    for (unsigned char c : s) {
        if ((c & 0xC0) != 0x80) ++width;
    }
    return width;
}

std::string pad(const std::string& s, std::size_t width) {
    std::string out = s;
    for (std::size_t i = display_width(s); i < width; ++i) out.push_back(' ');
    return out;
}

} // namespace

std::string render_metrics_table(const std::vector<MetricsRow>& rows) {
    const std::vector<std::string> header = {"Method", "Dataset", "MAE",
                                             "RMSE",   "R²",      "Pearson's r"};
    std::vector<std::vector<std::string>> cells;
    cells.push_back(header);
    for (const auto& row : rows) {
        if (row.metrics.n == 0) {
            cells.push_back({row.method, row.dataset, "n/a", "n/a", "n/a", "n/a"});
        } else {
            cells.push_back({row.method, row.dataset,
                             text::format_fixed(row.metrics.mae, 4),
                             text::format_fixed(row.metrics.rmse, 4),
                             stat_cell(row.metrics.r2), stat_cell(row.metrics.pearson_r)});
        }
    }
    std::vector<std::size_t> widths(header.size(), 0);
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            widths[c] = std::max(widths[c], display_width(line[c]));
        }
    }
    std::string out;
    for (const auto& line : cells) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            out += pad(line[c], widths[c]);
            if (c + 1 < line.size()) out += "  ";
        }
        out += "\n";
    }
    return out;
}

nlohmann::json metrics_to_json(const EvalMetrics& metrics) {
    nlohmann::json doc;
    doc["n"] = metrics.n;
    doc["mae"] = metrics.mae;
    doc["rmse"] = metrics.rmse;
    doc["r2"] = metrics.r2 ? nlohmann::json(*metrics.r2) : nlohmann::json(nullptr);
    doc["pearson_r"] =
        metrics.pearson_r ? nlohmann::json(*metrics.pearson_r) : nlohmann::json(nullptr);
    return doc;
}

} // namespace ratas
