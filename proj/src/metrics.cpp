#include "linkcast/metrics.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "json.hpp"

using nlohmann::json;

namespace linkcast {

Confusion confusion_matrix(const std::vector<int>& truth,
                           const std::vector<int>& predicted) {
    if (truth.size() != predicted.size())
        throw LengthMismatch("confusion_matrix: length mismatch");
    Confusion m(kScoreClasses, std::vector<long long>(kScoreClasses, 0));
    for (size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 1 || truth[i] > kScoreClasses || predicted[i] < 1 ||
            predicted[i] > kScoreClasses)
            throw OutOfRange("confusion_matrix: score out of [1,10]");
        ++m[static_cast<size_t>(truth[i] - 1)]
          [static_cast<size_t>(predicted[i] - 1)];
    }
    return m;
}

Prf weighted_prf(const Confusion& confusion) {
    if (confusion.size() != kScoreClasses)
        throw EmptyMatrix("weighted_prf: matrix must be 10x10");
    long long total = 0, trace = 0;
    std::vector<long long> row_sum(kScoreClasses, 0), col_sum(kScoreClasses, 0);
    for (int i = 0; i < kScoreClasses; ++i) {
        for (int j = 0; j < kScoreClasses; ++j) {
            const long long v = confusion[i][j];
            total += v;
            row_sum[i] += v;
            col_sum[j] += v;
        }
        trace += confusion[i][i];
    }
    if (total == 0) throw EmptyMatrix("weighted_prf: empty confusion matrix");

    double precision = 0.0, f1 = 0.0;
    for (int c = 0; c < kScoreClasses; ++c) {
        const double support = static_cast<double>(row_sum[c]);
        if (support == 0.0) continue;
        const double p =
            col_sum[c] > 0
                ? static_cast<double>(confusion[c][c]) /
                      static_cast<double>(col_sum[c])
                : 0.0;
        const double r = static_cast<double>(confusion[c][c]) / support;
        const double f = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
        precision += support * p;
        f1 += support * f;
    }
    Prf out;
    out.precision_pct = 100.0 * precision / static_cast<double>(total);
    // support * (diag/support) telescopes to diag, so the weighted recall is
    // exactly trace/total
    out.recall_pct =
        100.0 * static_cast<double>(trace) / static_cast<double>(total);
    out.f1_pct = 100.0 * f1 / static_cast<double>(total);
    return out;
}

double accuracy_pct(const Confusion& confusion) {
    long long total = 0, trace = 0;
    for (size_t i = 0; i < confusion.size(); ++i) {
        for (size_t j = 0; j < confusion[i].size(); ++j) total += confusion[i][j];
        trace += confusion[i][i];
    }
    if (total == 0) throw EmptyMatrix("accuracy_pct: empty confusion matrix");
    return 100.0 * static_cast<double>(trace) / static_cast<double>(total);
}

double rmse_scores(const std::vector<int>& truth,
                   const std::vector<int>& predicted) {
    if (truth.size() != predicted.size())
        throw LengthMismatch("rmse_scores: length mismatch");
    if (truth.empty()) return 0.0;
    double sum = 0.0;
    for (size_t i = 0; i < truth.size(); ++i) {
        const double d = static_cast<double>(predicted[i] - truth[i]);
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(truth.size()));
}

double within_k_rate(const std::vector<int>& truth,
                     const std::vector<int>& predicted, int k) {
    if (truth.size() != predicted.size())
        throw LengthMismatch("within_k_rate: length mismatch");
    if (truth.empty()) return 0.0;
    long long hits = 0;
    for (size_t i = 0; i < truth.size(); ++i)
        if (std::abs(predicted[i] - truth[i]) <= k) ++hits;
    return 100.0 * static_cast<double>(hits) /
           static_cast<double>(truth.size());
}

bool pearson(const std::vector<int>& a, const std::vector<int>& b, double& r) {
    if (a.size() != b.size()) throw LengthMismatch("pearson: length mismatch");
    const size_t n = a.size();
    if (n < 2) return false;
    double mean_a = 0.0, mean_b = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mean_a += a[i];
        mean_b += b[i];
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double da = static_cast<double>(a[i]) - mean_a;
        const double db = static_cast<double>(b[i]) - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0) return false;
    r = cov / std::sqrt(var_a * var_b);
    return true;
}

CorrelationSummary per_flight_correlation(
    const std::vector<std::vector<int>>& truth,
    const std::vector<std::vector<int>>& predicted) {
    if (truth.size() != predicted.size())
        throw LengthMismatch("per_flight_correlation: flight count mismatch");
    CorrelationSummary out;
    for (size_t i = 0; i < truth.size(); ++i) {
        double r = 0.0;
        if (pearson(truth[i], predicted[i], r))
            out.r_values.push_back(r);
        else
            ++out.excluded_flat_sequences;
    }
    return out;
}

CorrelationHistogram histogram_correlations(const std::vector<double>& rs) {
    CorrelationHistogram hist;
    constexpr int kBins = 20;
    hist.counts.assign(kBins, 0);
    for (int i = 0; i <= kBins; ++i)
        hist.edges.push_back(-1.0 + 2.0 * i / kBins);
    for (double r : rs) {
        int bin = static_cast<int>(std::floor((r + 1.0) / 2.0 * kBins));
        bin = std::clamp(bin, 0, kBins - 1);  // r == 1.0 joins the last bin
        ++hist.counts[static_cast<size_t>(bin)];
    }
    return hist;
}

EvalReport evaluate_model(const std::string& model_name,
                          const FlightScores& truth,
                          const std::function<FlightScores()>& predictor,
                          int within_k) {
    const auto t0 = std::chrono::steady_clock::now();
    const FlightScores predicted = predictor();
    const auto t1 = std::chrono::steady_clock::now();

    if (predicted.size() != truth.size())
        throw LengthMismatch("evaluate_model: flight count mismatch");

    std::vector<int> flat_truth, flat_pred;
    for (size_t i = 0; i < truth.size(); ++i) {
        if (truth[i].size() != predicted[i].size())
            throw LengthMismatch("evaluate_model: flight " + std::to_string(i) +
                                 " length mismatch");
        flat_truth.insert(flat_truth.end(), truth[i].begin(), truth[i].end());
        flat_pred.insert(flat_pred.end(), predicted[i].begin(),
                         predicted[i].end());
    }

    EvalReport report;
    report.model = model_name;
    report.confusion = confusion_matrix(flat_truth, flat_pred);
    const Prf prf = weighted_prf(report.confusion);
    report.precision_pct = prf.precision_pct;
    report.recall_pct = prf.recall_pct;
    report.f1_pct = prf.f1_pct;
    report.accuracy_pct = accuracy_pct(report.confusion);
    report.rmse = rmse_scores(flat_truth, flat_pred);
    report.within_k = within_k;
    report.within_k_pct = within_k_rate(flat_truth, flat_pred, within_k);
    const CorrelationSummary corr = per_flight_correlation(truth, predicted);
    report.correlation_histogram = histogram_correlations(corr.r_values);
    report.excluded_flat_sequences = corr.excluded_flat_sequences;
    report.timing_seconds =
        std::chrono::duration<double>(t1 - t0).count();
    report.timesteps = static_cast<long long>(flat_truth.size());
    report.flights = static_cast<long long>(truth.size());
    return report;
}

void save_report(const EvalReport& report, const std::string& path) {
    json root;
    root["model"] = report.model;
    root["confusion"] = report.confusion;
    root["precision_pct"] = report.precision_pct;
    root["recall_pct"] = report.recall_pct;
    root["f1_pct"] = report.f1_pct;
    root["accuracy_pct"] = report.accuracy_pct;
    root["rmse"] = report.rmse;
    root["within_k"] = report.within_k;
    root["within_k_pct"] = report.within_k_pct;
    root["correlation_histogram"] = {
        {"edges", report.correlation_histogram.edges},
        {"counts", report.correlation_histogram.counts}};
    root["excluded_flat_sequences"] = report.excluded_flat_sequences;
    root["timing_seconds"] = report.timing_seconds;
    root["timesteps"] = report.timesteps;
    root["flights"] = report.flights;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << root.dump(2) << '\n';
}

EvalReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open report: " + path);
    json root;
    in >> root;
    EvalReport report;
    report.model = root.at("model").get<std::string>();
    for (const auto& row : root.at("confusion")) {
        std::vector<long long> r;
        for (const auto& v : row) r.push_back(v.get<long long>());
        report.confusion.push_back(std::move(r));
    }
    report.precision_pct = root.at("precision_pct").get<double>();
    report.recall_pct = root.at("recall_pct").get<double>();
    report.f1_pct = root.at("f1_pct").get<double>();
    report.accuracy_pct = root.at("accuracy_pct").get<double>();
    report.rmse = root.at("rmse").get<double>();
    report.within_k = root.at("within_k").get<int>();
    report.within_k_pct = root.at("within_k_pct").get<double>();
    for (const auto& v : root.at("correlation_histogram").at("edges"))
        report.correlation_histogram.edges.push_back(v.get<double>());
    for (const auto& v : root.at("correlation_histogram").at("counts"))
        report.correlation_histogram.counts.push_back(v.get<long long>());
    report.excluded_flat_sequences =
        root.at("excluded_flat_sequences").get<int>();
    report.timing_seconds = root.at("timing_seconds").get<double>();
    report.timesteps = root.at("timesteps").get<long long>();
    report.flights = root.at("flights").get<long long>();
    return report;
}

void export_confusion_csv(const Confusion& confusion, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << "true\\pred";
    for (int j = 1; j <= kScoreClasses; ++j) out << ',' << j;
    out << '\n';
    for (int i = 0; i < kScoreClasses; ++i) {
        out << (i + 1);
        for (int j = 0; j < kScoreClasses; ++j)
            out << ',' << confusion[static_cast<size_t>(i)][static_cast<size_t>(j)];
        out << '\n';
    }
}

void export_correlation_csv(const CorrelationHistogram& hist,
                            const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << "bin_lo,bin_hi,count\n";
    for (size_t i = 0; i < hist.counts.size(); ++i)
        out << hist.edges[i] << ',' << hist.edges[i + 1] << ','
            << hist.counts[i] << '\n';
}

namespace {

int diff_band(int diff) {
    const int d = std::abs(diff);
    if (d <= 1) return 0;
    if (d <= 3) return 1;
    if (d <= 7) return 2;
    return 3;
}

}  // namespace

void export_error_trace_csv(
    const std::vector<std::vector<TelemetryRecord>>& flights,
    const FlightScores& truth, const FlightScores& predicted,
    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    out << "flight_id,timestep,lon,lat,true_score,predicted_score,band\n";
    for (size_t i = 0; i < flights.size(); ++i) {
        for (size_t t = 0; t < truth[i].size(); ++t) {
            const auto& r = flights[i][t];
            out << r.flight_id << ',' << t << ',' << r.position.lon << ','
                << r.position.lat << ',' << truth[i][t] << ','
                << predicted[i][t] << ','
                << diff_band(predicted[i][t] - truth[i][t]) << '\n';
        }
    }
}

}  // namespace linkcast
