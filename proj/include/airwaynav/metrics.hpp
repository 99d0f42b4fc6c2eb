#pragma once
// Sequence classification metrics: top-k accuracy, micro-averaged
// precision/recall/F1, micro one-vs-rest AUC over the flattened frame-class
// indicators, and hop distance between predicted and true airway labels.
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "airwaynav/errors.hpp"
#include "airwaynav/matrix.hpp"
#include "airwaynav/tree.hpp"

namespace airwaynav {

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct DistanceStats {
    double mean = 0.0;
    double stddev = 0.0;  // population
};

struct MetricBundle {
    double acc1 = 0.0;
    double acc3 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
    DistanceStats dist;
};

struct EvalReport {
    std::vector<std::pair<std::string, MetricBundle>> per_sequence;
    MetricBundle average;  // arithmetic mean of the per-sequence bundles
};

namespace detail {

inline void check_labels(const std::vector<int>& labels, std::size_t classes) {
    for (int y : labels)
        if (y < 0 || static_cast<std::size_t>(y) >= classes)
            throw ValidationError("metrics: label index out of range");
}

} // namespace detail

// Fraction of frames whose true label is among the k best-scored classes;
// scores tie toward the lower index, matching the decoder.
inline double top_k_accuracy(const Matrix& scores, const std::vector<int>& truth, int k) {
    if (scores.rows() == 0) throw ValidationError("metrics: empty score matrix");
    if (truth.size() != scores.rows()) throw ValidationError("metrics: length mismatch");
    if (k < 1 || static_cast<std::size_t>(k) > scores.cols())
        throw ValidationError("metrics: k out of range");
    detail::check_labels(truth, scores.cols());
    std::size_t hits = 0;
    for (std::size_t n = 0; n < scores.rows(); ++n) {
        const auto row = scores.row(n);
        const std::size_t y = static_cast<std::size_t>(truth[n]);
        int better = 0;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c == y) continue;
            if (row[c] > row[y] || (row[c] == row[y] && c < y)) ++better;
        }
        hits += (better < k);
    }
    return static_cast<double>(hits) / static_cast<double>(scores.rows());
}

// Micro averaging pools per-class true/false positives and negatives over
// all classes. For single-label multiclass this collapses to accuracy; the
// tests assert that rather than assume it.
inline Prf micro_prf(const std::vector<int>& pred, const std::vector<int>& truth,
                     std::size_t classes) {
    if (pred.empty() || pred.size() != truth.size())
        throw ValidationError("metrics: prediction/truth length mismatch");
    detail::check_labels(pred, classes);
    detail::check_labels(truth, classes);
    std::vector<std::size_t> tp(classes, 0), fp(classes, 0), fn(classes, 0);
    for (std::size_t n = 0; n < pred.size(); ++n) {
        if (pred[n] == truth[n]) {
            ++tp[static_cast<std::size_t>(pred[n])];
        } else {
            ++fp[static_cast<std::size_t>(pred[n])];
            ++fn[static_cast<std::size_t>(truth[n])];
        }
    }
    double sum_tp = 0.0, sum_fp = 0.0, sum_fn = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
        sum_tp += static_cast<double>(tp[c]);
        sum_fp += static_cast<double>(fp[c]);
        sum_fn += static_cast<double>(fn[c]);
    }
    Prf out;
    out.precision = (sum_tp + sum_fp > 0.0) ? sum_tp / (sum_tp + sum_fp) : 0.0;
    out.recall = (sum_tp + sum_fn > 0.0) ? sum_tp / (sum_tp + sum_fn) : 0.0;
    out.f1 = (out.precision + out.recall > 0.0)
                 ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                 : 0.0;
    return out;
}

// Rank-statistic AUC of the flattened N*C binary problem (is-true-class
// indicator against score), with average ranks on ties.
inline double micro_auc(const Matrix& scores, const std::vector<int>& truth) {
    if (scores.rows() == 0) throw ValidationError("metrics: empty score matrix");
    if (truth.size() != scores.rows()) throw ValidationError("metrics: length mismatch");
    detail::check_labels(truth, scores.cols());
    const std::size_t total = scores.rows() * scores.cols();
    std::vector<std::size_t> order(total);
    for (std::size_t i = 0; i < total; ++i) order[i] = i;
    const auto& flat = scores.storage();
    std::sort(order.begin(), order.end(),
              [&flat](std::size_t a, std::size_t b) { return flat[a] < flat[b]; });

    const std::size_t n_pos = scores.rows();
    const std::size_t n_neg = total - n_pos;
    if (n_neg == 0) throw ValidationError("metrics: auc undefined without negatives");

    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < total) {
        std::size_t j = i;
        while (j < total && flat[order[j]] == flat[order[i]]) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k) {
            const std::size_t idx = order[k];
            const std::size_t row = idx / scores.cols();
            const std::size_t col = idx % scores.cols();
            if (static_cast<int>(col) == truth[row]) pos_rank_sum += avg_rank;
        }
        i = j;
    }
    const double n_pos_d = static_cast<double>(n_pos);
    const double u = pos_rank_sum - n_pos_d * (n_pos_d + 1.0) / 2.0;
    return u / (n_pos_d * static_cast<double>(n_neg));
}

inline DistanceStats tree_distance_stats(const std::vector<int>& pred,
                                         const std::vector<int>& truth,
                                         const DistanceMatrix& d) {
    if (pred.empty() || pred.size() != truth.size())
        throw ValidationError("metrics: prediction/truth length mismatch");
    detail::check_labels(pred, static_cast<std::size_t>(d.n));
    detail::check_labels(truth, static_cast<std::size_t>(d.n));
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t n = 0; n < pred.size(); ++n) {
        const double hops = static_cast<double>(d.at(pred[n], truth[n]));
        sum += hops;
        sum_sq += hops * hops;
    }
    const double count = static_cast<double>(pred.size());
    DistanceStats stats;
    stats.mean = sum / count;
    const double var = sum_sq / count - stats.mean * stats.mean;
    stats.stddev = var > 0.0 ? std::sqrt(var) : 0.0;
    return stats;
}

inline MetricBundle compute_metrics(const Matrix& scores, const std::vector<int>& pred,
                                    const std::vector<int>& truth, const DistanceMatrix& d) {
    MetricBundle m;
    m.acc1 = top_k_accuracy(scores, truth, 1);
    m.acc3 = top_k_accuracy(scores, truth, std::min<int>(3, static_cast<int>(scores.cols())));
    const auto prf = micro_prf(pred, truth, scores.cols());
    m.precision = prf.precision;
    m.recall = prf.recall;
    m.f1 = prf.f1;
    m.auc = micro_auc(scores, truth);
    m.dist = tree_distance_stats(pred, truth, d);
    return m;
}

inline EvalReport evaluate_sequences(const std::vector<std::string>& ids,
                                     const std::vector<Matrix>& scores,
                                     const std::vector<std::vector<int>>& preds,
                                     const std::vector<std::vector<int>>& truths,
                                     const DistanceMatrix& d) {
    if (ids.empty() || ids.size() != scores.size() || ids.size() != preds.size() ||
        ids.size() != truths.size())
        throw ValidationError("metrics: sequence list mismatch");
    EvalReport report;
    for (std::size_t s = 0; s < ids.size(); ++s)
        report.per_sequence.emplace_back(ids[s],
                                         compute_metrics(scores[s], preds[s], truths[s], d));
    auto& avg = report.average;
    for (const auto& [id, m] : report.per_sequence) {
        avg.acc1 += m.acc1;
        avg.acc3 += m.acc3;
        avg.precision += m.precision;
        avg.recall += m.recall;
        avg.f1 += m.f1;
        avg.auc += m.auc;
        avg.dist.mean += m.dist.mean;
        avg.dist.stddev += m.dist.stddev;
    }
    const double count = static_cast<double>(report.per_sequence.size());
    avg.acc1 /= count;
    avg.acc3 /= count;
    avg.precision /= count;
    avg.recall /= count;
    avg.f1 /= count;
    avg.auc /= count;
    avg.dist.mean /= count;
    avg.dist.stddev /= count;
    return report;
}

} // namespace airwaynav
