#pragma once
// Min-sum decoding of a label sequence over an airway tree.
//
// The energy of a path w_1..N is
//     E(w) = sum_n D_n(w_n) + lambda * sum_{n>=2} R(w_n, w_{n-1})
// with the data term D_n(w) = (1 - p(m_n|w)) / (|classes|-1) and the pairwise
// penalty R from the tree. Message passing:
//     m_n(w) = D_n(w) + min_v [ m_{n-1}(v) + lambda * R(w, v) ],  m_1 = D_1
// gives the global minimum in O(N * C^2); running it from both ends yields
// per-frame through-node costs  c_n(w) = m_f + m_b - D_n  whose row-softmax of
// the negation serves as an approximate posterior. Exact sum-product
// posteriors are provided alongside to measure that approximation.
//
// All mins break ties toward the lowest class index.
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "airwaynav/errors.hpp"
#include "airwaynav/matrix.hpp"
#include "airwaynav/tree.hpp"

namespace airwaynav {

// N x C matrix of per-frame class likelihoods; rows are probability vectors.
struct LikelihoodSequence {
    Matrix p;

    static LikelihoodSequence from_matrix(Matrix m) {
        if (m.rows() < 2) throw ValidationError("likelihoods: need at least 2 frames");
        if (m.cols() < 2) throw ValidationError("likelihoods: need at least 2 classes");
        for (std::size_t r = 0; r < m.rows(); ++r) {
            double sum = 0.0;
            for (double v : m.row(r)) {
                if (!(v >= 0.0 && v <= 1.0))
                    throw ValidationError("likelihoods: entry outside [0,1] in row " +
                                          std::to_string(r));
                sum += v;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw ValidationError("likelihoods: row " + std::to_string(r) +
                                      " sums to " + std::to_string(sum));
        }
        return LikelihoodSequence{std::move(m)};
    }

    std::size_t frames() const { return p.rows(); }
    std::size_t classes() const { return p.cols(); }
};

enum class BoundaryPolicy { BothEnds, StartOnly, None };

struct CostModel {
    Matrix data;               // N x C, entries in [0, 1]
    RegularizationMatrix reg;  // C x C
    double lambda = 0.0;       // weight of the pairwise term
    BoundaryPolicy boundary = BoundaryPolicy::None;  // already applied to data
};

struct DecodeResult {
    std::vector<int> path;  // length N
    double total_cost = 0.0;
    Matrix forward;    // message table m_f
    Matrix backward;   // message table m_b (empty unless marginals ran)
    Matrix marginals;  // per-frame probability rows (empty unless marginals ran)
};

// -----------------------------
// cost model construction
// -----------------------------

inline Matrix data_term(const LikelihoodSequence& seq) {
    const double denom = static_cast<double>(seq.classes()) - 1.0;
    Matrix d(seq.frames(), seq.classes());
    for (std::size_t r = 0; r < seq.frames(); ++r)
        for (std::size_t c = 0; c < seq.classes(); ++c)
            d(r, c) = (1.0 - seq.p(r, c)) / denom;
    return d;
}

// Replaces the terminal rows with the data term of a one-hot likelihood at
// the root: cost 0 there, 1/(C-1) everywhere else. Sequences start (and
// usually end) at the trachea.
inline Matrix apply_boundary(Matrix data, int root, BoundaryPolicy policy) {
    if (policy == BoundaryPolicy::None) return data;
    if (data.rows() < 2) throw ValidationError("boundary: need at least 2 frames");
    if (root < 0 || static_cast<std::size_t>(root) >= data.cols())
        throw ValidationError("boundary: root index out of range");
    const double off = 1.0 / (static_cast<double>(data.cols()) - 1.0);
    const auto set_row = [&](std::size_t r) {
        for (std::size_t c = 0; c < data.cols(); ++c)
            data(r, c) = (static_cast<int>(c) == root) ? 0.0 : off;
    };
    set_row(0);
    if (policy == BoundaryPolicy::BothEnds) set_row(data.rows() - 1);
    return data;
}

inline CostModel make_cost_model(const LikelihoodSequence& seq, const RegularizationMatrix& reg,
                                 double lambda, BoundaryPolicy policy, int root) {
    if (reg.values.rows() != seq.classes() || reg.values.cols() != seq.classes())
        throw ValidationError("cost model: regularization matrix does not match class count");
    if (!(lambda >= 0.0)) throw ValidationError("cost model: lambda must be >= 0");
    CostModel cost;
    cost.data = apply_boundary(data_term(seq), root, policy);
    cost.reg = reg;
    cost.lambda = lambda;
    cost.boundary = policy;
    return cost;
}

inline void validate_cost_model(const CostModel& cost) {
    if (cost.data.rows() < 2 || cost.data.cols() < 1)
        throw ValidationError("cost model: need at least 2 frames");
    if (cost.reg.values.rows() != cost.data.cols() || cost.reg.values.cols() != cost.data.cols())
        throw ValidationError("cost model: dimension mismatch between data and regularization");
    if (!(cost.lambda >= 0.0)) throw ValidationError("cost model: lambda must be >= 0");
    for (double v : cost.data.storage())
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("cost model: data entry outside [0,1]");
}

// Energy of an explicit path under the model.
inline double path_energy(const CostModel& cost, const std::vector<int>& path) {
    if (path.size() != cost.data.rows()) throw ValidationError("energy: path length mismatch");
    double e = 0.0;
    for (std::size_t n = 0; n < path.size(); ++n) {
        const int w = path[n];
        if (w < 0 || static_cast<std::size_t>(w) >= cost.data.cols())
            throw ValidationError("energy: path entry out of range");
        e += cost.data(n, w);
        if (n > 0) e += cost.lambda * cost.reg.values(w, path[n - 1]);
    }
    return e;
}

// -----------------------------
// message passing
// -----------------------------

namespace detail {

struct MessagePass {
    Matrix messages;             // N x C
    std::vector<int> argmin;     // N x C predecessor choices (row 0 unused)
};

// Forward recursion over `data` with transition cost lambda * trans(w, v)
// from v to w. Ties resolve to the lowest predecessor index.
inline MessagePass min_sum_pass(const Matrix& data, const Matrix& trans, double lambda) {
    const std::size_t n_frames = data.rows(), n_classes = data.cols();
    MessagePass pass;
    pass.messages = Matrix(n_frames, n_classes);
    pass.argmin.assign(n_frames * n_classes, -1);
    for (std::size_t c = 0; c < n_classes; ++c) pass.messages(0, c) = data(0, c);
    for (std::size_t n = 1; n < n_frames; ++n) {
        for (std::size_t w = 0; w < n_classes; ++w) {
            double best = std::numeric_limits<double>::infinity();
            int best_v = -1;
            for (std::size_t v = 0; v < n_classes; ++v) {
                const double cand = pass.messages(n - 1, v) + lambda * trans(w, v);
                if (cand < best) {
                    best = cand;
                    best_v = static_cast<int>(v);
                }
            }
            pass.messages(n, w) = data(n, w) + best;
            pass.argmin[n * n_classes + w] = best_v;
        }
    }
    return pass;
}

} // namespace detail

// MAP path by min-sum message passing plus backtracking.
inline DecodeResult viterbi_decode(const CostModel& cost) {
    validate_cost_model(cost);
    const std::size_t n_frames = cost.data.rows(), n_classes = cost.data.cols();
    auto pass = detail::min_sum_pass(cost.data, cost.reg.values, cost.lambda);

    DecodeResult result;
    result.forward = std::move(pass.messages);
    result.path.assign(n_frames, 0);

    std::size_t last = 0;
    for (std::size_t c = 1; c < n_classes; ++c)
        if (result.forward(n_frames - 1, c) < result.forward(n_frames - 1, last)) last = c;
    result.total_cost = result.forward(n_frames - 1, last);
    result.path[n_frames - 1] = static_cast<int>(last);
    for (std::size_t n = n_frames - 1; n > 0; --n)
        result.path[n - 1] = pass.argmin[n * n_classes + result.path[n]];
    return result;
}

// Combined through-node cost c_n(w) = m_f + m_b - D_n. Its per-frame minimum
// equals the Viterbi total cost.
inline Matrix combined_cost(const CostModel& cost, const DecodeResult& decoded) {
    Matrix c(cost.data.rows(), cost.data.cols());
    for (std::size_t n = 0; n < cost.data.rows(); ++n)
        for (std::size_t w = 0; w < cost.data.cols(); ++w)
            c(n, w) = decoded.forward(n, w) + decoded.backward(n, w) - cost.data(n, w);
    return c;
}

// Forward and backward min-sum passes plus the approximate per-frame
// posteriors: rows are softmax(-c_n) with a min shift before exponentiation.
inline DecodeResult marginals(const CostModel& cost) {
    DecodeResult result = viterbi_decode(cost);
    const std::size_t n_frames = cost.data.rows(), n_classes = cost.data.cols();

    const Matrix reversed_data = reverse_rows(cost.data);
    const Matrix trans_t = transpose(cost.reg.values);
    auto back = detail::min_sum_pass(reversed_data, trans_t, cost.lambda);
    result.backward = reverse_rows(back.messages);

    result.marginals = Matrix(n_frames, n_classes);
    for (std::size_t n = 0; n < n_frames; ++n) {
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t w = 0; w < n_classes; ++w) {
            const double c = result.forward(n, w) + result.backward(n, w) - cost.data(n, w);
            result.marginals(n, w) = c;
            if (c < lo) lo = c;
        }
        double sum = 0.0;
        for (std::size_t w = 0; w < n_classes; ++w) {
            const double e = std::exp(-(result.marginals(n, w) - lo));
            result.marginals(n, w) = e;
            sum += e;
        }
        for (std::size_t w = 0; w < n_classes; ++w) result.marginals(n, w) /= sum;
    }
    return result;
}

// -----------------------------
// sum-product oracle
// -----------------------------

namespace detail {

inline double log_sum_exp(const std::vector<double>& v) {
    double hi = -std::numeric_limits<double>::infinity();
    for (double x : v)
        if (x > hi) hi = x;
    if (!std::isfinite(hi)) return hi;
    double sum = 0.0;
    for (double x : v) sum += std::exp(x - hi);
    return hi + std::log(sum);
}

} // namespace detail

// Exact HMM posteriors for the probabilistic reading of the energy:
// emissions normalize exp(-D_n) per frame, transitions normalize
// exp(-lambda * R) per source class. Serves as the reference the min-sum
// marginals are measured against.
inline Matrix exact_posteriors(const CostModel& cost) {
    validate_cost_model(cost);
    const std::size_t n_frames = cost.data.rows(), n_classes = cost.data.cols();

    // log emission rows
    Matrix log_emit(n_frames, n_classes);
    for (std::size_t n = 0; n < n_frames; ++n) {
        double sum = 0.0;
        for (std::size_t w = 0; w < n_classes; ++w) sum += std::exp(-cost.data(n, w));
        const double log_z = std::log(sum);
        for (std::size_t w = 0; w < n_classes; ++w) log_emit(n, w) = -cost.data(n, w) - log_z;
    }
    // log transition rows, source class v -> target w
    Matrix log_trans(n_classes, n_classes);
    for (std::size_t v = 0; v < n_classes; ++v) {
        double sum = 0.0;
        for (std::size_t w = 0; w < n_classes; ++w)
            sum += std::exp(-cost.lambda * cost.reg.values(v, w));
        const double log_z = std::log(sum);
        for (std::size_t w = 0; w < n_classes; ++w)
            log_trans(v, w) = -cost.lambda * cost.reg.values(v, w) - log_z;
    }

    Matrix log_alpha(n_frames, n_classes), log_beta(n_frames, n_classes);
    std::vector<double> work(n_classes);
    for (std::size_t w = 0; w < n_classes; ++w) log_alpha(0, w) = log_emit(0, w);
    for (std::size_t n = 1; n < n_frames; ++n)
        for (std::size_t w = 0; w < n_classes; ++w) {
            for (std::size_t v = 0; v < n_classes; ++v)
                work[v] = log_alpha(n - 1, v) + log_trans(v, w);
            log_alpha(n, w) = log_emit(n, w) + detail::log_sum_exp(work);
        }
    for (std::size_t w = 0; w < n_classes; ++w) log_beta(n_frames - 1, w) = 0.0;
    for (std::size_t n = n_frames - 1; n > 0; --n)
        for (std::size_t v = 0; v < n_classes; ++v) {
            for (std::size_t w = 0; w < n_classes; ++w)
                work[w] = log_trans(v, w) + log_emit(n, w) + log_beta(n, w);
            log_beta(n - 1, v) = detail::log_sum_exp(work);
        }

    Matrix post(n_frames, n_classes);
    for (std::size_t n = 0; n < n_frames; ++n) {
        for (std::size_t w = 0; w < n_classes; ++w) work[w] = log_alpha(n, w) + log_beta(n, w);
        const double log_z = detail::log_sum_exp(work);
        for (std::size_t w = 0; w < n_classes; ++w) post(n, w) = std::exp(work[w] - log_z);
    }
    return post;
}

} // namespace airwaynav
