#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "stochtop/field_ops.hpp"

namespace stochtop {

/// Quadrature discretization of the random space: integration points, their
/// probability weights, and the precomputed normalized distance matrix
/// between every integration point and every entry of the scenario
/// sequence. y_weight is the factor balancing design distance against
/// scenario distance in the product norm.
struct QuadratureGrid {
    Eigen::MatrixXd points;  // dim x T
    Eigen::VectorXd w;       // T, sums to 1
    Eigen::MatrixXd y_diff;  // T x (sequence length), entries in [0, 1]
    double y_weight = 0.0;
};

/// Raw pairwise Euclidean distances between grid points (columns of y) and
/// sequence entries (columns of X).
inline Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& y, const Eigen::MatrixXd& X) {
    if (X.cols() == 0 || y.cols() == 0)
        throw std::invalid_argument("pairwise_distances: empty point set");
    Eigen::MatrixXd d(y.cols(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        for (Eigen::Index t = 0; t < y.cols(); ++t) d(t, j) = (y.col(t) - X.col(j)).norm();
    return d;
}

/// Normalize a raw distance matrix by its global maximum, floored at 1e-10
/// so degenerate scenario sets stay well defined.
inline Eigen::MatrixXd normalize_distances(Eigen::MatrixXd raw) {
    const double m = std::max(raw.maxCoeff(), 1e-10);
    raw /= m;
    return raw;
}

inline Eigen::MatrixXd precompute_distances(const Eigen::MatrixXd& y, const Eigen::MatrixXd& X) {
    return normalize_distances(pairwise_distances(y, X));
}

/// Ring of stored gradient/design/compliance samples. Slots are stable:
/// eviction overwrites in place, and seq_index keeps track of which column
/// of the distance matrix each slot refers to.
class SampleStore {
public:
    SampleStore(int capacity, int batch, Eigen::Index design_size, bool keep_gradients = true)
        : capacity_(capacity), batch_(batch) {
        if (capacity < 1 || batch < 1 || capacity % batch != 0)
            throw std::invalid_argument("SampleStore: capacity must be a positive multiple of batch");
        designs_.setZero(design_size, capacity);
        if (keep_gradients) gradients_.setZero(design_size, capacity);
        compliances_.setZero(capacity);
        birth_.resize(capacity);
        seq_index_.resize(capacity);
        for (int s = 0; s < capacity; ++s) {
            birth_[s] = s / batch + 1;
            seq_index_[s] = s;
        }
    }

    int capacity() const { return capacity_; }
    int batch() const { return batch_; }
    int fill() const { return fill_; }
    bool at_capacity() const { return fill_ == capacity_; }

    const Eigen::MatrixXd& designs() const { return designs_; }
    const Eigen::MatrixXd& gradients() const { return gradients_; }
    const Eigen::VectorXd& compliances() const { return compliances_; }
    const std::vector<int>& birth() const { return birth_; }
    const std::vector<int>& seq_index() const { return seq_index_; }

    void insert(int slot, const Field& g, double c, const Field& xhat, int loop) {
        (void)loop;
        if (slot < 0 || slot >= capacity_) throw std::out_of_range("SampleStore::insert: bad slot");
        if (gradients_.size() > 0) gradients_.col(slot) = g.matrix();
        designs_.col(slot) = xhat.matrix();
        compliances_[slot] = c;
        fill_ = std::max(fill_, slot + 1);
    }

    /// Re-point an evicted slot at the incoming sample (sequence column and
    /// birth iteration) before the next iteration overwrites its payload.
    void repoint(int slot, int seq_col, int birth_loop) {
        seq_index_[slot] = seq_col;
        birth_[slot] = birth_loop;
    }

private:
    int capacity_;
    int batch_;
    int fill_ = 0;
    Eigen::MatrixXd gradients_;  // design_size x capacity (may be 0 x capacity)
    Eigen::MatrixXd designs_;
    Eigen::VectorXd compliances_;
    std::vector<int> birth_;
    std::vector<int> seq_index_;
};

/// For each quadrature point t, the slot minimizing
///   ||xPhys - design_i||_2 + y_weight * y_diff(t, seq_index_i).
/// Ties resolve to the lowest slot index.
inline std::vector<int> nearest_indices(const Field& xPhys, const SampleStore& store,
                                        const Eigen::MatrixXd& y_diff, double y_weight) {
    const int fill = store.fill();
    if (fill < 1) throw std::logic_error("nearest_indices: empty store");
    const Eigen::Index T = y_diff.rows();
    Eigen::VectorXd dist(fill);
    for (int i = 0; i < fill; ++i)
        dist[i] = (xPhys.matrix() - store.designs().col(i)).norm();

    std::vector<int> best_idx(static_cast<std::size_t>(T), 0);
    Eigen::VectorXd best =
        dist[0] + y_weight * y_diff.col(store.seq_index()[0]).array();
    for (int i = 1; i < fill; ++i) {
        const auto col = y_diff.col(store.seq_index()[i]);
        const double di = dist[i];
        for (Eigen::Index t = 0; t < T; ++t) {
            const double v = di + y_weight * col[t];
            if (v < best[t]) {
                best[t] = v;
                best_idx[static_cast<std::size_t>(t)] = i;
            }
        }
    }
    return best_idx;
}

/// Accumulate quadrature weights onto their nearest slots.
inline Eigen::VectorXd integration_weights(const std::vector<int>& nearest,
                                           const Eigen::VectorXd& w, int fill) {
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(fill);
    if (nearest.size() != static_cast<std::size_t>(w.size()))
        throw std::invalid_argument("integration_weights: size mismatch");
    for (std::size_t t = 0; t < nearest.size(); ++t) {
        if (nearest[t] < 0 || nearest[t] >= fill)
            throw std::out_of_range("integration_weights: nearest index out of range");
        alpha[nearest[t]] += w[static_cast<Eigen::Index>(t)];
    }
    return alpha;
}

struct Aggregate {
    double Compl = 0.0;  // weighted mean compliance
    double Cp = 0.0;     // P-norm of the (unscaled) compliance samples
    Field dc;            // rescaled weighted gradient
};

/// Weighted recombination of the stored samples:
///   Compl = sum_i alpha_i c_i
///   Cp    = (sum_i alpha_i c_i^P)^(1/P)
///   dc    = 1/com0 * sum_i alpha_i (c_i/com0)^(P-1) g_i
inline Aggregate aggregate_objective(const SampleStore& store, const Eigen::VectorXd& alpha,
                                     double com0, double pnorm) {
    const int fill = store.fill();
    Aggregate out;
    const auto c = store.compliances().head(fill);
    out.Compl = alpha.head(fill).dot(c);
    double cp = 0.0;
    for (int i = 0; i < fill; ++i) cp += alpha[i] * std::pow(c[i], pnorm);
    out.Cp = std::pow(cp, 1.0 / pnorm);
    if (store.gradients().size() > 0) {
        out.dc = Field::Zero(store.gradients().rows());
        for (int i = 0; i < fill; ++i) {
            if (alpha[i] == 0.0) continue;
            const double coeff = alpha[i] * std::pow(c[i] / com0, pnorm - 1.0) / com0;
            out.dc += coeff * store.gradients().col(i).array();
        }
    }
    return out;
}

/// Slot to drop when the store is full: among slots whose weight is within
/// 1e-8 of the minimum, the one with the smallest birth iteration (lowest
/// slot index on ties).
inline int select_evictee(const SampleStore& store, const Eigen::VectorXd& alpha) {
    const int fill = store.fill();
    const double amin = alpha.head(fill).minCoeff();
    int best = -1;
    for (int i = 0; i < fill; ++i) {
        if (alpha[i] - amin < 1e-8) {
            if (best < 0 || store.birth()[i] < store.birth()[best]) best = i;
        }
    }
    return best;
}

/// Batch variant: candidates fall within 1e-8 of the bsz-th smallest
/// weight; the bsz oldest candidates (stable in slot order) leave.
inline std::vector<int> select_evictee_batch(const SampleStore& store,
                                             const Eigen::VectorXd& alpha, int bsz) {
    const int fill = store.fill();
    std::vector<double> sorted(alpha.data(), alpha.data() + fill);
    std::nth_element(sorted.begin(), sorted.begin() + (bsz - 1), sorted.end());
    const double thresh = sorted[bsz - 1];
    std::vector<int> cand;
    for (int i = 0; i < fill; ++i)
        if (alpha[i] - thresh < 1e-8) cand.push_back(i);
    std::stable_sort(cand.begin(), cand.end(),
                     [&](int a, int b) { return store.birth()[a] < store.birth()[b]; });
    cand.resize(bsz);
    return cand;
}

}  // namespace stochtop
