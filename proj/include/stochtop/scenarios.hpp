#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "stochtop/csg.hpp"
#include "stochtop/field_ops.hpp"
#include "stochtop/grid_fem.hpp"
#include "stochtop/rng.hpp"

namespace stochtop {

/// Square damage region of side L (in elements). Scenario coordinates are
/// the 1-based anchor position (x, y), y counted from the bottom of the
/// domain; the top nonD rows and, optionally, the rightmost nonR anchor
/// columns are excluded.
struct DamageModel {
    int L = 20;
    int nonD = 5;
    int nonR = 0;
    double dmg_fac = 1.0;

    int x_max(int nelx) const { return nelx - L + 1 - nonR; }
    int y_max(int nely) const { return nely - L + 1 - nonD; }
};

/// Sequence of scenario coordinates, one column per draw.
struct ScenarioSequence {
    Eigen::MatrixXd cols;  // dim x (maxit * bsz)
};

/// All admissible damage positions with uniform weights, x varying slowest.
inline QuadratureGrid enumerate_damage_grid(int nelx, int nely, const DamageModel& m) {
    const int xmax = m.x_max(nelx), ymax = m.y_max(nely);
    if (xmax < 1 || ymax < 1)
        throw std::invalid_argument("enumerate_damage_grid: damage block does not fit the domain");
    QuadratureGrid g;
    const int T = xmax * ymax;
    g.points.resize(2, T);
    int t = 0;
    for (int x = 1; x <= xmax; ++x)
        for (int y = 1; y <= ymax; ++y) {
            g.points(0, t) = x;
            g.points(1, t) = y;
            ++t;
        }
    g.w = Eigen::VectorXd::Constant(T, 1.0 / T);
    return g;
}

/// Clamp xPhys - dmg_fac * indicator(block anchored at pos) to [0, 1].
/// The anchor's y coordinate counts from the bottom row of the image.
inline Field apply_damage(const Field& xPhys, int pos_x, int pos_y, const DamageModel& m,
                          int nely, int nelx) {
    if (pos_x < 1 || pos_x > nelx - m.L + 1 || pos_y < 1 || pos_y > nely - m.L + 1)
        throw std::out_of_range("apply_damage: inadmissible damage position");
    Field out = xPhys;
    const int r0 = nely - pos_y - m.L + 1;  // 0-based top row of the block
    const int c0 = pos_x - 1;
    for (int c = c0; c < c0 + m.L; ++c)
        for (int r = r0; r < r0 + m.L; ++r) {
            double& v = out[c * nely + r];
            v = std::max(0.0, std::min(1.0, v - m.dmg_fac));
        }
    return out;
}

/// i.i.d. uniform positions over the admissible grid; each entry consumes
/// one x draw then one y draw.
inline ScenarioSequence sample_damage_sequence(Rng& rng, int count, const DamageModel& m,
                                               int nelx, int nely) {
    const int xmax = m.x_max(nelx), ymax = m.y_max(nely);
    if (xmax < 1 || ymax < 1)
        throw std::invalid_argument("sample_damage_sequence: empty admissible range");
    ScenarioSequence s;
    s.cols.resize(2, count);
    for (int k = 0; k < count; ++k) {
        s.cols(0, k) = static_cast<double>(rng.uniform_int(1, xmax));
        s.cols(1, k) = static_cast<double>(rng.uniform_int(1, ymax));
    }
    return s;
}

/// Uniform draws restricted to the columns of a coarse grid.
inline ScenarioSequence sample_from_grid(Rng& rng, int count, const QuadratureGrid& grid) {
    ScenarioSequence s;
    s.cols.resize(grid.points.rows(), count);
    for (int k = 0; k < count; ++k)
        s.cols.col(k) = grid.points.col(rng.uniform_int(0, grid.points.cols() - 1));
    return s;
}

/// Normalized distances where each sequence entry is additionally compared
/// against its mirror image across the domain midline; the mirrored anchor
/// coordinate along `axis` is extent - L + 2 - coord.
inline Eigen::MatrixXd symmetric_damage_distance(const Eigen::MatrixXd& y,
                                                 const Eigen::MatrixXd& X, int extent, int L,
                                                 int axis = 0) {
    Eigen::MatrixXd Xm = X;
    Xm.row(axis) = (extent - L + 2) - X.row(axis).array();
    Eigen::MatrixXd d = pairwise_distances(y, X).cwiseMin(pairwise_distances(y, Xm));
    return normalize_distances(std::move(d));
}

/// Force every 15th x anchor and every 10th y anchor to the boundary value 1.
inline void oversample_boundary(ScenarioSequence& s) {
    for (Eigen::Index k = 0; k < s.cols.cols(); k += 15) s.cols(0, k) = 1.0;
    for (Eigen::Index k = 0; k < s.cols.cols(); k += 10) s.cols(1, k) = 1.0;
}

/// Coarse replacement of the full damage grid: a primal nx-by-ny lattice of
/// anchors spanning the admissible ranges, interleaved with the
/// (nx-1)-by-(ny-1) lattice of its cell midpoints, with
/// nx*ny + (nx-1)*(ny-1) == count. Rejects counts that no such pair of
/// interleaved layers can realize.
inline QuadratureGrid reduced_damage_grid(int nelx, int nely, const DamageModel& m, int count) {
    const int xmax = m.x_max(nelx), ymax = m.y_max(nely);
    if (xmax < 2 || ymax < 2)
        throw std::invalid_argument("reduced_damage_grid: admissible range too small");
    int nx = -1, ny = -1;
    double best_aspect = -1.0;
    const double target = static_cast<double>(xmax) / ymax;
    for (int cy = 2; cy <= count; ++cy) {
        // nx*cy + (nx-1)*(cy-1) = count  =>  nx = (count + cy - 1) / (2*cy - 1)
        const int num = count + cy - 1, den = 2 * cy - 1;
        if (num % den != 0) continue;
        const int cx = num / den;
        if (cx < 2 || cx > xmax || cy > ymax) continue;
        const double aspect = std::abs(std::log(static_cast<double>(cx) / cy / target));
        if (nx < 0 || aspect < best_aspect) {
            nx = cx;
            ny = cy;
            best_aspect = aspect;
        }
    }
    if (nx < 0)
        throw std::invalid_argument(
            "reduced_damage_grid: count is not representable as two interleaved lattices");

    auto lattice = [](int lo, int hi, int n) {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i)
            v[i] = std::round(lo + static_cast<double>(i) * (hi - lo) / (n - 1));
        return v;
    };
    const std::vector<double> px = lattice(1, xmax, nx), py = lattice(1, ymax, ny);
    QuadratureGrid g;
    g.points.resize(2, count);
    int t = 0;
    for (double x : px)
        for (double y : py) {
            g.points(0, t) = x;
            g.points(1, t) = y;
            ++t;
        }
    for (int i = 0; i + 1 < nx; ++i)
        for (int j = 0; j + 1 < ny; ++j) {
            g.points(0, t) = std::round(0.5 * (px[i] + px[i + 1]));
            g.points(1, t) = std::round(0.5 * (py[j] + py[j + 1]));
            ++t;
        }
    g.w = Eigen::VectorXd::Constant(count, 1.0 / count);
    return g;
}

/// Empirical model of a random load position: the dataset of observed
/// 1-based top-node indices, its sorted unique support, and the empirical
/// probability of each support point.
struct LoadPositionModel {
    std::vector<int> dataset;
    std::vector<int> support;   // sorted unique values
    Eigen::VectorXd dist_w;     // empirical probabilities, sums to 1
};

inline LoadPositionModel make_load_model(std::vector<int> dataset, int max_node) {
    if (dataset.empty()) throw std::invalid_argument("load model: empty dataset");
    LoadPositionModel m;
    std::map<int, int> counts;
    for (int v : dataset) {
        if (v < 1 || v > max_node)
            throw std::out_of_range("load model: node index outside [1, nelx+1]");
        ++counts[v];
    }
    m.dataset = std::move(dataset);
    m.support.reserve(counts.size());
    m.dist_w.resize(static_cast<Eigen::Index>(counts.size()));
    Eigen::Index i = 0;
    for (const auto& [v, n] : counts) {
        m.support.push_back(v);
        m.dist_w[i++] = static_cast<double>(n) / m.dataset.size();
    }
    return m;
}

/// Synthetic dataset mimicking measured load positions: 3e5 draws from a
/// normal(0.25, 0.1) truncated to [0, 1] plus 1e5 from a truncated
/// normal(0.6, 0.2), shuffled, then mapped to nodes via round(nelx*r)+1.
inline std::vector<int> synthesize_load_dataset(Rng& rng, int nelx, int n1 = 300000,
                                                int n2 = 100000) {
    std::vector<double> r;
    r.reserve(n1 + n2);
    for (int i = 0; i < n1; ++i) r.push_back(rng.truncated_normal(0.25, 0.1, 0.0, 1.0));
    for (int i = 0; i < n2; ++i) r.push_back(rng.truncated_normal(0.6, 0.2, 0.0, 1.0));
    // Fisher-Yates shuffle
    for (std::size_t i = r.size() - 1; i > 0; --i)
        std::swap(r[i], r[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i)))]);
    std::vector<int> nodes(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        nodes[i] = static_cast<int>(std::lround(nelx * r[i])) + 1;
    return nodes;
}

enum class LoadSequenceType { Distribution, Uniform };

/// 'distribution' draws uniformly from the raw dataset (so entries follow
/// the empirical probabilities); 'uniform' draws uniformly over the support.
inline ScenarioSequence generate_load_sequence(const LoadPositionModel& m, LoadSequenceType type,
                                               Rng& rng, int count) {
    ScenarioSequence s;
    s.cols.resize(1, count);
    for (int k = 0; k < count; ++k) {
        if (type == LoadSequenceType::Distribution)
            s.cols(0, k) = m.dataset[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(m.dataset.size()) - 1))];
        else
            s.cols(0, k) = m.support[static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(m.support.size()) - 1))];
    }
    return s;
}

/// Unit downward force at the vertical DOF of the given 1-based top node.
inline Vector build_point_load(const GridMesh& mesh, int node) {
    if (node < 1 || node > mesh.nelx + 1)
        throw std::out_of_range("build_point_load: node outside the top edge");
    Vector F = Vector::Zero(mesh.nDof);
    F[2 * mesh.node(0, node - 1) + 1] = -1.0;
    return F;
}

}  // namespace stochtop
