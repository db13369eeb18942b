#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "stochtop/csg.hpp"
#include "stochtop/field_ops.hpp"
#include "stochtop/grid_fem.hpp"
#include "stochtop/optimizer.hpp"
#include "stochtop/presets.hpp"
#include "stochtop/scenarios.hpp"

namespace stochtop {

struct EvaluationReport {
    double exact = 0.0;                 // probability-weighted expected compliance
    std::vector<double> per_scenario;   // compliance per quadrature point, grid order
    double nn_estimate = std::numeric_limits<double>::quiet_NaN();
    double relative_gap = std::numeric_limits<double>::quiet_NaN();

    void set_nn_estimate(double j) {
        nn_estimate = j;
        relative_gap = std::abs(j - exact) / exact;
    }
};

/// Exact expectation of the compliance of a fixed design over every
/// quadrature point: one factorization per damage case, or a single
/// factorization with one solve per load case.
inline EvaluationReport exact_expected_compliance(const Problem& prob, const Field& xPhys,
                                                  double penal, const QuadratureGrid& grid) {
    EvaluationReport rep;
    const Eigen::Index T = grid.points.cols();
    rep.per_scenario.resize(static_cast<std::size_t>(T));
    FemWorkspace ws(prob.mesh, prob.ke, prob.bc);
    SimpParams simp{1.0, 1e-9, penal};
    Field sK, dsK;
    if (prob.load_uncertain) {
        simp_interpolate(xPhys, simp, prob.bc.act, sK, dsK);
        ws.factorize(sK);
        for (Eigen::Index t = 0; t < T; ++t) {
            const Vector F = build_point_load(prob.mesh, static_cast<int>(grid.points(0, t)));
            rep.per_scenario[static_cast<std::size_t>(t)] = F.dot(ws.solve(F));
        }
    } else {
        for (Eigen::Index t = 0; t < T; ++t) {
            Field field = xPhys;
            if (prob.has_damage)
                field = apply_damage(xPhys, static_cast<int>(grid.points(0, t)),
                                     static_cast<int>(grid.points(1, t)), prob.damage,
                                     prob.mesh.nely, prob.mesh.nelx);
            simp_interpolate(field, simp, prob.bc.act, sK, dsK);
            ws.factorize(sK);
            rep.per_scenario[static_cast<std::size_t>(t)] = prob.F.dot(ws.solve(prob.F));
        }
    }
    double e = 0.0;
    for (Eigen::Index t = 0; t < T; ++t)
        e += grid.w[t] * rep.per_scenario[static_cast<std::size_t>(t)];
    rep.exact = e;
    return rep;
}

/// Lower empirical quantile: the smallest observed value t such that the
/// fraction of observations <= t is at least q.
inline double empirical_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("empirical_quantile: no values");
    std::sort(values.begin(), values.end());
    const auto n = static_cast<std::ptrdiff_t>(values.size());
    std::ptrdiff_t k = static_cast<std::ptrdiff_t>(std::ceil(q * static_cast<double>(n)));
    k = std::max<std::ptrdiff_t>(1, std::min(n, k));
    return values[static_cast<std::size_t>(k - 1)];
}

struct QuantileTable {
    std::vector<int> checkpoints;                 // iteration numbers
    std::vector<double> qs;                       // requested quantile levels
    std::vector<std::vector<double>> values;      // [checkpoint][q]
    std::vector<std::vector<double>> raw;         // [checkpoint][run]
};

/// Run `n_runs` optimizations with consecutive seeds, evaluate the exact
/// expected compliance every `cadence` iterations (and at the end), and
/// tabulate empirical quantiles per checkpoint.
template <typename RunFn>
QuantileTable ensemble_quantiles(RunFn&& run_one, int n_runs, const std::vector<double>& qs,
                                 int cadence, int maxit) {
    if (n_runs < 1) throw std::invalid_argument("ensemble_quantiles: need at least one run");
    QuantileTable table;
    table.qs = qs;
    for (int k = cadence; k <= maxit; k += cadence) table.checkpoints.push_back(k);
    if (table.checkpoints.empty() || table.checkpoints.back() != maxit)
        table.checkpoints.push_back(maxit);
    table.raw.assign(table.checkpoints.size(), {});
    for (int run = 0; run < n_runs; ++run) {
        const std::vector<double> series = run_one(run, table.checkpoints);
        if (series.size() != table.checkpoints.size())
            throw std::runtime_error("ensemble_quantiles: run returned a short series");
        for (std::size_t i = 0; i < series.size(); ++i) table.raw[i].push_back(series[i]);
    }
    table.values.resize(table.checkpoints.size());
    for (std::size_t i = 0; i < table.checkpoints.size(); ++i)
        for (double q : qs) table.values[i].push_back(empirical_quantile(table.raw[i], q));
    return table;
}

struct IntegrationStudyResult {
    double exact = 0.0;                                  // reference value c*
    // relative error series per metric variant and seed: err[metric][seed][step]
    std::vector<std::vector<std::vector<double>>> err;
};

/// Pure nearest-neighbor integration on a frozen design: feed the sampling
/// loop without moving the design and track |J_n - c*|/c* for each distance
/// metric variant. Metric variants share the same scenario draws per seed.
inline IntegrationStudyResult integration_error_study(
    const Problem& prob, const Field& xPhys, double penal, const QuadratureGrid& base_grid,
    double y_weight, int n_steps, int maxsmpl, const std::vector<std::uint64_t>& seeds,
    bool include_symmetric_metric = true) {
    IntegrationStudyResult out;
    const EvaluationReport ref = exact_expected_compliance(prob, xPhys, penal, base_grid);
    out.exact = ref.exact;

    FemWorkspace ws(prob.mesh, prob.ke, prob.bc);
    SimpParams simp{1.0, 1e-9, penal};
    const int n_metrics = include_symmetric_metric ? 2 : 1;
    out.err.assign(n_metrics, {});

    for (std::uint64_t seed : seeds) {
        Rng rng(seed);
        const ScenarioSequence X =
            sample_damage_sequence(rng, n_steps, prob.damage, prob.mesh.nelx, prob.mesh.nely);
        std::vector<Eigen::MatrixXd> y_diffs;
        y_diffs.push_back(precompute_distances(base_grid.points, X.cols));
        if (include_symmetric_metric) {
            const int extent = (prob.sym_axis == 0) ? prob.mesh.nelx : prob.mesh.nely;
            y_diffs.push_back(symmetric_damage_distance(base_grid.points, X.cols, extent,
                                                        prob.damage.L, prob.sym_axis));
        }

        // Compliance depends on the scenario only, so solve each draw once.
        std::vector<double> comp(static_cast<std::size_t>(n_steps));
        Field sK, dsK;
        for (int k = 0; k < n_steps; ++k) {
            const Field field =
                apply_damage(xPhys, static_cast<int>(X.cols(0, k)), static_cast<int>(X.cols(1, k)),
                             prob.damage, prob.mesh.nely, prob.mesh.nelx);
            simp_interpolate(field, simp, prob.bc.act, sK, dsK);
            ws.factorize(sK);
            comp[static_cast<std::size_t>(k)] = prob.F.dot(ws.solve(prob.F));
        }

        for (int metric = 0; metric < n_metrics; ++metric) {
            SampleStore store(maxsmpl, 1, prob.mesh.nEl, /*keep_gradients=*/false);
            int leaver = 0;
            std::vector<double> errs;
            errs.reserve(static_cast<std::size_t>(n_steps));
            for (int k = 1; k <= n_steps; ++k) {
                store.insert(leaver, Field(), comp[static_cast<std::size_t>(k - 1)], xPhys, k);
                const auto nearest = nearest_indices(xPhys, store, y_diffs[metric], y_weight);
                const Eigen::VectorXd alpha =
                    integration_weights(nearest, base_grid.w, store.fill());
                if (k + 1 <= maxsmpl) {
                    leaver = k;
                } else {
                    leaver = select_evictee(store, alpha);
                    if (k < n_steps) store.repoint(leaver, k, k + 1);
                }
                const double J = alpha.dot(store.compliances().head(store.fill()));
                errs.push_back(std::abs(J - out.exact) / out.exact);
            }
            out.err[metric].push_back(std::move(errs));
        }
    }
    return out;
}

}  // namespace stochtop
