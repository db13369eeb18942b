#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "stochtop/csg.hpp"
#include "stochtop/field_ops.hpp"
#include "stochtop/grid_fem.hpp"
#include "stochtop/presets.hpp"
#include "stochtop/scenarios.hpp"

namespace stochtop {

/// Stepwise parameter continuation: v grows by `inc` every `period`-th
/// iteration once `start` is reached, until `cap`.
struct ContinuationSchedule {
    int start = 3;
    double cap = 5.0;
    int period = 50;
    double inc = 0.0;
};

inline double continuation(double v, const ContinuationSchedule& s, int loop) {
    if (loop >= s.start && v < s.cap && loop % s.period == 0) return v + s.inc;
    return v;
}

struct OptimizerConfig {
    double volfrac = 0.4;
    double penal = 3.0;
    double rmin = 3.2;
    int ft = 2;
    PadMode ftBC = PadMode::Symmetric;
    double eta = 0.5;
    double beta = 2.0;
    double move = 0.01;
    double pnorm = 1.0;
    int maxit = 1500;
    int maxsmpl = 2000;
    int bsz = 1;
    double com0 = 100.0;
    ContinuationSchedule penalCnt{3, 5.0, 50, 0.0};
    ContinuationSchedule betaCnt{2, 16.0, 50, 1.0};
    bool clamp_nonneg = false;
    bool symmetrize_dc = false;
    double bracket_scale = 1.0;
    SimpParams simp{1.0, 1e-9, 3.0};
};

struct IterationRecord {
    int loop = 0;
    double Compl = 0.0;
    double Cp = 0.0;
    double volume = 0.0;  // mean(xPhys) after the design update
    double penal = 0.0;
    double beta = 0.0;
    double eta = 0.0;
    double wall_ms = 0.0;
    double volume_after_projection = 0.0;  // mean(xPhys) right after RL.1
    bool bracket_exhausted = false;        // volume above target at bracket end
};

struct RunHooks {
    /// Called once per iteration with the finished record (history flush).
    std::function<void(const IterationRecord&)> on_record;
    /// Diagnostic view of the sample management step: weights, the store,
    /// and the slots selected for eviction (empty while filling).
    std::function<void(int loop, const Eigen::VectorXd& alpha, const SampleStore& store,
                       const std::vector<int>& evictees)>
        on_csg;
    /// Called once per iteration with the post-update physical field.
    std::function<void(int loop, const Field& xPhys, double penal)> on_state;
    /// Called at the start of each iteration with the raw design about to be
    /// filtered, projected and sampled.
    std::function<void(int loop, const Field& x)> on_design;
};

struct OcResult {
    Field x;
    Field xTilde;
    Field xPhys;
    double lambda = 0.0;
    int trials = 0;
    /// Volume still above volfrac when the bracket was exhausted. Move
    /// limits or a projection-sharpness bump make this a legitimate
    /// transient; it is reported, not fatal.
    bool bracket_exhausted = false;
};

/// Optimality-criteria design update with Lagrange-multiplier bisection on
/// the volume constraint. `physical` recomputes (xTilde, xPhys) from a raw
/// design exactly as the start of an iteration does.
inline OcResult oc_update(
    const Field& x, const Field& dc, const Field& dV0, const std::vector<int>& act, double move,
    double volfrac, double bracket_scale, bool clamp_nonneg,
    const std::function<void(const Field& xraw, Field& xTilde, Field& xPhys)>& physical) {
    OcResult res;
    res.x = x;
    Field ocP(act.size());
    double ocP_mean = 0.0;
    for (std::size_t a = 0; a < act.size(); ++a) {
        const int e = act[a];
        double num = -dc[e];
        if (clamp_nonneg) {
            num = std::max(1e-10, num);
        } else if (num < 0.0) {
            std::ostringstream msg;
            msg << "oc_update: positive compliance gradient " << dc[e] << " on element " << e
                << " (enable the non-negativity clamp if this is expected)";
            throw std::runtime_error(msg.str());
        }
        ocP[a] = x[e] * std::sqrt(num / dV0[e]);
        ocP_mean += ocP[a];
    }
    ocP_mean /= static_cast<double>(act.size());

    double l1 = 0.0, l2 = bracket_scale * ocP_mean / volfrac;
    while ((l2 - l1) / (l2 + l1) > 1e-8 && l2 > 1e-40) {
        const double lmid = 0.5 * (l1 + l2);
        for (std::size_t a = 0; a < act.size(); ++a) {
            const int e = act[a];
            const double hi = std::min(1.0, x[e] + move);
            const double lo = std::max(0.0, x[e] - move);
            res.x[e] = std::max(lo, std::min(hi, ocP[a] / lmid));
        }
        physical(res.x, res.xTilde, res.xPhys);
        if (res.xPhys.mean() > volfrac)
            l1 = lmid;
        else
            l2 = lmid;
        res.lambda = lmid;
        ++res.trials;
    }
    if (res.trials == 0) physical(res.x, res.xTilde, res.xPhys);
    res.bracket_exhausted = res.xPhys.mean() > volfrac;
    return res;
}

struct RunResult {
    Field x;
    Field xTilde;
    Field xPhys;
    std::vector<IterationRecord> history;
    SampleStore store;
    double penal = 0.0;
    double beta = 0.0;
    double eta = 0.0;
};

namespace detail {

inline Field mirror_add(const Field& f, int nely, int nelx, int axis) {
    Field out(f.size());
    for (int c = 0; c < nelx; ++c)
        for (int r = 0; r < nely; ++r) {
            const int mc = (axis == 0) ? nelx - 1 - c : c;
            const int mr = (axis == 0) ? r : nely - 1 - r;
            out[c * nely + r] = f[c * nely + r] + f[mc * nely + mr];
        }
    return out;
}

}  // namespace detail

/// The optimization loop: filter/project the design, solve the sampled
/// scenarios, recombine stored gradients through the nearest-neighbor
/// weights, and take an optimality-criteria step with continuation.
inline RunResult run_optimization(const Problem& prob, const OptimizerConfig& cfg,
                                  const ScenarioSequence& X, const QuadratureGrid& grid,
                                  const RunHooks& hooks = {}) {
    const GridMesh& mesh = prob.mesh;
    const int nEl = mesh.nEl;
    const int nely = mesh.nely, nelx = mesh.nelx;
    if (X.cols.cols() != static_cast<Eigen::Index>(cfg.maxit) * cfg.bsz)
        throw std::invalid_argument("run_optimization: scenario sequence length != maxit*bsz");
    if (grid.y_diff.cols() != X.cols.cols())
        throw std::invalid_argument("run_optimization: distance matrix / sequence mismatch");

    const FilterKernel kernel = make_filter_kernel(cfg.rmin, nely, nelx, cfg.ftBC);
    Field dHs = kernel.Hs;
    FemWorkspace ws(mesh, prob.ke, prob.bc);

    Field x = Field::Zero(nEl);
    Field dV = Field::Zero(nEl);
    for (int e : prob.bc.act) dV[e] = 1.0 / nEl / cfg.volfrac;
    {
        const double x0 = (cfg.volfrac * (nEl - static_cast<double>(prob.bc.pasV.size())) -
                           static_cast<double>(prob.bc.pasS.size())) /
                          static_cast<double>(prob.bc.act.size());
        for (int e : prob.bc.act) x[e] = x0;
        for (int e : prob.bc.pasS) x[e] = 1.0;
    }
    Field xPhys = x;
    Field xTilde = x;

    SimpParams simp = cfg.simp;
    double eta = cfg.eta, beta = cfg.beta, penal = cfg.penal, com0 = cfg.com0;

    RunResult res{Field(), Field(), Field(), {}, SampleStore(cfg.maxsmpl, cfg.bsz, nEl), 0, 0, 0};
    res.history.reserve(cfg.maxit);

    std::vector<int> leavers(cfg.bsz);
    for (int r = 0; r < cfg.bsz; ++r) leavers[r] = r;

    Field sK(nEl), dsK(nEl);
    for (int loop = 1; loop <= cfg.maxit; ++loop) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
        if (hooks.on_design) hooks.on_design(loop, x);

        // RL.1: physical density field
        xTilde = apply_filter(x, kernel);
        for (int e : prob.bc.act) xPhys[e] = xTilde[e];
        if (cfg.ft > 1) {
            if (cfg.ft == 3) eta = volume_preserving_eta(xPhys, eta, beta, cfg.volfrac).eta;
            dHs = kernel.Hs / project_derivative(xTilde, eta, beta);
            xPhys = project(xPhys, eta, beta);
        }
        const double vol_rl1 = xPhys.mean();

        // RL.2 + RL.3: scenario solves, sensitivities, sample storage
        simp.penal = penal;
        for (int r = 0; r < cfg.bsz; ++r) {
            const auto scen = X.cols.col(static_cast<Eigen::Index>(loop - 1) * cfg.bsz + r);
            Field field = xPhys;
            if (prob.has_damage)
                field = apply_damage(xPhys, static_cast<int>(scen[0]), static_cast<int>(scen[1]),
                                     prob.damage, nely, nelx);
            simp_interpolate(field, simp, prob.bc.act, sK, dsK);
            if (!prob.load_uncertain || r == 0) ws.factorize(sK);
            const Vector F =
                prob.load_uncertain ? build_point_load(mesh, static_cast<int>(scen[0])) : prob.F;
            const Vector U = ws.solve(F);
            const double c = F.dot(U);
            Field dc = compliance_element_gradient(U, mesh, prob.ke, dsK).array();
            dc = backfilter(dc, kernel, dHs);
            if (cfg.symmetrize_dc) dc = detail::mirror_add(dc, nely, nelx, prob.sym_axis);
            res.store.insert(leavers[r], dc, c, xPhys, loop);
        }
        const Field dV0 = backfilter(dV, kernel, dHs);

        // RL.4: integration weights and sample management
        const std::vector<int> nearest =
            nearest_indices(xPhys, res.store, grid.y_diff, grid.y_weight);
        const Eigen::VectorXd alpha = integration_weights(nearest, grid.w, res.store.fill());
        std::vector<int> evictees;
        if (static_cast<long long>(loop + 1) * cfg.bsz <= cfg.maxsmpl) {
            for (int r = 0; r < cfg.bsz; ++r) leavers[r] = loop * cfg.bsz + r;
            if (hooks.on_csg) hooks.on_csg(loop, alpha, res.store, evictees);
        } else {
            evictees = (cfg.bsz == 1)
                           ? std::vector<int>{select_evictee(res.store, alpha)}
                           : select_evictee_batch(res.store, alpha, cfg.bsz);
            if (hooks.on_csg) hooks.on_csg(loop, alpha, res.store, evictees);
            // The final iteration has no successor sample; re-pointing would
            // reference one column past the end of the distance matrix.
            if (loop < cfg.maxit)
                for (int r = 0; r < cfg.bsz; ++r)
                    res.store.repoint(evictees[r], loop * cfg.bsz + r, loop + 1);
            leavers = evictees;
        }

        // RL.5: nearest-neighbor objective and gradient with com0 rescaling
        const double compl_now =
            alpha.dot(res.store.compliances().head(res.store.fill()));
        if (loop % 25 == 0) com0 = compl_now;
        const Aggregate agg = aggregate_objective(res.store, alpha, com0, cfg.pnorm);

        // RL.6: OC update and continuation
        auto physical = [&](const Field& xr, Field& xt, Field& xp) {
            xt = apply_filter(xr, kernel);
            xp = xPhys;  // passive values persist
            for (int e : prob.bc.act) xp[e] = xt[e];
            if (cfg.ft > 1) xp = project(xp, eta, beta);
        };
        const OcResult oc = oc_update(x, agg.dc, dV0, prob.bc.act, cfg.move, cfg.volfrac,
                                      cfg.bracket_scale, cfg.clamp_nonneg, physical);
        x = oc.x;
        xTilde = oc.xTilde;
        xPhys = oc.xPhys;
        penal = continuation(penal, cfg.penalCnt, loop);
        beta = continuation(beta, cfg.betaCnt, loop);

        // RL.7: record
        IterationRecord rec;
        rec.loop = loop;
        rec.Compl = agg.Compl;
        rec.Cp = agg.Cp;
        rec.volume = xPhys.mean();
        rec.penal = penal;
        rec.beta = beta;
        rec.eta = eta;
        rec.volume_after_projection = vol_rl1;
        rec.bracket_exhausted = oc.bracket_exhausted;
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                          .count();
        res.history.push_back(rec);
        if (hooks.on_record) hooks.on_record(rec);
        if (hooks.on_state) hooks.on_state(loop, xPhys, penal);

        } catch (const std::exception& err) {
            throw std::runtime_error("iteration " + std::to_string(loop) + ": " + err.what());
        }
    }

    res.x = x;
    res.xTilde = xTilde;
    res.xPhys = xPhys;
    res.penal = penal;
    res.beta = beta;
    res.eta = eta;
    return res;
}

}  // namespace stochtop
