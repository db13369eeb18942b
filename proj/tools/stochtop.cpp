#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "stochtop/evaluate.hpp"
#include "stochtop/io.hpp"
#include "stochtop/optimizer.hpp"
#include "stochtop/presets.hpp"
#include "stochtop/rng.hpp"
#include "stochtop/scenarios.hpp"

namespace fs = std::filesystem;
using namespace stochtop;

namespace {

struct CliOptions {
    std::string preset = "clamp";
    int nelx = -1, nely = -1;  // -1: preset default
    double volfrac = -1, penal = -1, rmin = -1;
    int ft = -1;
    std::string ftBC;
    double eta = -1, beta = -1, move = -1, pnorm = -1;
    int maxit = -1, maxsmpl = -1, bsz = 1;
    double E0 = 1.0, Emin = 1e-9, nu = 0.3, com0 = -1;
    double y_weight_scale = -1, bracket_scale = -1;
    std::vector<double> penal_cnt, beta_cnt;
    int dmg_L = -1, dmg_nonD = -1, dmg_nonR = -1;
    double dmg_fac = -1;
    bool symmetrize = false, no_symmetrize = false;
    std::string metric;  // plain | symmetric
    bool oversample = false;
    int reduced_grid = 0;
    bool clamp_nonneg = false;
    std::string type;  // distribution | uniform (load preset)
    std::string dataset;
    std::uint64_t seed = 1;
    std::string out = "out";
    int eval_cadence = 0;  // 0: evaluate the final design only
    bool debug_csg = false;
};

void add_problem_options(CLI::App* cmd, CliOptions& o) {
    cmd->add_option("--preset", o.preset, "problem preset: clamp | beam | load | mbb")
        ->check(CLI::IsMember({"clamp", "beam", "load", "mbb"}));
    cmd->add_option("--nelx", o.nelx, "horizontal element count");
    cmd->add_option("--nely", o.nely, "vertical element count");
    cmd->add_option("--volfrac", o.volfrac, "volume fraction");
    cmd->add_option("--penal", o.penal, "SIMP exponent");
    cmd->add_option("--rmin", o.rmin, "filter radius (elements)");
    cmd->add_option("--ft", o.ft, "filtering: 1 density, 2 +projection, 3 +volume-preserving eta");
    cmd->add_option("--ftbc", o.ftBC, "filter boundary: N (reflective) or D (zero)");
    cmd->add_option("--eta", o.eta, "projection threshold");
    cmd->add_option("--beta", o.beta, "projection sharpness");
    cmd->add_option("--move", o.move, "move limit");
    cmd->add_option("--pnorm", o.pnorm, "P-norm exponent of the objective");
    cmd->add_option("--maxit", o.maxit, "iteration count");
    cmd->add_option("--maxsmpl", o.maxsmpl, "stored-sample capacity");
    cmd->add_option("--bsz", o.bsz, "scenarios per iteration (mini-batch size)");
    cmd->add_option("--e0", o.E0, "solid Young's modulus");
    cmd->add_option("--emin", o.Emin, "void Young's modulus");
    cmd->add_option("--nu", o.nu, "Poisson ratio");
    cmd->add_option("--com0", o.com0, "initial compliance scale");
    cmd->add_option("--y-weight-scale", o.y_weight_scale,
                    "scenario-distance weight factor (c1 = scale*volfrac*sqrt(nEl))");
    cmd->add_option("--bracket-scale", o.bracket_scale, "bisection upper-bound multiplier");
    cmd->add_option("--penal-cnt", o.penal_cnt, "penal continuation: start,cap,period,inc")
        ->expected(4);
    cmd->add_option("--beta-cnt", o.beta_cnt, "beta continuation: start,cap,period,inc")
        ->expected(4);
    cmd->add_option("--dmg-l", o.dmg_L, "damage block side length");
    cmd->add_option("--dmg-nond", o.dmg_nonD, "excluded top rows");
    cmd->add_option("--dmg-nonr", o.dmg_nonR, "excluded right anchor columns");
    cmd->add_option("--dmg-fac", o.dmg_fac, "damage intensity in [0,1]");
    cmd->add_flag("--symmetrize", o.symmetrize, "mirror-symmetrize the gradient samples");
    cmd->add_flag("--no-symmetrize", o.no_symmetrize, "disable preset symmetrization");
    cmd->add_option("--metric", o.metric, "scenario metric: plain | symmetric")
        ->check(CLI::IsMember({"plain", "symmetric"}));
    cmd->add_flag("--oversample", o.oversample, "force boundary anchors into the sequence");
    cmd->add_option("--reduced-grid", o.reduced_grid,
                    "replace the damage grid by this many interleaved-lattice cases");
    cmd->add_flag("--clamp-nonneg", o.clamp_nonneg, "floor -dc at 1e-10 in the OC ratio");
    cmd->add_option("--type", o.type, "load sampling law: distribution | uniform")
        ->check(CLI::IsMember({"distribution", "uniform"}));
    cmd->add_option("--dataset", o.dataset, "load-case dataset file (one node per line)");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--out", o.out, "output directory");
    cmd->set_config("--config", "", "flat key=value config file (CLI flags win)");
}

struct Instance {
    Problem prob;
    OptimizerConfig cfg;
    PresetDefaults defs;
    PresetKind kind;
    std::optional<LoadPositionModel> load_model;
    LoadSequenceType load_type = LoadSequenceType::Distribution;
    bool symmetric_metric = false;
};

Instance make_instance(CliOptions& o, bool need_dataset) {
    Instance inst{build_problem(preset_from_name(o.preset), 1, 1), {}, {}, PresetKind::Clamp, {}, {}, false};
    inst.kind = preset_from_name(o.preset);
    inst.defs = preset_defaults(inst.kind);
    const int nelx = o.nelx > 0 ? o.nelx : inst.defs.nelx;
    const int nely = o.nely > 0 ? o.nely : inst.defs.nely;
    inst.prob = build_problem(inst.kind, nelx, nely);
    inst.prob.ke = element_stiffness(o.nu);
    if (o.dmg_L > 0) inst.prob.damage.L = o.dmg_L;
    if (o.dmg_nonD >= 0) inst.prob.damage.nonD = o.dmg_nonD;
    if (o.dmg_nonR >= 0) inst.prob.damage.nonR = o.dmg_nonR;
    if (o.dmg_fac >= 0) inst.prob.damage.dmg_fac = o.dmg_fac;

    OptimizerConfig& c = inst.cfg;
    c.volfrac = o.volfrac > 0 ? o.volfrac : inst.defs.volfrac;
    c.penal = o.penal > 0 ? o.penal : inst.defs.penal;
    c.rmin = o.rmin > 0 ? o.rmin : inst.defs.rmin;
    c.ft = o.ft > 0 ? o.ft : inst.defs.ft;
    c.ftBC = pad_mode_from_char(o.ftBC.empty() ? inst.defs.ftBC : o.ftBC[0]);
    c.eta = o.eta > 0 ? o.eta : inst.defs.eta;
    c.beta = o.beta >= 0 ? o.beta : inst.defs.beta;
    c.move = o.move > 0 ? o.move : inst.defs.move;
    c.pnorm = o.pnorm > 0 ? o.pnorm : inst.defs.pnorm;
    c.maxit = o.maxit > 0 ? o.maxit : inst.defs.maxit;
    c.maxsmpl = o.maxsmpl > 0 ? o.maxsmpl : inst.defs.maxsmpl;
    c.bsz = o.bsz;
    c.com0 = o.com0 > 0 ? o.com0 : inst.defs.com0;
    c.bracket_scale = o.bracket_scale > 0 ? o.bracket_scale : inst.defs.bracket_scale;
    c.clamp_nonneg = o.clamp_nonneg;
    c.simp = SimpParams{o.E0, o.Emin, c.penal};
    c.penalCnt = ContinuationSchedule{3, 5.0, 50, 0.0};
    c.betaCnt = ContinuationSchedule{2, 16.0, inst.defs.beta_period, 1.0};
    if (o.penal_cnt.size() == 4)
        c.penalCnt = ContinuationSchedule{static_cast<int>(o.penal_cnt[0]), o.penal_cnt[1],
                                          static_cast<int>(o.penal_cnt[2]), o.penal_cnt[3]};
    if (o.beta_cnt.size() == 4)
        c.betaCnt = ContinuationSchedule{static_cast<int>(o.beta_cnt[0]), o.beta_cnt[1],
                                         static_cast<int>(o.beta_cnt[2]), o.beta_cnt[3]};
    c.symmetrize_dc = (inst.defs.symmetrize_dc || o.symmetrize) && !o.no_symmetrize;
    inst.symmetric_metric = inst.defs.symmetric_metric;
    if (o.metric == "plain") inst.symmetric_metric = false;
    if (o.metric == "symmetric") inst.symmetric_metric = true;

    if (inst.prob.load_uncertain && need_dataset) {
        std::vector<int> data;
        if (!o.dataset.empty()) {
            data = read_dataset(o.dataset);
        } else {
            Rng rng(o.seed + 1000);
            data = synthesize_load_dataset(rng, nelx);
            fs::create_directories(o.out);
            write_dataset(data, (fs::path(o.out) / "dataset.txt").string());
            std::cout << "synthesized dataset -> " << (fs::path(o.out) / "dataset.txt").string()
                      << "\n";
        }
        inst.load_model = make_load_model(std::move(data), nelx + 1);
        if (o.type.empty())
            throw CLI::ValidationError("--type", "the load preset needs --type");
        inst.load_type = o.type == "uniform" ? LoadSequenceType::Uniform
                                             : LoadSequenceType::Distribution;
    }
    return inst;
}

/// Quadrature grid of the full scenario space plus the y_weight balance.
QuadratureGrid make_eval_grid(const Instance& inst) {
    QuadratureGrid g;
    if (inst.prob.load_uncertain) {
        const auto& m = *inst.load_model;
        g.points.resize(1, static_cast<Eigen::Index>(m.support.size()));
        for (std::size_t i = 0; i < m.support.size(); ++i)
            g.points(0, static_cast<Eigen::Index>(i)) = m.support[i];
        g.w = m.dist_w;
    } else {
        g = enumerate_damage_grid(inst.prob.mesh.nelx, inst.prob.mesh.nely, inst.prob.damage);
    }
    return g;
}

double y_weight_of(const Instance& inst, const CliOptions& o) {
    const double scale = o.y_weight_scale > 0 ? o.y_weight_scale : inst.defs.y_weight_scale;
    return scale * inst.cfg.volfrac * std::sqrt(static_cast<double>(inst.prob.mesh.nEl));
}

void print_record(const IterationRecord& r) {
    std::printf("It.:%5d  Obj.:%10.4f  Cp.:%10.4f  Vol.:%7.4f  penal:%5.2f  beta:%5.1f  eta:%6.3f\n",
                r.loop, r.Compl, r.Cp, r.volume, r.penal, r.beta, r.eta);
    std::fflush(stdout);
}

void write_evaluation(const fs::path& dir, const EvaluationReport& rep,
                      const QuadratureGrid& grid, const char* exact_key) {
    std::ofstream ev(dir / "evaluation.txt", std::ios::app);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s=%.10g\n", exact_key, rep.exact);
    ev << buf;
    if (std::isfinite(rep.nn_estimate)) {
        std::snprintf(buf, sizeof(buf), "nn_estimate=%.10g\nrelative_gap=%.10g\n",
                      rep.nn_estimate, rep.relative_gap);
        ev << buf;
    }
    ev << "scenarios=" << rep.per_scenario.size() << "\n";

    std::ofstream sc(dir / "scenario_compliances.csv");
    const bool two_dim = grid.points.rows() == 2;
    sc << (two_dim ? "x,y,compliance\n" : "node,compliance\n");
    for (std::size_t t = 0; t < rep.per_scenario.size(); ++t) {
        const auto ti = static_cast<Eigen::Index>(t);
        if (two_dim)
            sc << grid.points(0, ti) << "," << grid.points(1, ti);
        else
            sc << grid.points(0, ti);
        std::snprintf(buf, sizeof(buf), ",%.10g\n", rep.per_scenario[t]);
        sc << buf;
    }
}

int cmd_run(CliOptions& o) {
    Instance inst = make_instance(o, true);
    const Problem& prob = inst.prob;
    fs::create_directories(o.out);

    Rng rng(o.seed);
    ScenarioSequence X;
    QuadratureGrid grid;
    if (prob.load_uncertain) {
        grid = make_eval_grid(inst);
        X = generate_load_sequence(*inst.load_model, inst.load_type, rng,
                                   inst.cfg.maxit * inst.cfg.bsz);
    } else {
        if (o.reduced_grid > 0) {
            grid = reduced_damage_grid(prob.mesh.nelx, prob.mesh.nely, prob.damage,
                                       o.reduced_grid);
            X = sample_from_grid(rng, inst.cfg.maxit * inst.cfg.bsz, grid);
        } else {
            grid = make_eval_grid(inst);
            X = sample_damage_sequence(rng, inst.cfg.maxit * inst.cfg.bsz, prob.damage,
                                       prob.mesh.nelx, prob.mesh.nely);
        }
        if (o.oversample) oversample_boundary(X);
    }
    grid.y_weight = y_weight_of(inst, o);
    if (!prob.load_uncertain && inst.symmetric_metric) {
        const int extent = prob.sym_axis == 0 ? prob.mesh.nelx : prob.mesh.nely;
        grid.y_diff = symmetric_damage_distance(grid.points, X.cols, extent, prob.damage.L,
                                                prob.sym_axis);
    } else {
        grid.y_diff = precompute_distances(grid.points, X.cols);
    }

    HistoryWriter history((fs::path(o.out) / "history.csv").string());
    std::ofstream exact_hist;
    std::ofstream csg_dump;
    RunHooks hooks;
    hooks.on_record = [&](const IterationRecord& r) {
        history.append(r);
        print_record(r);
        if (r.bracket_exhausted && r.volume > inst.cfg.volfrac + 1e-4)
            std::fprintf(stderr,
                         "warning: iteration %d ended above the volume target (%.6f > %.6f)\n",
                         r.loop, r.volume, inst.cfg.volfrac);
    };
    if (o.eval_cadence > 0) {
        exact_hist.open(fs::path(o.out) / "exact_history.csv");
        exact_hist << "loop,exact_expected_compliance\n";
        hooks.on_state = [&](int loop, const Field& xPhys, double penal) {
            if (loop % o.eval_cadence != 0) return;
            const QuadratureGrid eval_grid = make_eval_grid(inst);
            const EvaluationReport rep = exact_expected_compliance(prob, xPhys, penal, eval_grid);
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%d,%.10g\n", loop, rep.exact);
            exact_hist << buf << std::flush;
        };
    }
    if (o.debug_csg) {
        csg_dump.open(fs::path(o.out) / "csg_debug.csv");
        csg_dump << "loop,slot,alpha,birth,x_ind\n";
        hooks.on_csg = [&](int loop, const Eigen::VectorXd& alpha, const SampleStore& st,
                           const std::vector<int>&) {
            for (int i = 0; i < st.fill(); ++i)
                csg_dump << loop << "," << i << "," << alpha[i] << "," << st.birth()[i] << ","
                         << st.seq_index()[i] << "\n";
        };
    }

    const RunResult res = run_optimization(prob, inst.cfg, X, grid, hooks);

    export_design(res.xPhys, prob.mesh.nely, prob.mesh.nelx,
                  (fs::path(o.out) / "design.pgm").string());
    write_field_txt(res.xPhys, prob.mesh.nely, prob.mesh.nelx,
                    (fs::path(o.out) / "design.txt").string());

    const QuadratureGrid eval_grid = make_eval_grid(inst);
    EvaluationReport rep = exact_expected_compliance(prob, res.xPhys, res.penal, eval_grid);
    rep.set_nn_estimate(res.history.back().Compl);
    std::remove((fs::path(o.out) / "evaluation.txt").string().c_str());
    write_evaluation(o.out, rep, eval_grid, "exact_expected_compliance");
    if (o.reduced_grid > 0) {
        const QuadratureGrid red =
            reduced_damage_grid(prob.mesh.nelx, prob.mesh.nely, prob.damage, o.reduced_grid);
        const EvaluationReport rrep = exact_expected_compliance(prob, res.xPhys, res.penal, red);
        std::ofstream ev(fs::path(o.out) / "evaluation.txt", std::ios::app);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "reduced_expected_compliance=%.10g\n", rrep.exact);
        ev << buf;
    }
    std::printf("final: J=%.6g  exact=%.6g  gap=%.4g  -> %s\n", rep.nn_estimate, rep.exact,
                rep.relative_gap, o.out.c_str());
    return 0;
}

int cmd_evaluate(CliOptions& o, const std::string& design_path) {
    Instance inst = make_instance(o, true);
    fs::create_directories(o.out);
    const Field design =
        read_field_txt(design_path, inst.prob.mesh.nely, inst.prob.mesh.nelx);
    const QuadratureGrid grid = make_eval_grid(inst);
    const double penal = inst.cfg.penal;
    const EvaluationReport rep = exact_expected_compliance(inst.prob, design, penal, grid);
    std::remove((fs::path(o.out) / "evaluation.txt").string().c_str());
    write_evaluation(o.out, rep, grid, "exact_expected_compliance");
    std::printf("exact expected compliance: %.10g over %zu scenarios\n", rep.exact,
                rep.per_scenario.size());
    return 0;
}

int cmd_ensemble(CliOptions& o, int runs, int cadence, std::vector<double> qs) {
    if (qs.empty()) qs = {0.1, 0.25, 0.5, 0.75, 0.9};
    Instance base = make_instance(o, true);
    fs::create_directories(o.out);

    auto run_one = [&](int run, const std::vector<int>& checkpoints) {
        CliOptions oc = o;
        oc.seed = o.seed + static_cast<std::uint64_t>(run);
        Instance inst = make_instance(oc, false);
        inst.load_model = base.load_model;
        inst.load_type = base.load_type;
        Rng rng(oc.seed);
        ScenarioSequence X;
        QuadratureGrid grid = make_eval_grid(inst);
        if (inst.prob.load_uncertain)
            X = generate_load_sequence(*inst.load_model, inst.load_type, rng,
                                       inst.cfg.maxit * inst.cfg.bsz);
        else
            X = sample_damage_sequence(rng, inst.cfg.maxit * inst.cfg.bsz, inst.prob.damage,
                                       inst.prob.mesh.nelx, inst.prob.mesh.nely);
        grid.y_weight = y_weight_of(inst, oc);
        grid.y_diff = precompute_distances(grid.points, X.cols);

        std::vector<double> series;
        RunHooks hooks;
        std::size_t next = 0;
        hooks.on_state = [&](int loop, const Field& xPhys, double penal) {
            if (next < checkpoints.size() && loop == checkpoints[next]) {
                const QuadratureGrid eg = make_eval_grid(inst);
                series.push_back(
                    exact_expected_compliance(inst.prob, xPhys, penal, eg).exact);
                ++next;
            }
        };
        run_optimization(inst.prob, inst.cfg, X, grid, hooks);
        std::printf("ensemble run %d/%d done\n", run + 1, runs);
        return series;
    };

    const QuantileTable table = ensemble_quantiles(run_one, runs, qs, cadence, base.cfg.maxit);

    std::ofstream out(fs::path(o.out) / "quantiles.csv");
    out << "loop";
    for (double q : qs) out << ",q" << q;
    out << "\n";
    for (std::size_t i = 0; i < table.checkpoints.size(); ++i) {
        out << table.checkpoints[i];
        for (double v : table.values[i]) out << "," << v;
        out << "\n";
    }
    std::ofstream raw(fs::path(o.out) / "ensemble_raw.csv");
    raw << "loop";
    for (int r = 0; r < runs; ++r) raw << ",run" << r;
    raw << "\n";
    for (std::size_t i = 0; i < table.checkpoints.size(); ++i) {
        raw << table.checkpoints[i];
        for (double v : table.raw[i]) raw << "," << v;
        raw << "\n";
    }
    std::printf("quantile table -> %s\n", (fs::path(o.out) / "quantiles.csv").c_str());
    return 0;
}

int cmd_integration_study(CliOptions& o, const std::string& design_path, int steps, int n_seeds) {
    Instance inst = make_instance(o, false);
    if (inst.prob.load_uncertain)
        throw CLI::ValidationError("--preset", "the integration study runs on damage presets");
    fs::create_directories(o.out);
    const Field design = read_field_txt(design_path, inst.prob.mesh.nely, inst.prob.mesh.nelx);
    const QuadratureGrid grid = make_eval_grid(inst);
    std::vector<std::uint64_t> seeds;
    for (int s = 0; s < n_seeds; ++s) seeds.push_back(o.seed + static_cast<std::uint64_t>(s));

    const IntegrationStudyResult res =
        integration_error_study(inst.prob, design, inst.cfg.penal, grid, y_weight_of(inst, o),
                                steps, inst.cfg.maxsmpl, seeds);

    std::ofstream out(fs::path(o.out) / "integration_errors.csv");
    out << "step";
    for (int m = 0; m < 2; ++m)
        for (int s = 0; s < n_seeds; ++s)
            out << "," << (m == 0 ? "plain" : "symmetric") << "_seed" << s;
    out << "\n";
    for (int k = 0; k < steps; ++k) {
        out << (k + 1);
        for (const auto& per_metric : res.err)
            for (const auto& series : per_metric) out << "," << series[static_cast<std::size_t>(k)];
        out << "\n";
    }
    double mean_plain = 0, mean_sym = 0;
    for (int s = 0; s < n_seeds; ++s) {
        mean_plain += res.err[0][static_cast<std::size_t>(s)].back() / n_seeds;
        mean_sym += res.err[1][static_cast<std::size_t>(s)].back() / n_seeds;
    }
    std::printf("c*=%.6g  final relative error: plain=%.4g symmetric=%.4g  -> %s\n", res.exact,
                mean_plain, mean_sym, (fs::path(o.out) / "integration_errors.csv").c_str());
    return 0;
}

int cmd_synth_dataset(std::uint64_t seed, int nelx, const std::string& out) {
    Rng rng(seed);
    const std::vector<int> data = synthesize_load_dataset(rng, nelx);
    if (const fs::path dir = fs::path(out).parent_path(); !dir.empty())
        fs::create_directories(dir);
    write_dataset(data, out);
    std::printf("wrote %zu load cases -> %s\n", data.size(), out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic topology optimization with nearest-neighbor gradient recombination"};
    app.require_subcommand(1);

    CliOptions o;
    std::string design_path;
    int runs = 5, cadence = 100, steps = 1500, n_seeds = 5;
    std::vector<double> quantiles;

    // Problem and optimizer options live on the top-level app so a flat
    // key=value config file covers them for every subcommand; unmatched
    // flags after a subcommand name fall through to here.
    add_problem_options(&app, o);

    CLI::App* run = app.add_subcommand("run", "optimize a design");
    run->fallthrough(true);
    run->add_option("--eval-cadence", o.eval_cadence,
                    "evaluate the exact objective every N iterations (0: final only)");
    run->add_flag("--debug-csg", o.debug_csg, "dump per-iteration weights/births/indices");

    CLI::App* ev = app.add_subcommand("evaluate", "exact expected compliance of a stored design");
    ev->fallthrough(true);
    ev->add_option("--design", design_path, "design file (text densities)")->required();

    CLI::App* en = app.add_subcommand("ensemble", "repeated runs with quantile tracking");
    en->fallthrough(true);
    en->add_option("--runs", runs, "number of optimization runs");
    en->add_option("--cadence", cadence, "exact evaluation cadence (iterations)");
    en->add_option("--quantiles", quantiles, "quantile levels in [0,1]");

    CLI::App* is = app.add_subcommand("integration-study",
                                      "nearest-neighbor integration error on a frozen design");
    is->fallthrough(true);
    is->add_option("--design", design_path, "design file (text densities)")->required();
    is->add_option("--steps", steps, "sampling steps");
    is->add_option("--study-seeds", n_seeds, "number of seeds to average");

    CLI::App* sd = app.add_subcommand("synth-dataset", "write a synthetic load-case dataset");
    sd->fallthrough(true);
    std::string ds_out = "dataset.txt";
    sd->add_option("--out", ds_out, "output file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(o);
        if (ev->parsed()) return cmd_evaluate(o, design_path);
        if (en->parsed()) return cmd_ensemble(o, runs, cadence, quantiles);
        if (is->parsed()) return cmd_integration_study(o, design_path, steps, n_seeds);
        if (sd->parsed()) {
            const int nelx = o.nelx > 0 ? o.nelx : 360;
            return cmd_synth_dataset(o.seed, nelx, ds_out);
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
