#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "stochtop/grid_fem.hpp"
#include "stochtop/scenarios.hpp"

namespace stochtop {

enum class PresetKind { Clamp, Beam, Load, Mbb };

inline PresetKind preset_from_name(const std::string& name) {
    if (name == "clamp") return PresetKind::Clamp;
    if (name == "beam") return PresetKind::Beam;
    if (name == "load") return PresetKind::Load;
    if (name == "mbb") return PresetKind::Mbb;
    throw std::invalid_argument("unknown preset '" + name + "'");
}

/// A fully instantiated problem: mesh, supports, passive sets, the fixed
/// load (when the load is deterministic), and the uncertainty model.
struct Problem {
    PresetKind kind = PresetKind::Clamp;
    GridMesh mesh;
    ElementStiffness ke;
    BoundaryConditions bc;
    Vector F;                   // fixed load; unused when load_uncertain
    bool load_uncertain = false;
    bool has_damage = true;
    DamageModel damage;
    int sym_axis = 0;           // mirror axis of the underlying geometry
};

/// Preset-dependent scalar defaults for the optimizer.
struct PresetDefaults {
    int nelx = 180, nely = 45;
    double volfrac = 0.4, penal = 3.0, rmin = 3.2;
    int ft = 2;
    char ftBC = 'N';
    double eta = 0.5, beta = 2.0, move = 0.01, pnorm = 1.0;
    int maxit = 1500, maxsmpl = 2000;
    double com0 = 100.0;
    double y_weight_scale = 1.0;  // c1 = scale * volfrac * sqrt(nEl)
    double bracket_scale = 1.0;   // multiplier on the bisection upper bound
    int beta_period = 50;         // betaCnt continuation period
    bool symmetrize_dc = false;
    bool symmetric_metric = false;
};

inline PresetDefaults preset_defaults(PresetKind kind) {
    PresetDefaults d;
    switch (kind) {
        case PresetKind::Clamp:
            break;
        case PresetKind::Beam:
            d.nelx = 180;
            d.nely = 60;
            d.move = 2.5e-3;
            d.symmetrize_dc = true;
            d.symmetric_metric = true;
            break;
        case PresetKind::Load:
            d.nelx = 360;
            d.nely = 90;
            d.rmin = 6.4;
            d.y_weight_scale = 5.0;
            d.bracket_scale = 10.0;
            d.beta_period = 75;
            break;
        case PresetKind::Mbb:
            d.nelx = 180;
            d.nely = 60;
            break;
    }
    return d;
}

/// Uniform downward traction on the top edge, total scaled to -1 per node
/// spacing with half weight on the two corner nodes.
inline Vector top_edge_load(const GridMesh& mesh) {
    Vector F = Vector::Zero(mesh.nDof);
    const double f = -1.0 / (mesh.nelx + 1);
    for (int j = 0; j <= mesh.nelx; ++j) F[2 * mesh.node(0, j) + 1] = f;
    F[2 * mesh.node(0, 0) + 1] *= 0.5;
    F[2 * mesh.node(0, mesh.nelx) + 1] *= 0.5;
    return F;
}

inline Problem build_problem(PresetKind kind, int nelx, int nely) {
    Problem p;
    p.kind = kind;
    p.mesh = build_mesh(nelx, nely);
    p.ke = element_stiffness(0.3);
    std::vector<int> fixed;
    switch (kind) {
        case PresetKind::Clamp: {
            // both edges fully clamped, uniform top load, square damage
            for (int i = 0; i <= nely; ++i)
                for (int j : {0, nelx}) {
                    fixed.push_back(2 * p.mesh.node(i, j));
                    fixed.push_back(2 * p.mesh.node(i, j) + 1);
                }
            p.bc = BoundaryConditions::make(p.mesh, std::move(fixed));
            p.F = top_edge_load(p.mesh);
            p.damage = DamageModel{20, 5, 0, 1.0};
            p.sym_axis = 0;
            break;
        }
        case PresetKind::Beam: {
            // cantilever: left edge clamped, point load mid-right; damage
            // kept away from the loaded boundary
            for (int i = 0; i <= nely; ++i) {
                fixed.push_back(2 * p.mesh.node(i, 0));
                fixed.push_back(2 * p.mesh.node(i, 0) + 1);
            }
            p.bc = BoundaryConditions::make(p.mesh, std::move(fixed));
            p.F = Vector::Zero(p.mesh.nDof);
            p.F[2 * p.mesh.node(nely / 2, nelx) + 1] = -1.0;
            p.damage = DamageModel{22, 0, 10, 1.0};
            p.sym_axis = 1;
            break;
        }
        case PresetKind::Load: {
            // lower half of both side edges supported, passive solid top
            // row, unit load at a random top node
            const int half = static_cast<int>(std::lround(nely / 2.0)) - 1;  // 0-based row
            for (int i = half; i <= nely; ++i)
                for (int j : {0, nelx}) {
                    fixed.push_back(2 * p.mesh.node(i, j));
                    fixed.push_back(2 * p.mesh.node(i, j) + 1);
                }
            std::vector<int> pasS;
            for (int j = 0; j < nelx; ++j) pasS.push_back(p.mesh.element(0, j));
            p.bc = BoundaryConditions::make(p.mesh, std::move(fixed), std::move(pasS));
            p.load_uncertain = true;
            p.has_damage = false;
            p.sym_axis = 0;
            break;
        }
        case PresetKind::Mbb: {
            // symmetric half of the MBB beam: roller symmetry plane on the
            // left, vertical support at the bottom-right corner, corner load
            for (int i = 0; i <= nely; ++i) fixed.push_back(2 * p.mesh.node(i, 0));
            fixed.push_back(2 * p.mesh.node(nely, nelx) + 1);
            p.bc = BoundaryConditions::make(p.mesh, std::move(fixed));
            p.F = Vector::Zero(p.mesh.nDof);
            p.F[2 * p.mesh.node(0, 0) + 1] = -1.0;
            p.damage = DamageModel{20, 5, 0, 1.0};
            p.has_damage = false;  // geometry/BC preset; damage opt-in
            p.sym_axis = 0;
            break;
        }
    }
    return p;
}

}  // namespace stochtop
