#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <array>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace stochtop {

using Vector = Eigen::VectorXd;
using SparseMat = Eigen::SparseMatrix<double>;

/// Regular grid of unit-size Q4 plane-stress elements.
///
/// Nodes are numbered column by column, top to bottom (y fastest), so node
/// (row i, col j) has index j*(nely+1)+i. Element e = j*nely+i follows the
/// same column-major order. All indices are 0-based; the per-element DOF
/// list runs counter-clockwise from the lower-left node.
struct GridMesh {
    int nelx = 0;
    int nely = 0;
    int nEl = 0;
    int nDof = 0;
    /// nEl x 8 element-to-DOF connectivity.
    Eigen::Matrix<int, Eigen::Dynamic, 8, Eigen::RowMajor> cMat;

    int node(int i, int j) const { return j * (nely + 1) + i; }
    int element(int i, int j) const { return j * nely + i; }
};

inline GridMesh build_mesh(int nelx, int nely) {
    if (nelx < 1 || nely < 1)
        throw std::invalid_argument("build_mesh: element counts must be >= 1");
    GridMesh m;
    m.nelx = nelx;
    m.nely = nely;
    m.nEl = nelx * nely;
    m.nDof = 2 * (nelx + 1) * (nely + 1);
    m.cMat.resize(m.nEl, 8);
    for (int j = 0; j < nelx; ++j) {
        for (int i = 0; i < nely; ++i) {
            const int e = m.element(i, j);
            const int ul = m.node(i, j);
            const int ll = ul + 1;
            const int ur = ul + nely + 1;
            const int lr = ul + nely + 2;
            const std::array<int, 4> nodes{ll, lr, ur, ul};
            for (int k = 0; k < 4; ++k) {
                m.cMat(e, 2 * k) = 2 * nodes[k];
                m.cMat(e, 2 * k + 1) = 2 * nodes[k] + 1;
            }
        }
    }
    return m;
}

/// Unit-modulus Q4 plane-stress stiffness. Ke holds the 36 lower-triangle
/// entries in column-major pair order; Ke0 is the full symmetric matrix.
struct ElementStiffness {
    Eigen::Matrix<double, 36, 1> Ke;
    Eigen::Matrix<double, 8, 8> Ke0;
    double nu = 0.3;
};

namespace detail {

// (row, col) of the k-th lower-triangle entry, column-major scan.
inline std::pair<int, int> tril_pair(int k) {
    int col = 0, base = 0;
    while (k >= base + 8 - col) {
        base += 8 - col;
        ++col;
    }
    return {col + (k - base), col};
}

}  // namespace detail

inline ElementStiffness element_stiffness(double nu) {
    if (!(nu > 0.0 && nu < 0.5))
        throw std::invalid_argument("element_stiffness: nu must lie in (0, 0.5)");
    static const double c1[36] = {12, 3,  -6, -3, -6, -3, 0,  3,  12, 3,  0,  -3,
                                  -6, -3, -6, 12, -3, 0,  -3, -6, 3,  12, 3,  -6,
                                  3,  -6, 12, 3,  -6, -3, 12, 3,  0,  12, -3, 12};
    static const double c2[36] = {-4, 3,  -2, 9,  2,  -3, 4,  -9, -4, -9, 4,  -3,
                                  2,  9,  -2, -4, -3, 4,  9,  2,  3,  -4, -9, -2,
                                  3,  2,  -4, 3,  -2, 9,  -4, -9, 4,  -4, -3, -4};
    ElementStiffness ke;
    ke.nu = nu;
    const double scale = 1.0 / (1.0 - nu * nu) / 24.0;
    for (int k = 0; k < 36; ++k) ke.Ke[k] = scale * (c1[k] + nu * c2[k]);
    Eigen::Matrix<double, 8, 8> L = Eigen::Matrix<double, 8, 8>::Zero();
    for (int k = 0; k < 36; ++k) {
        const auto [r, c] = detail::tril_pair(k);
        L(r, c) = ke.Ke[k];
    }
    ke.Ke0 = L + L.transpose() - L.diagonal().asDiagonal().toDenseMatrix();
    return ke;
}

/// Fixed/free DOF partition plus the active/passive element sets.
struct BoundaryConditions {
    std::vector<int> fixed;  // sorted
    std::vector<int> free;   // sorted complement
    std::vector<int> pasS;   // passive solid elements
    std::vector<int> pasV;   // passive void elements
    std::vector<int> act;    // active elements

    static BoundaryConditions make(const GridMesh& mesh, std::vector<int> fixed_dofs,
                                   std::vector<int> passive_solid = {},
                                   std::vector<int> passive_void = {}) {
        BoundaryConditions bc;
        std::sort(fixed_dofs.begin(), fixed_dofs.end());
        fixed_dofs.erase(std::unique(fixed_dofs.begin(), fixed_dofs.end()), fixed_dofs.end());
        bc.fixed = std::move(fixed_dofs);
        bc.free.reserve(mesh.nDof - bc.fixed.size());
        std::size_t p = 0;
        for (int d = 0; d < mesh.nDof; ++d) {
            if (p < bc.fixed.size() && bc.fixed[p] == d)
                ++p;
            else
                bc.free.push_back(d);
        }
        std::sort(passive_solid.begin(), passive_solid.end());
        std::sort(passive_void.begin(), passive_void.end());
        bc.pasS = std::move(passive_solid);
        bc.pasV = std::move(passive_void);
        std::vector<int> pas;
        std::merge(bc.pasS.begin(), bc.pasS.end(), bc.pasV.begin(), bc.pasV.end(),
                   std::back_inserter(pas));
        bc.act.reserve(mesh.nEl - pas.size());
        p = 0;
        for (int e = 0; e < mesh.nEl; ++e) {
            if (p < pas.size() && pas[p] == e)
                ++p;
            else
                bc.act.push_back(e);
        }
        return bc;
    }
};

/// Assemble the global stiffness K = sum_e sK[e] * Ke0 scattered to the
/// element DOFs. Only the lower triangle is stored; consumers must treat
/// the matrix as symmetric (selfadjointView<Lower>).
inline SparseMat assemble_stiffness(const GridMesh& mesh, const ElementStiffness& ke,
                                    const Vector& sK) {
    if (sK.size() != mesh.nEl)
        throw std::invalid_argument("assemble_stiffness: sK size mismatch");
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(mesh.nEl) * 36);
    for (int e = 0; e < mesh.nEl; ++e) {
        for (int k = 0; k < 36; ++k) {
            const auto [a, b] = detail::tril_pair(k);
            const int da = mesh.cMat(e, a);
            const int db = mesh.cMat(e, b);
            trips.emplace_back(std::max(da, db), std::min(da, db), sK[e] * ke.Ke[k]);
        }
    }
    SparseMat K(mesh.nDof, mesh.nDof);
    K.setFromTriplets(trips.begin(), trips.end());
    return K;
}

/// Reusable factorization of K restricted to the free DOFs.
class StateFactorization {
public:
    StateFactorization(const SparseMat& K_lower, const BoundaryConditions& bc, int nDof)
        : nDof_(nDof), free_(bc.free) {
        std::vector<int> dof_to_free(nDof, -1);
        for (std::size_t i = 0; i < free_.size(); ++i) dof_to_free[free_[i]] = static_cast<int>(i);
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(K_lower.nonZeros());
        for (int c = 0; c < K_lower.outerSize(); ++c) {
            for (SparseMat::InnerIterator it(K_lower, c); it; ++it) {
                const int fr = dof_to_free[static_cast<int>(it.row())];
                const int fc = dof_to_free[static_cast<int>(it.col())];
                if (fr >= 0 && fc >= 0) trips.emplace_back(fr, fc, it.value());
            }
        }
        Kff_.resize(static_cast<int>(free_.size()), static_cast<int>(free_.size()));
        Kff_.setFromTriplets(trips.begin(), trips.end());
        ldlt_.compute(Kff_);
        if (ldlt_.info() != Eigen::Success || ldlt_.vectorD().minCoeff() <= 0.0)
            throw std::runtime_error(
                "solve_state: stiffness matrix is not SPD on the free DOFs "
                "(check Emin > 0 and the support definition)");
    }

    /// Solve K U = F for the full-length load vector F; U is zero on fixed
    /// DOFs. One refinement pass keeps the relative residual below 1e-9.
    Vector solve(const Vector& F) const {
        Vector Ff(free_.size());
        for (std::size_t i = 0; i < free_.size(); ++i) Ff[static_cast<Eigen::Index>(i)] = F[free_[i]];
        Vector Uf = ldlt_.solve(Ff);
        const double fnorm = Ff.norm();
        if (fnorm > 0.0) {
            Vector r = Ff - Kff_.selfadjointView<Eigen::Lower>() * Uf;
            if (r.norm() > 1e-9 * fnorm) {
                Uf += ldlt_.solve(r);
                r = Ff - Kff_.selfadjointView<Eigen::Lower>() * Uf;
                if (r.norm() > 1e-9 * fnorm)
                    throw std::runtime_error("solve_state: residual contract violated");
            }
        }
        Vector U = Vector::Zero(nDof_);
        for (std::size_t i = 0; i < free_.size(); ++i) U[free_[i]] = Uf[static_cast<Eigen::Index>(i)];
        return U;
    }

private:
    int nDof_;
    std::vector<int> free_;
    SparseMat Kff_;
    Eigen::SimplicialLDLT<SparseMat, Eigen::Lower> ldlt_;
};

inline Vector solve_state(const SparseMat& K_lower, const Vector& F,
                          const BoundaryConditions& bc) {
    return StateFactorization(K_lower, bc, static_cast<int>(K_lower.rows())).solve(F);
}

inline double compliance(const Vector& F, const Vector& U) {
    if (F.size() != U.size()) throw std::invalid_argument("compliance: length mismatch");
    return F.dot(U);
}

/// Per-element compliance sensitivity dc[e] = dsK[e] * u_e' Ke0 u_e.
/// dsK already carries the SIMP derivative (and its sign) and is zero on
/// passive elements, which masks them here.
inline Vector compliance_element_gradient(const Vector& U, const GridMesh& mesh,
                                          const ElementStiffness& ke, const Vector& dsK) {
    Vector dc(mesh.nEl);
    Eigen::Matrix<double, 8, 1> ue;
    for (int e = 0; e < mesh.nEl; ++e) {
        for (int k = 0; k < 8; ++k) ue[k] = U[mesh.cMat(e, k)];
        dc[e] = dsK[e] * ue.dot(ke.Ke0 * ue);
    }
    return dc;
}

/// Hot path for repeated scenario solves: the free-DOF sparsity pattern and
/// the fill-ordering analysis are computed once, then each call to
/// factorize() only rewrites the numeric values.
class FemWorkspace {
public:
    FemWorkspace(const GridMesh& mesh, const ElementStiffness& ke, const BoundaryConditions& bc)
        : mesh_(&mesh), ke_(&ke), nDof_(mesh.nDof), free_(bc.free) {
        std::vector<int> dof_to_free(nDof_, -1);
        for (std::size_t i = 0; i < free_.size(); ++i) dof_to_free[free_[i]] = static_cast<int>(i);

        const int n = static_cast<int>(free_.size());
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<std::size_t>(mesh.nEl) * 36);
        for (int e = 0; e < mesh.nEl; ++e) {
            for (int k = 0; k < 36; ++k) {
                const auto [a, b] = detail::tril_pair(k);
                const int fa = dof_to_free[mesh.cMat(e, a)];
                const int fb = dof_to_free[mesh.cMat(e, b)];
                if (fa < 0 || fb < 0) continue;
                trips.emplace_back(std::max(fa, fb), std::min(fa, fb), 1.0);
            }
        }
        Kff_.resize(n, n);
        Kff_.setFromTriplets(trips.begin(), trips.end());
        Kff_.makeCompressed();

        // Map each (element, tril-entry) to its slot in the value array.
        value_slot_.assign(static_cast<std::size_t>(mesh.nEl) * 36, -1);
        const int* outer = Kff_.outerIndexPtr();
        const int* inner = Kff_.innerIndexPtr();
        for (int e = 0; e < mesh.nEl; ++e) {
            for (int k = 0; k < 36; ++k) {
                const auto [a, b] = detail::tril_pair(k);
                const int fa = dof_to_free[mesh.cMat(e, a)];
                const int fb = dof_to_free[mesh.cMat(e, b)];
                if (fa < 0 || fb < 0) continue;
                const int row = std::max(fa, fb), col = std::min(fa, fb);
                const int* lo = inner + outer[col];
                const int* hi = inner + outer[col + 1];
                const int* pos = std::lower_bound(lo, hi, row);
                value_slot_[static_cast<std::size_t>(e) * 36 + k] =
                    outer[col] + static_cast<int>(pos - lo);
            }
        }
        ldlt_.analyzePattern(Kff_);
    }

    /// Rebuild the numeric values from the per-element scales and refactorize.
    void factorize(const Vector& sK) {
        double* vals = Kff_.valuePtr();
        std::fill(vals, vals + Kff_.nonZeros(), 0.0);
        const double* kev = ke_->Ke.data();
        for (int e = 0; e < mesh_->nEl; ++e) {
            const double s = sK[e];
            const int* slot = value_slot_.data() + static_cast<std::size_t>(e) * 36;
            for (int k = 0; k < 36; ++k)
                if (slot[k] >= 0) vals[slot[k]] += s * kev[k];
        }
        ldlt_.factorize(Kff_);
        if (ldlt_.info() != Eigen::Success)
            throw std::runtime_error("FemWorkspace: factorization failed (non-SPD system)");
    }

    Vector solve(const Vector& F) const {
        Vector Ff(free_.size());
        for (std::size_t i = 0; i < free_.size(); ++i) Ff[static_cast<Eigen::Index>(i)] = F[free_[i]];
        Vector Uf = ldlt_.solve(Ff);
        Vector U = Vector::Zero(nDof_);
        for (std::size_t i = 0; i < free_.size(); ++i) U[free_[i]] = Uf[static_cast<Eigen::Index>(i)];
        return U;
    }

    const GridMesh& mesh() const { return *mesh_; }

private:
    const GridMesh* mesh_;
    const ElementStiffness* ke_;
    int nDof_;
    std::vector<int> free_;
    SparseMat Kff_;
    std::vector<int> value_slot_;
    Eigen::SimplicialLDLT<SparseMat, Eigen::Lower> ldlt_;
};

}  // namespace stochtop
