#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "stochtop/grid_fem.hpp"
#include "stochtop/rng.hpp"

using namespace stochtop;

namespace {

// Dense scatter-add assembly, the brute-force counterpart of
// assemble_stiffness.
Eigen::MatrixXd dense_assembly(const GridMesh& mesh, const ElementStiffness& ke,
                               const Vector& sK) {
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(mesh.nDof, mesh.nDof);
    for (int e = 0; e < mesh.nEl; ++e)
        for (int a = 0; a < 8; ++a)
            for (int b = 0; b < 8; ++b)
                K(mesh.cMat(e, a), mesh.cMat(e, b)) += sK[e] * ke.Ke0(a, b);
    return K;
}

Eigen::MatrixXd to_dense_symmetric(const SparseMat& lower) {
    Eigen::MatrixXd L = Eigen::MatrixXd(lower);
    Eigen::MatrixXd K = L + L.transpose();
    K.diagonal() -= L.diagonal();
    return K;
}

}  // namespace

TEST_CASE("mesh connectivity pins the reference DOF ordering", "[grid_fem]") {
    // single element: 4 nodes / 8 DOFs, counter-clockwise from lower-left
    const GridMesh m11 = build_mesh(1, 1);
    REQUIRE(m11.nEl == 1);
    REQUIRE(m11.nDof == 8);
    const std::array<int, 8> expected11{2, 3, 6, 7, 4, 5, 0, 1};  // 1-based: 3 4 7 8 5 6 1 2
    for (int k = 0; k < 8; ++k) CHECK(m11.cMat(0, k) == expected11[k]);

    // first element of a one-column, two-row mesh (1-based: 3 4 9 10 7 8 1 2)
    const GridMesh m12 = build_mesh(1, 2);
    const std::array<int, 8> expected12{2, 3, 8, 9, 6, 7, 0, 1};
    for (int k = 0; k < 8; ++k) CHECK(m12.cMat(0, k) == expected12[k]);
}

TEST_CASE("mesh DOF indices are distinct, in range, shared between neighbors", "[grid_fem]") {
    const GridMesh m = build_mesh(2, 1);
    std::vector<int> a(m.cMat.row(0).begin(), m.cMat.row(0).end());
    std::vector<int> b(m.cMat.row(1).begin(), m.cMat.row(1).end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(std::unique(a.begin(), a.end()) == a.end());
    std::vector<int> shared;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(shared));
    CHECK(shared.size() == 4);
    for (int v : a) {
        CHECK(v >= 0);
        CHECK(v < m.nDof);
    }

    CHECK(build_mesh(180, 45).nDof == 16652);
    CHECK_THROWS_AS(build_mesh(0, 3), std::invalid_argument);
    CHECK_THROWS_AS(build_mesh(3, -1), std::invalid_argument);
}

TEST_CASE("element stiffness matches the closed form and is PSD", "[grid_fem]") {
    const ElementStiffness ke = element_stiffness(0.3);
    // first constants are 12 and -4: (12 + 0.3*(-4)) / (24*(1-0.09))
    CHECK(ke.Ke0(0, 0) == Catch::Approx((12.0 + 0.3 * -4.0) / (24.0 * 0.91)).epsilon(1e-14));
    CHECK(ke.Ke0.isApprox(ke.Ke0.transpose(), 1e-15));

    // uniform x-translation of all nodes is a rigid mode
    Eigen::Matrix<double, 8, 1> tx;
    tx << 1, 0, 1, 0, 1, 0, 1, 0;
    CHECK((ke.Ke0 * tx).norm() < 1e-12);

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 8, 8>> es(ke.Ke0);
    int zeros = 0, positives = 0;
    for (int i = 0; i < 8; ++i) {
        if (std::abs(es.eigenvalues()[i]) < 1e-10)
            ++zeros;
        else if (es.eigenvalues()[i] > 0)
            ++positives;
    }
    CHECK(zeros == 3);
    CHECK(positives == 5);

    CHECK_THROWS_AS(element_stiffness(0.5), std::invalid_argument);
    CHECK_THROWS_AS(element_stiffness(-0.1), std::invalid_argument);
}

TEST_CASE("assembly equals the dense scatter-add oracle", "[grid_fem]") {
    const ElementStiffness ke = element_stiffness(0.3);

    SECTION("single element scatters Ke0 onto its DOFs") {
        const GridMesh m = build_mesh(1, 1);
        const SparseMat K = assemble_stiffness(m, ke, Vector::Ones(1));
        const Eigen::MatrixXd Kd = to_dense_symmetric(K);
        CHECK(Kd.isApprox(dense_assembly(m, ke, Vector::Ones(1)), 1e-14));
        for (int a = 0; a < 8; ++a)
            for (int b = 0; b < 8; ++b)
                CHECK(Kd(m.cMat(0, a), m.cMat(0, b)) == Catch::Approx(ke.Ke0(a, b)).margin(1e-15));
    }

    SECTION("random scales on meshes up to 4x4") {
        Rng rng(7);
        for (auto [nx, ny] : {std::pair{2, 2}, std::pair{4, 3}, std::pair{4, 4}}) {
            const GridMesh m = build_mesh(nx, ny);
            Vector sK(m.nEl);
            for (int e = 0; e < m.nEl; ++e) sK[e] = 0.1 + rng.uniform();
            const Eigen::MatrixXd dense = dense_assembly(m, ke, sK);
            CHECK(to_dense_symmetric(assemble_stiffness(m, ke, sK)).isApprox(dense, 1e-12));
        }
    }

    SECTION("assembly is linear in the scales") {
        const GridMesh m = build_mesh(3, 2);
        const Vector ones = Vector::Ones(m.nEl);
        const Eigen::MatrixXd K1 = to_dense_symmetric(assemble_stiffness(m, ke, ones));
        const Eigen::MatrixXd Ks = to_dense_symmetric(assemble_stiffness(m, ke, 2.5 * ones));
        CHECK(Ks.isApprox(2.5 * K1, 1e-14));
    }

    SECTION("dimension mismatch is rejected") {
        const GridMesh m = build_mesh(2, 2);
        CHECK_THROWS(assemble_stiffness(m, ke, Vector::Ones(3)));
    }
}

namespace {

// One-element cantilever: left nodes clamped, unit downward load at a free
// corner node.
struct Cantilever {
    GridMesh mesh = build_mesh(1, 1);
    ElementStiffness ke = element_stiffness(0.3);
    BoundaryConditions bc;
    Vector F;
    Cantilever() {
        std::vector<int> fixed;
        for (int i = 0; i <= 1; ++i) {
            fixed.push_back(2 * mesh.node(i, 0));
            fixed.push_back(2 * mesh.node(i, 0) + 1);
        }
        bc = BoundaryConditions::make(mesh, fixed);
        F = Vector::Zero(mesh.nDof);
        F[2 * mesh.node(0, 1) + 1] = -1.0;
    }
};

}  // namespace

TEST_CASE("solve_state matches a dense direct solve and is linear", "[grid_fem]") {
    Cantilever c;
    const SparseMat K = assemble_stiffness(c.mesh, c.ke, Vector::Ones(1));
    const Vector U = solve_state(K, c.F, c.bc);

    for (int d : c.bc.fixed) CHECK(U[d] == 0.0);

    // dense oracle on the free block
    const Eigen::MatrixXd Kd = to_dense_symmetric(K);
    const int nf = static_cast<int>(c.bc.free.size());
    Eigen::MatrixXd Kff(nf, nf);
    Vector Ff(nf);
    for (int i = 0; i < nf; ++i) {
        Ff[i] = c.F[c.bc.free[i]];
        for (int j = 0; j < nf; ++j) Kff(i, j) = Kd(c.bc.free[i], c.bc.free[j]);
    }
    const Vector Uf = Kff.ldlt().solve(Ff);
    for (int i = 0; i < nf; ++i) CHECK(U[c.bc.free[i]] == Catch::Approx(Uf[i]).epsilon(1e-10));

    // residual contract
    Vector r = Ff;
    for (int i = 0; i < nf; ++i) r[i] -= Kff.row(i).dot(Uf);
    CHECK(r.norm() <= 1e-9 * Ff.norm());

    SECTION("zero load gives zero displacement") {
        CHECK(solve_state(K, Vector::Zero(c.mesh.nDof), c.bc).norm() == 0.0);
    }
    SECTION("scaled load gives scaled solution") {
        const Vector U3 = solve_state(K, (3.0 * c.F).eval(), c.bc);
        CHECK(U3.isApprox(3.0 * U, 1e-12));
    }
    SECTION("unsupported structure is reported") {
        BoundaryConditions none = BoundaryConditions::make(c.mesh, {});
        CHECK_THROWS_AS(solve_state(K, c.F, none), std::runtime_error);
    }
}

TEST_CASE("compliance is F'U and positive on a loaded structure", "[grid_fem]") {
    Cantilever c;
    const SparseMat K = assemble_stiffness(c.mesh, c.ke, Vector::Ones(1));
    const Vector U = solve_state(K, c.F, c.bc);
    const double comp = compliance(c.F, U);
    CHECK(comp > 0.0);
    CHECK(compliance(Vector::Zero(8), Vector::Ones(8)) == 0.0);
    // F'U == U'KU for the solved state
    const Eigen::MatrixXd Kd = to_dense_symmetric(K);
    CHECK(comp == Catch::Approx(U.dot(Kd * U)).epsilon(1e-8));
    CHECK_THROWS(compliance(Vector::Zero(3), Vector::Zero(4)));
}

TEST_CASE("element compliance gradient matches finite differences", "[grid_fem]") {
    // small mesh, modified-SIMP scales, FD through assembly and solve
    const GridMesh mesh = build_mesh(3, 2);
    const ElementStiffness ke = element_stiffness(0.3);
    std::vector<int> fixed;
    for (int i = 0; i <= mesh.nely; ++i) {
        fixed.push_back(2 * mesh.node(i, 0));
        fixed.push_back(2 * mesh.node(i, 0) + 1);
    }
    const BoundaryConditions bc = BoundaryConditions::make(mesh, fixed);
    Vector F = Vector::Zero(mesh.nDof);
    F[2 * mesh.node(0, mesh.nelx) + 1] = -1.0;

    const double E0 = 1.0, Emin = 1e-9, penal = 3.0;
    Rng rng(11);
    Vector xhat(mesh.nEl);
    for (int e = 0; e < mesh.nEl; ++e) xhat[e] = 0.3 + 0.6 * rng.uniform();

    auto comp_of = [&](const Vector& xh) {
        Vector sK(mesh.nEl);
        for (int e = 0; e < mesh.nEl; ++e) sK[e] = Emin + std::pow(xh[e], penal) * (E0 - Emin);
        return compliance(F, solve_state(assemble_stiffness(mesh, ke, sK), F, bc));
    };

    Vector sK(mesh.nEl), dsK(mesh.nEl);
    for (int e = 0; e < mesh.nEl; ++e) {
        sK[e] = Emin + std::pow(xhat[e], penal) * (E0 - Emin);
        dsK[e] = -penal * (E0 - Emin) * std::pow(xhat[e], penal - 1.0);
    }
    const Vector U = solve_state(assemble_stiffness(mesh, ke, sK), F, bc);
    const Vector dc = compliance_element_gradient(U, mesh, ke, dsK);

    for (int e = 0; e < mesh.nEl; ++e) CHECK(dc[e] <= 0.0);
    CHECK(compliance_element_gradient(Vector::Zero(mesh.nDof), mesh, ke, dsK).norm() == 0.0);

    const double h = 1e-6;
    for (int e = 0; e < mesh.nEl; ++e) {
        Vector xp = xhat, xm = xhat;
        xp[e] += h;
        xm[e] -= h;
        const double fd = (comp_of(xp) - comp_of(xm)) / (2 * h);
        CHECK(dc[e] == Catch::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("workspace factorization path agrees with the one-shot solver", "[grid_fem]") {
    const GridMesh mesh = build_mesh(5, 4);
    const ElementStiffness ke = element_stiffness(0.3);
    std::vector<int> fixed;
    for (int i = 0; i <= mesh.nely; ++i) {
        fixed.push_back(2 * mesh.node(i, 0));
        fixed.push_back(2 * mesh.node(i, 0) + 1);
    }
    const BoundaryConditions bc = BoundaryConditions::make(mesh, fixed);
    Vector F = Vector::Zero(mesh.nDof);
    F[2 * mesh.node(0, mesh.nelx) + 1] = -1.0;

    Rng rng(3);
    FemWorkspace ws(mesh, ke, bc);
    for (int trial = 0; trial < 3; ++trial) {
        Vector sK(mesh.nEl);
        for (int e = 0; e < mesh.nEl; ++e) sK[e] = 1e-9 + rng.uniform();
        ws.factorize(sK);
        const Vector U = ws.solve(F);
        const Vector Uref = solve_state(assemble_stiffness(mesh, ke, sK), F, bc);
        CHECK((U - Uref).lpNorm<Eigen::Infinity>() < 1e-10 * Uref.lpNorm<Eigen::Infinity>());
    }
}
