#include <catch2/catch_amalgamated.hpp>

#include "stochtop/field_ops.hpp"
#include "stochtop/grid_fem.hpp"
#include "stochtop/rng.hpp"

using namespace stochtop;

namespace {

// O(m^2) filter oracle: explicit double sum over all (element, neighbor)
// pairs of the padded domain. With zero padding this is exactly the
// textbook sum over H_{e,i}.
Field brute_force_filter(const Field& x, double rmin, int nely, int nelx, PadMode pad) {
    const int R = static_cast<int>(std::ceil(rmin)) - 1;
    Field out(x.size());
    for (int c = 0; c < nelx; ++c)
        for (int r = 0; r < nely; ++r) {
            double num = 0.0, den = 0.0;
            for (int cc = c - R; cc <= c + R; ++cc)
                for (int rr = r - R; rr <= r + R; ++rr) {
                    const double w =
                        rmin - std::sqrt(double(rr - r) * (rr - r) + double(cc - c) * (cc - c));
                    if (w <= 0.0) continue;
                    if (pad == PadMode::Symmetric) {
                        int ri = rr, ci = cc;
                        while (ri < 0 || ri >= nely) ri = ri < 0 ? -1 - ri : 2 * nely - 1 - ri;
                        while (ci < 0 || ci >= nelx) ci = ci < 0 ? -1 - ci : 2 * nelx - 1 - ci;
                        num += w * x[ci * nely + ri];
                        den += w;
                    } else {
                        if (rr >= 0 && rr < nely && cc >= 0 && cc < nelx) {
                            num += w * x[cc * nely + rr];
                            den += w;
                        }
                    }
                }
            out[c * nely + r] = num / den;
        }
    return out;
}

Field random_field(Rng& rng, int n, double lo = 0.0, double hi = 1.0) {
    Field x(n);
    for (int i = 0; i < n; ++i) x[i] = lo + (hi - lo) * rng.uniform();
    return x;
}

}  // namespace

TEST_CASE("filter matches the explicit double-sum oracle", "[field_ops]") {
    Rng rng(42);
    const int nely = 5, nelx = 5;
    const Field x = random_field(rng, nely * nelx);
    for (PadMode pad : {PadMode::Zero, PadMode::Symmetric}) {
        const FilterKernel k = make_filter_kernel(2.5, nely, nelx, pad);
        const Field got = apply_filter(x, k);
        const Field want = brute_force_filter(x, 2.5, nely, nelx, pad);
        CHECK((got - want).abs().maxCoeff() < 1e-13);
        CHECK(got.minCoeff() >= 0.0);
        CHECK(got.maxCoeff() <= 1.0 + 1e-15);
    }
}

TEST_CASE("filter preserves constants under reflective padding", "[field_ops]") {
    const int nely = 6, nelx = 9;
    const FilterKernel k = make_filter_kernel(3.2, nely, nelx, PadMode::Symmetric);
    const Field c = Field::Constant(nely * nelx, 0.37);
    CHECK((apply_filter(c, k) - 0.37).abs().maxCoeff() < 1e-14);
}

TEST_CASE("filter with radius <= 1 is the identity", "[field_ops]") {
    Rng rng(1);
    const Field x = random_field(rng, 12);
    const FilterKernel k = make_filter_kernel(1.0, 3, 4, PadMode::Symmetric);
    CHECK((apply_filter(x, k) - x).abs().maxCoeff() < 1e-15);
}

TEST_CASE("filter is linear", "[field_ops]") {
    Rng rng(5);
    const int nely = 4, nelx = 7;
    const FilterKernel k = make_filter_kernel(2.0, nely, nelx, PadMode::Zero);
    const Field a = random_field(rng, nely * nelx), b = random_field(rng, nely * nelx);
    const Field lhs = apply_filter((1.7 * a + 0.4 * b).eval(), k);
    const Field rhs = 1.7 * apply_filter(a, k) + 0.4 * apply_filter(b, k);
    CHECK((lhs - rhs).abs().maxCoeff() < 1e-13);
}

TEST_CASE("projection endpoints, symmetry, monotonicity, small-beta limit", "[field_ops]") {
    Field ends(2);
    ends << 0.0, 1.0;
    for (double beta : {0.5, 2.0, 16.0}) {
        const Field p = project(ends, 0.4, beta);
        CHECK(p[0] == Catch::Approx(0.0).margin(1e-15));
        CHECK(p[1] == Catch::Approx(1.0).epsilon(1e-15));
    }

    Field half(1);
    half << 0.5;
    CHECK(project(half, 0.5, 7.3)[0] == Catch::Approx(0.5).epsilon(1e-14));

    Rng rng(9);
    const Field x1 = random_field(rng, 50);
    Field x2 = x1;
    for (int i = 0; i < 50; ++i) x2[i] = std::min(1.0, x2[i] + rng.uniform() * 0.2);
    const Field p1 = project(x1, 0.5, 3.0), p2 = project(x2, 0.5, 3.0);
    CHECK(((p2 - p1) >= -1e-15).all());

    const Field x = random_field(rng, 40);
    CHECK((project(x, 0.5, 1e-4) - x).abs().maxCoeff() < 1e-6);
    CHECK((project(x, 0.5, 0.0) - x).abs().maxCoeff() == 0.0);
}

TEST_CASE("projection derivative matches finite differences", "[field_ops]") {
    Rng rng(13);
    const Field x = random_field(rng, 60);
    for (double beta : {0.7, 2.0, 8.0}) {
        const double eta = 0.45;
        const Field d = project_derivative(x, eta, beta);
        CHECK((d > 0.0).all());
        const double h = 1e-6;
        const Field fd =
            (project((x + h).eval(), eta, beta) - project((x - h).eval(), eta, beta)) / (2 * h);
        CHECK(((d - fd) / fd).abs().maxCoeff() < 1e-6);
    }
    // beta = 0 limit is the identity derivative
    const Field d0 = project_derivative(random_field(rng, 5), 0.5, 0.0);
    CHECK((d0 - 1.0).abs().maxCoeff() == 0.0);
    // steepest at the threshold
    Field probe(3);
    probe << 0.3, 0.5, 0.7;
    const Field dp = project_derivative(probe, 0.5, 4.0);
    CHECK(dp[1] > dp[0]);
    CHECK(dp[1] > dp[2]);
}

TEST_CASE("eta derivative matches finite differences in eta", "[field_ops]") {
    Rng rng(17);
    const Field x = random_field(rng, 30, 0.05, 0.95);
    const double beta = 3.0, eta = 0.55, h = 1e-6;
    const Field d = eta_derivative(x, eta, beta);
    const Field fd = (project(x, eta + h, beta) - project(x, eta - h, beta)) / (2 * h);
    CHECK(((d - fd) / fd).abs().maxCoeff() < 1e-5);
}

TEST_CASE("volume-preserving eta hits the target volume", "[field_ops]") {
    Rng rng(23);
    const double beta = 4.0;

    SECTION("random field") {
        const Field x = random_field(rng, 200);
        const double volfrac = 0.4;
        const EtaResult r = volume_preserving_eta(x, 0.5, beta, volfrac);
        REQUIRE(r.converged);
        CHECK(std::abs(project(x, r.eta, beta).mean() - volfrac) <= 1e-6);
    }
    SECTION("already on target: zero iterations, eta unchanged") {
        const Field x = random_field(rng, 100);
        const double target = project(x, 0.5, beta).mean();
        const EtaResult r = volume_preserving_eta(x, 0.5, beta, target);
        CHECK(r.iterations == 0);
        CHECK(r.eta == 0.5);
    }
    SECTION("uniform field at the threshold is a fixed point") {
        const Field x = Field::Constant(64, 0.5);
        const EtaResult r = volume_preserving_eta(x, 0.5, beta, 0.5);
        CHECK(r.eta == Catch::Approx(0.5).margin(1e-9));
    }
}

TEST_CASE("SIMP interpolation and derivative", "[field_ops]") {
    const SimpParams simp{1.0, 1e-9, 3.0};
    std::vector<int> act{0, 1, 2, 3};
    Field x(4);
    x << 0.0, 1.0, 0.5, 0.25;
    Field sK, dsK;
    simp_interpolate(x, simp, act, sK, dsK);
    CHECK(sK[0] == Catch::Approx(simp.Emin).epsilon(1e-15));
    CHECK(sK[1] == Catch::Approx(simp.E0).epsilon(1e-15));

    // FD of sK: dsK = -d(sK)/dx
    const double h = 1e-7;
    Field sp, sm, dummy;
    simp_interpolate((x + h).eval(), simp, act, sp, dummy);
    simp_interpolate((x - h).eval(), simp, act, sm, dummy);
    for (int e = 1; e < 4; ++e) {
        const double fd = (sp[e] - sm[e]) / (2 * h);
        CHECK(-dsK[e] == Catch::Approx(fd).epsilon(1e-7));
    }

    // passive elements carry no derivative
    Field sK2, dsK2;
    simp_interpolate(x, simp, {1, 3}, sK2, dsK2);
    CHECK(dsK2[0] == 0.0);
    CHECK(dsK2[2] == 0.0);
}

namespace {

// Scalar objective of the full ft=2 chain on a small clamped mesh:
// filter -> project -> SIMP -> FEM -> compliance.
struct ChainProblem {
    GridMesh mesh;
    ElementStiffness ke = element_stiffness(0.3);
    BoundaryConditions bc;
    Vector F;
    FilterKernel kernel;
    double eta = 0.5, beta = 2.0;
    SimpParams simp{1.0, 1e-9, 3.0};

    ChainProblem(int nelx, int nely, double rmin)
        : mesh(build_mesh(nelx, nely)),
          kernel(make_filter_kernel(rmin, nely, nelx, PadMode::Symmetric)) {
        std::vector<int> fixed;
        for (int i = 0; i <= nely; ++i) {
            fixed.push_back(2 * mesh.node(i, 0));
            fixed.push_back(2 * mesh.node(i, 0) + 1);
        }
        bc = BoundaryConditions::make(mesh, fixed);
        F = Vector::Zero(mesh.nDof);
        F[2 * mesh.node(0, nelx) + 1] = -1.0;
    }

    double objective(const Field& x) const {
        const Field xT = apply_filter(x, kernel);
        const Field xP = project(xT, eta, beta);
        Field sK, dsK;
        simp_interpolate(xP, simp, bc.act, sK, dsK);
        const Vector U = solve_state(assemble_stiffness(mesh, ke, sK.matrix()), F, bc);
        return compliance(F, U);
    }

    Field gradient(const Field& x) const {
        const Field xT = apply_filter(x, kernel);
        const Field xP = project(xT, eta, beta);
        Field sK, dsK;
        simp_interpolate(xP, simp, bc.act, sK, dsK);
        const Vector U = solve_state(assemble_stiffness(mesh, ke, sK.matrix()), F, bc);
        Field dc = compliance_element_gradient(U, mesh, ke, dsK).array();
        const Field dHs = kernel.Hs / project_derivative(xT, eta, beta);
        return backfilter(dc, kernel, dHs);
    }
};

}  // namespace

TEST_CASE("full chain sensitivity matches finite differences", "[field_ops]") {
    ChainProblem p(6, 4, 1.8);
    Rng rng(31);
    Field x = random_field(rng, p.mesh.nEl, 0.2, 0.8);
    const Field dc = p.gradient(x);
    const double h = 1e-6;
    double max_rel = 0.0;
    for (int e = 0; e < p.mesh.nEl; ++e) {
        Field xp = x, xm = x;
        xp[e] += h;
        xm[e] -= h;
        const double fd = (p.objective(xp) - p.objective(xm)) / (2 * h);
        max_rel = std::max(max_rel, std::abs(fd - dc[e]) / std::abs(dc[e]));
    }
    CHECK(max_rel < 1e-5);
}

TEST_CASE("backfilter with plain filtering keeps a uniform field uniform", "[field_ops]") {
    const int nely = 5, nelx = 8;
    const FilterKernel k = make_filter_kernel(2.4, nely, nelx, PadMode::Symmetric);
    const Field d = Field::Constant(nely * nelx, 3.0);
    const Field out = backfilter(d, k, k.Hs);  // ft=1: dHs == Hs
    CHECK((out - out[0]).abs().maxCoeff() < 1e-12);
}

TEST_CASE("backfilter with identity kernel reduces to the projection factor", "[field_ops]") {
    Rng rng(37);
    const int n = 12;
    const FilterKernel k = make_filter_kernel(1.0, 3, 4, PadMode::Symmetric);
    const Field xT = random_field(rng, n);
    const Field d = random_field(rng, n, -1.0, 1.0);
    const Field dHs = k.Hs / project_derivative(xT, 0.5, 2.0);
    const Field expected = d * project_derivative(xT, 0.5, 2.0);
    CHECK((backfilter(d, k, dHs) - expected).abs().maxCoeff() < 1e-13);
}
