#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace stochtop {

using Field = Eigen::ArrayXd;  // flat element field, column-major (y fastest)

enum class PadMode { Zero, Symmetric };  // 'D' and 'N' filter boundary conditions

inline PadMode pad_mode_from_char(char c) {
    if (c == 'N' || c == 'n') return PadMode::Symmetric;
    if (c == 'D' || c == 'd') return PadMode::Zero;
    throw std::invalid_argument("filter boundary condition must be 'N' or 'D'");
}

/// 2D cone kernel max{0, rmin - dist} sampled on integer offsets
/// -ceil(rmin)+1 ... ceil(rmin)-1, with its all-ones normalization field.
struct FilterKernel {
    double rmin = 1.0;
    PadMode pad = PadMode::Symmetric;
    int radius = 0;  // ceil(rmin) - 1
    int nely = 0, nelx = 0;
    struct Tap {
        int dr, dc;
        double w;
    };
    std::vector<Tap> taps;  // nonzero kernel entries only
    Field Hs;               // correlation of the kernel with an all-ones field
};

namespace detail {

// Half-sample symmetric reflection (edge value duplicated), folding as
// often as needed.
inline int reflect_index(int i, int n) {
    while (i < 0 || i >= n) i = (i < 0) ? -1 - i : 2 * n - 1 - i;
    return i;
}

inline Field correlate(const Field& x, int nely, int nelx, const std::vector<FilterKernel::Tap>& taps,
                       PadMode pad) {
    Field out = Field::Zero(x.size());
    for (int c = 0; c < nelx; ++c) {
        for (int r = 0; r < nely; ++r) {
            double acc = 0.0;
            for (const auto& t : taps) {
                int rr = r + t.dr, cc = c + t.dc;
                if (pad == PadMode::Symmetric) {
                    rr = reflect_index(rr, nely);
                    cc = reflect_index(cc, nelx);
                } else if (rr < 0 || rr >= nely || cc < 0 || cc >= nelx) {
                    continue;
                }
                acc += t.w * x[cc * nely + rr];
            }
            out[c * nely + r] = acc;
        }
    }
    return out;
}

}  // namespace detail

inline FilterKernel make_filter_kernel(double rmin, int nely, int nelx, PadMode pad) {
    FilterKernel k;
    k.rmin = rmin;
    k.pad = pad;
    k.radius = static_cast<int>(std::ceil(rmin)) - 1;
    k.nely = nely;
    k.nelx = nelx;
    for (int dc = -k.radius; dc <= k.radius; ++dc)
        for (int dr = -k.radius; dr <= k.radius; ++dr) {
            const double w = rmin - std::sqrt(double(dr) * dr + double(dc) * dc);
            if (w > 0.0) k.taps.push_back({dr, dc, w});
        }
    k.Hs = detail::correlate(Field::Ones(static_cast<Eigen::Index>(nely) * nelx), nely, nelx,
                             k.taps, pad);
    return k;
}

/// Density filter: correlation with the cone kernel, normalized by Hs.
inline Field apply_filter(const Field& x, const FilterKernel& k) {
    return detail::correlate(x, k.nely, k.nelx, k.taps, k.pad) / k.Hs;
}

/// Relaxed Heaviside projection. beta == 0 is the identity limit.
inline Field project(const Field& xTilde, double eta, double beta) {
    if (beta == 0.0) return xTilde;
    const double denom = std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta));
    return (std::tanh(beta * eta) + (beta * (xTilde - eta)).tanh()) / denom;
}

inline Field project_derivative(const Field& xTilde, double eta, double beta) {
    if (beta == 0.0) return Field::Ones(xTilde.size());
    const double denom = std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta));
    return beta * (1.0 - (beta * (xTilde - eta)).tanh().square()) / denom;
}

/// Derivative of the projection with respect to eta (used by the
/// volume-preserving Newton update).
inline Field eta_derivative(const Field& v, double eta, double beta) {
    const double csch_b = 1.0 / std::sinh(beta);
    return -beta * csch_b * (1.0 / (beta * (v - eta)).cosh().square()) * (v * beta).sinh() *
           ((1.0 - v) * beta).sinh();
}

struct EtaResult {
    double eta = 0.5;
    bool converged = true;
    int iterations = 0;
};

/// Newton iteration on eta until |mean(project(field, eta, beta)) - volfrac|
/// <= 1e-6. On divergence the returned eta is clamped into (1e-6, 1-1e-6)
/// and converged is false.
inline EtaResult volume_preserving_eta(const Field& field, double eta, double beta,
                                       double volfrac, int max_iter = 100) {
    EtaResult res;
    res.eta = eta;
    double f = project(field, res.eta, beta).mean() - volfrac;
    while (std::abs(f) > 1e-6) {
        if (res.iterations++ >= max_iter || !std::isfinite(res.eta)) {
            res.converged = false;
            break;
        }
        res.eta -= f / eta_derivative(field, res.eta, beta).mean();
        f = project(field, res.eta, beta).mean() - volfrac;
    }
    if (!std::isfinite(res.eta) || !std::isfinite(f)) res.converged = false;
    if (!res.converged) {
        if (!std::isfinite(res.eta)) res.eta = 0.5;
        res.eta = std::min(1.0 - 1e-6, std::max(1e-6, res.eta));
    }
    return res;
}

struct SimpParams {
    double E0 = 1.0;
    double Emin = 1e-9;
    double penal = 3.0;
};

/// SIMP interpolation sK = Emin + x^p (E0-Emin) with its derivative on the
/// active set; dsK carries the descent sign and is zero on passives.
inline void simp_interpolate(const Field& xPhys, const SimpParams& simp,
                             const std::vector<int>& act, Field& sK, Field& dsK) {
    sK = simp.Emin + xPhys.pow(simp.penal) * (simp.E0 - simp.Emin);
    dsK = Field::Zero(xPhys.size());
    for (int e : act)
        dsK[e] = -simp.penal * (simp.E0 - simp.Emin) * std::pow(xPhys[e], simp.penal - 1.0);
}

/// Chain-rule back-transformation of an element sensitivity field onto the
/// raw design variables: correlate(dfield ./ dHs, h). dHs is Hs for plain
/// density filtering and Hs ./ project_derivative(xTilde) when a projection
/// is active.
inline Field backfilter(const Field& dfield, const FilterKernel& k, const Field& dHs) {
    return detail::correlate(dfield / dHs, k.nely, k.nelx, k.taps, k.pad);
}

}  // namespace stochtop
