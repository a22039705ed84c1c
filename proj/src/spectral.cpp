#include "geomgauge/spectral.hpp"

#include <algorithm>
#include <numeric>

namespace geomgauge {

int EigenFrame::block_of(int band) const {
    for (int b = 0; b < n_blocks(); ++b)
        for (int i : blocks[b])
            if (i == band) return b;
    throw Error("spectral", "block_of: band index out of range");
}

double default_gap_tol(const Vec& energies) {
    const double range = energies.maxCoeff() - energies.minCoeff();
    return 1e-8 * std::max(range, 1.0);
}

void gauge_fix_rows(CMat& u0) {
    for (int n = 0; n < u0.rows(); ++n) {
        int jmax = 0;
        double amax = 0.0;
        for (int j = 0; j < u0.cols(); ++j) {
            const double a = std::abs(u0(n, j));
            if (a > amax + 1e-12) { amax = a; jmax = j; }
        }
        const cplx c = u0(n, jmax);
        if (std::abs(c) > 0.0) u0.row(n) *= std::conj(c) / std::abs(c);
    }
}

namespace {

std::vector<std::vector<int>> blocks_from_gaps(const Vec& e, double gap_tol) {
    std::vector<std::vector<int>> blocks;
    std::vector<int> cur{0};
    for (int i = 1; i < e.size(); ++i) {
        if (e[i] - e[i - 1] < gap_tol) {
            cur.push_back(i);
        } else {
            blocks.push_back(cur);
            cur = {i};
        }
    }
    blocks.push_back(cur);
    return blocks;
}

double min_gap_between_blocks(const Vec& e, const std::vector<std::vector<int>>& blocks) {
    double g = std::numeric_limits<double>::infinity();
    for (size_t b = 0; b + 1 < blocks.size(); ++b) {
        const double hi = e[blocks[b].back()];
        const double lo = e[blocks[b + 1].front()];
        g = std::min(g, lo - hi);
    }
    return blocks.size() > 1 ? g : std::numeric_limits<double>::infinity();
}

} // namespace

EigenFrame diagonalize_fiber(const ModelHamiltonian& model, const Vec& K, double t,
                             double gap_tol) {
    const CMat T = model.t_at(K, t);
    const double scale = std::max(1.0, T.cwiseAbs().maxCoeff());
    const double herm = (T - T.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-12 * scale)
        throw NonHermitianInput("spectral", "t_matrix not Hermitian (max |T-T^H| = " +
                                std::to_string(herm) + ") at " + point_str(K, t));

    EigenFrame f;
    f.K = K;
    f.t = t;

    Vec e;
    CMat u0;
    if (model.analytic_u0) {
        CMat U = model.analytic_u0(K, t);
        const double uni = (U * U.adjoint() - CMat::Identity(model.dim, model.dim))
                               .cwiseAbs().maxCoeff();
        if (uni > 1e-10)
            throw Error("spectral", "analytic_u0 not unitary at " + point_str(K, t));
        CMat D = U * T * U.adjoint();
        // sort rows by the real diagonal
        Vec diag = D.diagonal().real();
        std::vector<int> order(model.dim);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return diag[a] < diag[b]; });
        u0.resize(model.dim, model.dim);
        e.resize(model.dim);
        for (int i = 0; i < model.dim; ++i) {
            u0.row(i) = U.row(order[i]);
            e[i] = diag[order[i]];
        }
    } else {
        Eigen::SelfAdjointEigenSolver<CMat> solver(0.5 * (T + T.adjoint()));
        if (solver.info() != Eigen::Success)
            throw Error("spectral", "eigendecomposition failed at " + point_str(K, t));
        e = solver.eigenvalues();
        u0 = solver.eigenvectors().adjoint();
    }
    gauge_fix_rows(u0);

    if (gap_tol <= 0.0) gap_tol = default_gap_tol(e);
    auto merged = blocks_from_gaps(e, gap_tol);

    if (!model.block_spec.empty()) {
        // a computed merge must not straddle a declared block boundary
        std::vector<int> declared(model.dim, -1);
        for (size_t b = 0; b < model.block_spec.size(); ++b)
            for (int i : model.block_spec[b]) declared[i] = static_cast<int>(b);
        for (const auto& blk : merged)
            for (size_t k = 1; k < blk.size(); ++k)
                if (declared[blk[k]] != declared[blk[0]])
                    throw DegenerateUnblocked(
                        "spectral", "near-degeneracy crosses declared block boundary (bands " +
                        std::to_string(blk[0]) + "," + std::to_string(blk[k]) + ") at " +
                        point_str(K, t));
        f.blocks = model.block_spec;
    } else {
        f.blocks = std::move(merged);
    }

    // verify block-diagonality (cheap, catches bad analytic_u0 / block_spec)
    const CMat D = u0 * T * u0.adjoint();
    std::vector<int> blk_of(model.dim);
    for (size_t b = 0; b < f.blocks.size(); ++b)
        for (int i : f.blocks[b]) blk_of[i] = static_cast<int>(b);
    for (int i = 0; i < model.dim; ++i)
        for (int j = 0; j < model.dim; ++j)
            if (blk_of[i] != blk_of[j] && std::abs(D(i, j)) > 1e-10 * scale)
                throw Error("spectral", "u0 does not block-diagonalize T at " + point_str(K, t));

    f.energies = std::move(e);
    f.u0 = std::move(u0);
    f.min_interblock_gap = min_gap_between_blocks(f.energies, f.blocks);
    return f;
}

namespace {

// Greedy assignment maximizing per-pair |overlap|; returns perm[n] = matched
// column of `next` for band n of `prev`, or throws when the best available
// overlap drops below 0.5.
std::vector<int> assign_bands(const CMat& overlap, const Vec& /*unused*/, const Vec& K, double t) {
    const int d = static_cast<int>(overlap.rows());
    std::vector<int> perm(d, -1);
    std::vector<bool> used(d, false);
    // repeatedly take the globally largest unassigned |overlap|
    for (int step = 0; step < d; ++step) {
        int bi = -1, bj = -1;
        double best = -1.0;
        for (int i = 0; i < d; ++i) {
            if (perm[i] >= 0) continue;
            for (int j = 0; j < d; ++j) {
                if (used[j]) continue;
                const double a = std::abs(overlap(i, j));
                if (a > best) { best = a; bi = i; bj = j; }
            }
        }
        if (best < 0.5)
            throw TrackingAmbiguous("spectral",
                                    "band overlap " + std::to_string(best) +
                                    " < 0.5 (step too large or mode conversion) at " +
                                    point_str(K, t));
        perm[bi] = bj;
        used[bj] = true;
    }
    return perm;
}

EigenFrame permute_frame(const EigenFrame& next, const std::vector<int>& perm) {
    EigenFrame out = next;
    for (size_t n = 0; n < perm.size(); ++n) {
        out.u0.row(n) = next.u0.row(perm[n]);
        out.energies[n] = next.energies[perm[n]];
    }
    // remap blocks through the inverse permutation
    std::vector<int> inv(perm.size());
    for (size_t n = 0; n < perm.size(); ++n) inv[perm[n]] = static_cast<int>(n);
    out.blocks = next.blocks;
    for (auto& blk : out.blocks) {
        for (auto& i : blk) i = inv[i];
        std::sort(blk.begin(), blk.end());
    }
    out.permutation = perm;
    return out;
}

} // namespace

EigenFrame track_bands(const EigenFrame& prev, const EigenFrame& next) {
    CMat O = prev.u0 * next.u0.adjoint();  // O(n,m) = <n_prev|m_next>
    auto perm = assign_bands(O, prev.energies, next.K, next.t);
    EigenFrame out = permute_frame(next, perm);

    // re-phase / re-align: scalar bands get a phase, degenerate blocks a
    // block-unitary Procrustes alignment W = M (M^H M)^{-1/2}
    for (const auto& blk : out.blocks) {
        const int bd = static_cast<int>(blk.size());
        if (bd == 1) {
            const int n = blk[0];
            const cplx o = prev.u0.row(n) * out.u0.row(n).adjoint();
            if (std::abs(o) > 0.0) out.u0.row(n) *= o / std::abs(o);
        } else {
            CMat M(bd, bd);  // M(a,b) = <blk[a]_prev | blk[b]_out>
            for (int a = 0; a < bd; ++a)
                for (int b = 0; b < bd; ++b)
                    M(a, b) = (prev.u0.row(blk[a]) * out.u0.row(blk[b]).adjoint())(0, 0);
            Eigen::JacobiSVD<CMat> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
            // polar-unitary factor of M; aligning with it makes the new block
            // overlap Hermitian positive semidefinite (maximal Re trace)
            CMat W = svd.matrixU() * svd.matrixV().adjoint();
            CMat rows(bd, out.dim());
            for (int b = 0; b < bd; ++b) {
                rows.row(b).setZero();
                for (int c = 0; c < bd; ++c)
                    rows.row(b) += W(b, c) * out.u0.row(blk[c]);
            }
            for (int b = 0; b < bd; ++b) out.u0.row(blk[b]) = rows.row(b);
        }
    }
    return out;
}

EigenFrame align_bands(const EigenFrame& reference, const EigenFrame& next) {
    CMat O = reference.u0 * next.u0.adjoint();
    auto perm = assign_bands(O, reference.energies, next.K, next.t);
    return permute_frame(next, perm);
}

EigenFrame rephase(const EigenFrame& frame,
                   const std::function<double(int, const Vec&, double)>& chi) {
    EigenFrame out = frame;
    for (int n = 0; n < frame.dim(); ++n) {
        const double x = chi(n, frame.K, frame.t);
        // row is the bra <n|; |n> -> e^{i chi}|n> means <n| -> e^{-i chi}<n|
        out.u0.row(n) *= std::exp(cplx(0.0, -x));
    }
    return out;
}

} // namespace geomgauge
