// spectral.hpp — gauge-fixed instantaneous eigendecompositions of T(K,t),
// band tracking along paths, degeneracy handling.

#pragma once

#include "geomgauge/core.hpp"

namespace geomgauge {

// Instantaneous eigen-decomposition of T at one (K,t) point.
// Rows of u0 are the (bra) eigenvectors: u0 * T * u0^H is block diagonal,
// with the diagonal equal to `energies`.
//
// Gauge fix: in each row the component of largest magnitude is real and
// nonnegative (ties broken by lowest index). Deterministic and idempotent.
struct EigenFrame {
    Vec K;
    double t = 0.0;
    Vec energies;                          // ascending (before tracking permutes)
    CMat u0;
    std::vector<std::vector<int>> blocks;  // partition of band indices
    double min_interblock_gap = 0.0;
    std::vector<int> permutation;          // tracking record; empty = identity

    int dim() const { return static_cast<int>(energies.size()); }
    int n_blocks() const { return static_cast<int>(blocks.size()); }
    int block_of(int band) const;

    // ket of band n as a column vector
    CVec ket(int band) const { return u0.row(band).adjoint(); }
};

// Default degeneracy threshold: 1e-8 * spectral range (floored at 1e-8).
double default_gap_tol(const Vec& energies);

// Apply the deterministic phase fix to every row of u0 (in place).
void gauge_fix_rows(CMat& u0);

// Diagonalize T(K,t). Bands closer than gap_tol are merged into one block.
// Uses model.analytic_u0 when provided (rows reordered to ascending energy),
// otherwise a Hermitian eigendecomposition; either way the phase fix applies.
// Throws NonHermitianInput, DegenerateUnblocked.
EigenFrame diagonalize_fiber(const ModelHamiltonian& model, const Vec& K, double t,
                             double gap_tol = 0.0);

// Match `next`'s bands to `prev`'s labels: permute rows so that band n in the
// result has maximal overlap with band n of prev, then re-phase (block-wise
// unitary alignment for degenerate blocks) so Re<n_prev|n_next> is maximal.
// Throws TrackingAmbiguous when no assignment reaches overlap 0.5.
EigenFrame track_bands(const EigenFrame& prev, const EigenFrame& next);

// Permutation-only variant used by derivative stencils: band labels are
// aligned but the deterministic per-point gauge is left untouched (the
// parallel-transport re-phasing of track_bands would null the very phase
// derivatives the connection measures).
EigenFrame align_bands(const EigenFrame& reference, const EigenFrame& next);

// Multiply band rows by smooth phase factors exp(i chi_band(K,t)); used by the
// gauge-invariance suite. chi takes (band, K, t).
EigenFrame rephase(const EigenFrame& frame,
                   const std::function<double(int band, const Vec& K, double t)>& chi);

} // namespace geomgauge
