// geometry.hpp — gauge structure at a phase-space point: connection matrices
// A^mu, band/block Berry connections, curvature, electric-type field, quantum
// metric G, the gap-weighted tensor M, scalar potential Phi, motive force.

#pragma once

#include "geomgauge/core.hpp"
#include "geomgauge/spectral.hpp"

#include <optional>

namespace geomgauge {

// Smooth per-band phase field chi(band, K, t); applied to eigenframes before
// differentiation by the gauge-invariance tests.
using GaugePhase = std::function<double(int band, const Vec& K, double t)>;

// Frames on a central-difference stencil around one point, band-aligned to the
// center. Alignment is permutation-only: the per-point deterministic phase fix
// is the gauge being differentiated.
struct FrameStencil {
    EigenFrame center;
    std::vector<double> steps;        // index mu = 0..space_dim (0 = time)
    std::vector<EigenFrame> plus;     // frame at +step along mu
    std::vector<EigenFrame> minus;
    double gap_tol = 0.0;             // resolved value used when building
};

FrameStencil build_stencil(const ModelHamiltonian& model, const Vec& K, double t,
                           const NumericsOptions& opts = {},
                           const GaugePhase& chi = nullptr,
                           const EigenFrame* reference = nullptr);

// Connection sample at one point.
//   a_full[mu]: Hermitian dim x dim; mu = 0 is A^0 = -i U0 d_t U0^H,
//   mu = i >= 1 is A^i = i U0 d_{K_i} U0^H.
//   a_band[block][mu]: the block-diagonal part (block_dim x block_dim).
// Off-diagonal (inter-block) entries come from the Hellmann-Feynman identity
// <m|d n> = <m|dT|n>/(e_n - e_m); diagonal/intra-block parts from the stencil.
// The two routes are cross-checked where both apply.
struct GaugeFieldSample {
    Vec K;
    double t = 0.0;
    Vec energies;
    std::vector<std::vector<int>> blocks;
    std::vector<CMat> a_full;
    std::vector<std::vector<CMat>> a_band;

    int space_dim() const { return static_cast<int>(a_full.size()) - 1; }
    // scalar Berry connection of a 1-d block, spatial components only
    Vec a_vec(int block) const;
    double a0(int block) const;
};

GaugeFieldSample connection(const ModelHamiltonian& model, const FrameStencil& stencil,
                            const NumericsOptions& opts = {});

// convenience: stencil + connection in one call
GaugeFieldSample connection_at(const ModelHamiltonian& model, const Vec& K, double t,
                               const NumericsOptions& opts = {},
                               const GaugePhase& chi = nullptr);

// Berry curvature Theta^{ij} = d_i a^j - d_j a^i + [a^i, a^j] per block,
// via central differences of connection samples plus the block commutator.
struct CurvatureField {
    Vec K;
    double t = 0.0;
    std::vector<std::vector<int>> blocks;
    // theta[block](i,j) for 1-d blocks collapses to a real scalar; stored as
    // block matrices, antisymmetric in (i,j) exactly by construction.
    std::vector<std::vector<std::vector<CMat>>> theta;

    // axial vector Theta^i = eps_{ijk} Theta^{jk}/2 (space_dim == 3, 1-d block)
    Vec axial(int block) const;
    double scalar(int block, int i, int j) const;  // real part of 1x1 entry
};

CurvatureField berry_curvature(const ModelHamiltonian& model, const Vec& K, double t,
                               const NumericsOptions& opts = {},
                               const GaugePhase& chi = nullptr);

// Electric-type field E_n = -d_t a_n - grad_K a_n^0 per block (spatial comps).
std::vector<std::vector<CMat>> electric_field(const ModelHamiltonian& model, const Vec& K,
                                              double t, const NumericsOptions& opts = {},
                                              const GaugePhase& chi = nullptr);

// Line integral of E_n along a closed path (space_dim-dim), scalar bands.
// path(s) for s in [0,1] must satisfy |path(0)-path(1)| <= 1e-12 (OpenLoop).
double efield_loop_integral(const ModelHamiltonian& model,
                            const std::function<Vec(double)>& path, int band, double t,
                            const NumericsOptions& opts = {});

// Motive force around a circle in a 2-D K plane: xi = -loop integral of E.dK,
// together with the flux-derivative evaluation d/dt int Theta dS computed by
// differencing the curvature flux at t -+ dt. The two agree to quadrature
// tolerance for consistent fields.
struct MotiveForce {
    double line_integral = 0.0;    // xi = -closed-loop integral of E . dK
    double flux_derivative = 0.0;  // d/dt of curvature flux through the disk
};

MotiveForce motive_force(const ModelHamiltonian& model, const Vec& center, double radius,
                         double t, double dt, int band, const NumericsOptions& opts = {});

// Gauge-invariant tensors and the geometric scalar potential.
//   G^{ij} = 1/2 sum_{m not in block} (A^i_{nm} A^j_{mn} + h.c.)
//   M^{mu nu} = 1/2 sum (A^mu_{nm} A^nu_{mn} / (e_m - e_n) + h.c.)
//   Phi = G^{ij}/2 d_i d_j V + M^{ij} d_i V d_j V + (M^{0i} + M^{i0}) d_i V + M^{00}
// For blocks these are block-Hermitian matrices (the 1-d case is scalar).
struct GeometricTensors {
    std::vector<std::vector<int>> blocks;
    std::vector<std::vector<std::vector<CMat>>> g;  // [block][i][j], spatial
    std::vector<std::vector<std::vector<CMat>>> m;  // [block][mu][nu]
    std::vector<CMat> phi;                          // [block]

    Mat g_scalar(int block) const;   // 1-d blocks
    Mat m_scalar(int block) const;   // spatial part
    double m00_scalar(int block) const;
    double phi_scalar(int block) const;
};

GeometricTensors tensors(const ModelHamiltonian& model, const GaugeFieldSample& sample,
                         const Vec& Q, const NumericsOptions& opts = {});

} // namespace geomgauge
