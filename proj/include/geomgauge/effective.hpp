// effective.hpp — order-hbar^2 in-band energy, non-canonical equations of
// motion with the geometric Lorentz and electric forces, RK4 integration,
// and the Bloch-electron field decomposition.

#pragma once

#include "geomgauge/core.hpp"
#include "geomgauge/geometry.hpp"

namespace geomgauge {

// eps_n(K, q_n, t) = eps0_n(K,t) + V(q_n,t) + hbar a_n^0 + hbar^2 Phi_n,
// with q_n = Q + hbar a_n. V is evaluated at the shifted coordinate directly
// (no Taylor expansion), Phi with dV at the supplied coordinate.
struct EffectiveEnergy {
    int band = 0;
    double value = 0.0;
    struct Pieces {
        double eps0 = 0.0;
        double v_at_q = 0.0;
        double hbar_a0 = 0.0;
        double hbar2_phi = 0.0;
    } pieces;
    double hbar = 1.0;
};

// Q is the canonical coordinate; the covariant q_n = Q + hbar a_n(K,t) is
// formed internally (deterministic gauge).
EffectiveEnergy effective_energy(const ModelHamiltonian& model, int band, const Vec& K,
                                 const Vec& Q, double t, double hbar,
                                 const NumericsOptions& opts = {});

// Same assembly with q_n supplied directly (trajectory states store q_n).
// `order` truncates the assembly consistently with the flow that produced the
// state (0: eps0+V, 1: +hbar a0, 2: +hbar^2 Phi).
EffectiveEnergy effective_energy_at_q(const ModelHamiltonian& model, int band, const Vec& K,
                                      const Vec& q_n, double t, double hbar,
                                      const NumericsOptions& opts = {}, int order = 2);

// Symmetrized Lorentz term -(hbar/2)(kdot x Theta - Theta x kdot) in tensor
// form: component i is -hbar * Theta^{ij} kdot_j (matrix-valued for blocks;
// for scalar bands this is the usual -hbar kdot x Theta cross product).
std::vector<CMat> lorentz_term(const std::vector<std::vector<CMat>>& theta_block,
                               const Vec& k_dot, double hbar);

// Right-hand side of the equations of motion at a given order in hbar:
//   order 0: qdot = grad_K eps0,                kdot = -grad V(q)
//   order 1: + geometric Lorentz and electric forces (hbar)
//   order 2: + hbar^2 grad_K Phi on qdot and -hbar^2 dPhi/dq on kdot
// The dPhi/dq force keeps the flow exactly energy conserving for static
// Hamiltonians (it is the q-derivative conjugate of the kept hbar^2 term).
struct EomRhs {
    Vec q_dot;
    Vec k_dot;
};

EomRhs eom_rhs(const ModelHamiltonian& model, int band, const Vec& q, const Vec& K, double t,
               double hbar, int order = 2, const NumericsOptions& opts = {});

// Fixed-step RK4 trajectory over the supplied (uniform) time grid.
// A GapTooSmall encountered mid-trajectory aborts and returns the partial
// trajectory with `completed = false` and the diagnostic message.
struct Trajectory {
    Vec times;
    Mat q;       // row per time
    Mat k;
    Vec energy;  // eps_n along the path
    bool completed = true;
    std::string diagnostic;
};

Trajectory integrate_eom(const ModelHamiltonian& model, int band, const Vec& q0, const Vec& k0,
                         const Vec& times, double hbar, int order = 2,
                         const NumericsOptions& opts = {});

// Bloch decomposition of the hbar^2 velocity corrections under constant force
// f = eE:  omega = hbar f x grad_k Phi / |f|^2,  chi = f . grad_k Phi / |f|^2,
// Omega = Theta + hbar omega.  Vectors are 3-dim (2-D models embed in z).
struct BlochFields {
    Vec omega;        // 3-vector, orthogonal to f
    double chi = 0.0;
    Vec omega_total;  // Theta + hbar omega
};

BlochFields bloch_fields(const ModelHamiltonian& model, int band, const Vec& k, const Vec& f,
                         double hbar, const NumericsOptions& opts = {});

} // namespace geomgauge
