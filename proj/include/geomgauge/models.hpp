// models.hpp — ready-made Hamiltonian families: driven spin, Dirac particle,
// two-band Bloch electron, slow-fast (Born-Oppenheimer) toys, and a
// constructed twist model with time-dependent curvature. Each ships analytic
// derivatives and, where available, closed-form reference quantities.

#pragma once

#include "geomgauge/core.hpp"

namespace geomgauge {

// Pauli and Dirac matrices (standard representation, beta = diag(1,1,-1,-1)).
CMat pauli(int i);              // i = 0 -> identity, 1..3 -> sigma_x,y,z
CMat dirac_alpha(int i);        // i = 1..3
CMat dirac_beta();
CMat dirac_sigma(int i);        // Sigma_i = diag(sigma_i, sigma_i)

// ------------------------------- spin ---------------------------------------
// H = B(t) . sigma. Two levels, eps = -|B|, +|B| (ascending band order).
struct SpinConfig {
    std::function<Vec(double)> b_field;  // t -> 3-vector B(t)
    std::function<Vec(double)> b_dot;    // optional analytic dB/dt
    bool use_analytic_u0 = false;        // (n.sigma + sigma_z)/sqrt(2(1+nz))
};

ModelHamiltonian make_spin(const SpinConfig& cfg);

// Euler-angle drive: theta const, phi = omega t, |B| = b0.
SpinConfig spin_uniform_drive(double theta, double omega, double b0);

// Paper-gauge band sign: +1 for the upper (+|B|) band, -1 for the lower.
inline int spin_band_sign(int band) { return band == 1 ? +1 : -1; }

// Closed forms (Euler-angle drive):
//   a0  : band_sign * (1 - cos theta) * omega / 2
//   M00 : -band_sign * (sin^2 theta phidot^2 + thetadot^2) / (8 |B|)   [paper form]
//   cycle Berry phase: band_sign * pi (1 - cos theta)
double spin_a0_closed(int band_sign, double theta, double omega);
double spin_m_paper_closed(int band_sign, double theta, double phidot, double thetadot, double b);
double spin_berry_cycle_closed(int band_sign, double theta);
// Fidelity display for theta const, phi = omega t, B = hbar omega0:
//   1 - (omega^2 sin^2 theta / 4 omega0^2) sin^2((omega0 - omega) t)
double spin_fidelity_closed(double t, double theta, double omega, double omega0);

// Spin over the parameter sphere: K = (theta, phi), T = b0 n(K).sigma.
ModelHamiltonian make_spin_sphere(double b0);

// ------------------------------- Dirac --------------------------------------
// H = alpha.p + beta m + V(R), c = 1. Blocks {0,1} (-E) and {2,3} (+E).
struct DiracConfig {
    double mass = 1.0;
    // V = -force.R when force is nonzero; else the softened Coulomb
    // V = -coulomb_strength / sqrt(R^2 + coulomb_soft^2) when strength != 0.
    Vec force = Vec::Zero(3);       // e * electric field
    double coulomb_strength = 0.0;
    double coulomb_soft = 1.0;
    bool use_analytic_u0 = true;    // Foldy-Wouthuysen (E+m+beta alpha.p)/sqrt(2E(E+m))
};

ModelHamiltonian make_dirac(const DiracConfig& cfg);

// Closed forms at momentum p (upper/lower symmetric):
//   G = g/(4E^2), M = g/(8E^3), g^{ij} = d^{ij} - p^i p^j / E^2, E = sqrt(p^2+m^2)
//   phi = (hbar^2 / 8E^2) g^{ij} (d_i d_j V + d_i V d_j V / E)
//   darwin = hbar^2 lap V / (8 m^2), grad_sq = hbar^2 (grad V)^2 / (8 m^3)
//   spin_orbit = (hbar / 4 m^2) Sigma . (grad V x p)
struct DiracClosedForms {
    Mat g_metric;   // 3x3
    Mat m_tensor;   // 3x3
    double phi = 0.0;
    double darwin = 0.0;
    double grad_sq = 0.0;
    CMat spin_orbit;  // 4x4
};

DiracClosedForms dirac_closed_forms(const Vec& p, double m, double hbar, const Vec& gradV,
                                    const Mat& hessV);

// ------------------------------- Bloch --------------------------------------
// Two-band tight-binding T(k) = h(k).sigma with V(R) = -force.R.
struct BlochConfig {
    int k_dim = 2;
    std::function<Vec(const Vec& k)> h_vec;              // k -> 3-vector
    std::function<Mat(const Vec& k)> h_jac;              // optional 3 x k_dim Jacobian
    Vec force;                                           // eE, size k_dim
};

ModelHamiltonian make_bloch(const BlochConfig& cfg);

// h(k) = (sin kx, sin ky, delta + cos kx + cos ky), gapped for |delta| != 0,2.
BlochConfig bloch_qwz(double delta, const Vec& force);
// 1-D chain h(k) = (cos k, sin k, delta); gap 2 sqrt(1 + delta^2).
BlochConfig bloch_chain(double delta, double force);

// ----------------------------- BO (slow-fast) -------------------------------
// Physical system H = (b/2) P^2 + B(R) n(theta(R), omega t) . sigma over one
// slow coordinate R. Canonical template: K~ = R, Q~ = -P (so [Q~,K~] = i hbar),
// T(K~,t) = fast Hamiltonian, V(Q~) = (b/2) Q~^2.
struct BOConfig {
    double inv_mass = 1.0;     // b
    double b0 = 1.0;           // fast gap scale |B|
    double tilt = 1.0;         // theta(R) = tilt + twist R
    double twist = 0.3;
    double mod_amp = 0.0;      // |B|(R) = b0 (1 + mod_amp sin(mod_freq R))
    double mod_freq = 1.0;
    double omega = 0.0;        // azimuthal drive phi = omega t (0 = static)
};

ModelHamiltonian make_bo(const BOConfig& cfg);

// canonical state (q~, K~) <-> physical (R, P): R = K~, P = -q~
inline double bo_position(const Vec& k_tilde) { return k_tilde[0]; }
inline double bo_momentum(const Vec& q_tilde) { return -q_tilde[0]; }

// ----------------------------- twist model ----------------------------------
// Two-level model over a 2-D K plane with a time-dependent curvature bump:
// n(K,t) = (sin a cos g, sin a sin g, cos a), g = atan2(K2,K1),
// a(K,t) = amax(t) rho^2/(rho^2 + rho_scale^2), amax(t) = alpha0 + ramp t.
// Curvature flux of band b through the disk of radius r:
//   -band_sign * pi (1 - cos a(r,t)), so the motive force has a closed form.
struct TwistConfig {
    double b0 = 1.0;
    double alpha0 = 0.6;
    double ramp = 0.25;
    double rho_scale = 1.0;
};

ModelHamiltonian make_twist(const TwistConfig& cfg);
double twist_alpha(const TwistConfig& cfg, double rho, double t);
double twist_flux_closed(const TwistConfig& cfg, int band_sign, double radius, double t);
double twist_motive_force_closed(const TwistConfig& cfg, int band_sign, double radius, double t);

} // namespace geomgauge
