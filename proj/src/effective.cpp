#include "geomgauge/effective.hpp"

#include <cmath>

namespace geomgauge {

namespace {

// scalar-band guard: trajectory-level operations work on 1-d blocks
int scalar_block_of(const EigenFrame& f, int band) {
    const int b = f.block_of(band);
    if (f.blocks[b].size() != 1)
        throw Error("effective", "band " + std::to_string(band) +
                    " belongs to a degenerate block; trajectory operations need scalar bands");
    return b;
}

// grad_K eps0 via the Hellmann-Feynman diagonal <n|dT/dK_i|n>
Vec grad_eps0(const ModelHamiltonian& model, const EigenFrame& f, int band) {
    Vec g(model.space_dim);
    for (int i = 0; i < model.space_dim; ++i) {
        const CMat dT = f.u0 * model.t_deriv(f.K, f.t, i + 1) * f.u0.adjoint();
        g[i] = dT(band, band).real();
    }
    return g;
}

// Phi for the block from precomputed tensors, with dV taken at Q
double phi_scalar_from(const GeometricTensors& T, const ModelHamiltonian& model, int block,
                       const Vec& Q, double t) {
    const int d = model.space_dim;
    const Vec gradV = d > 0 ? model.v_grad_at(Q, t) : Vec();
    const Mat hessV = d > 0 ? model.v_hess_at(Q, t) : Mat();
    double phi = T.m[block][0][0](0, 0).real();
    for (int i = 0; i < d; ++i) {
        phi += (T.m[block][0][i + 1] + T.m[block][i + 1][0])(0, 0).real() * gradV[i];
        for (int j = 0; j < d; ++j) {
            phi += 0.5 * T.g[block][i][j](0, 0).real() * hessV(i, j);
            phi += T.m[block][i + 1][j + 1](0, 0).real() * gradV[i] * gradV[j];
        }
    }
    return phi;
}

double phi_at(const ModelHamiltonian& model, int band, const Vec& K, const Vec& Q, double t,
              const NumericsOptions& opts) {
    auto sample = connection_at(model, K, t, opts);
    auto frame = diagonalize_fiber(model, K, t, opts.gap_tol);
    auto T = tensors(model, sample, Q, opts);
    return phi_scalar_from(T, model, frame.block_of(band), Q, t);
}

} // namespace

EffectiveEnergy effective_energy_at_q(const ModelHamiltonian& model, int band, const Vec& K,
                                      const Vec& q_n, double t, double hbar,
                                      const NumericsOptions& opts, int order) {
    auto frame = diagonalize_fiber(model, K, t, opts.gap_tol);
    const int blk = scalar_block_of(frame, band);

    EffectiveEnergy e;
    e.band = band;
    e.hbar = hbar;
    e.pieces.eps0 = frame.energies[band];
    e.pieces.v_at_q = model.v_at(q_n, t);
    if (hbar != 0.0 && order >= 1) {
        auto sample = connection_at(model, K, t, opts);
        e.pieces.hbar_a0 = hbar * sample.a0(blk);
        if (order >= 2) {
            auto T = tensors(model, sample, q_n, opts);
            e.pieces.hbar2_phi = hbar * hbar * phi_scalar_from(T, model, blk, q_n, t);
        }
    }
    e.value = e.pieces.eps0 + e.pieces.v_at_q + e.pieces.hbar_a0 + e.pieces.hbar2_phi;
    return e;
}

EffectiveEnergy effective_energy(const ModelHamiltonian& model, int band, const Vec& K,
                                 const Vec& Q, double t, double hbar,
                                 const NumericsOptions& opts) {
    Vec q_n = Q;
    if (hbar != 0.0 && model.space_dim > 0) {
        auto frame = diagonalize_fiber(model, K, t, opts.gap_tol);
        const int blk = scalar_block_of(frame, band);
        auto sample = connection_at(model, K, t, opts);
        q_n = Q + hbar * sample.a_vec(blk);
    }
    return effective_energy_at_q(model, band, K, q_n, t, hbar, opts);
}

std::vector<CMat> lorentz_term(const std::vector<std::vector<CMat>>& theta_block,
                               const Vec& k_dot, double hbar) {
    const int d = static_cast<int>(theta_block.size());
    std::vector<CMat> L(d);
    for (int i = 0; i < d; ++i) {
        CMat acc = CMat::Zero(theta_block.empty() ? 1 : theta_block[0][0].rows(),
                              theta_block.empty() ? 1 : theta_block[0][0].cols());
        for (int j = 0; j < d; ++j) {
            // 1/2 (kdot x Theta - Theta x kdot) contracted: the two orderings
            // coincide for scalar kdot, leaving Theta^{ij} kdot_j
            acc += 0.5 * (theta_block[i][j] * k_dot[j] + k_dot[j] * theta_block[i][j]);
        }
        L[i] = -hbar * acc;
    }
    return L;
}

EomRhs eom_rhs(const ModelHamiltonian& model, int band, const Vec& q, const Vec& K, double t,
               double hbar, int order, const NumericsOptions& opts) {
    auto frame = diagonalize_fiber(model, K, t, opts.gap_tol);
    const int blk = scalar_block_of(frame, band);
    const int d = model.space_dim;

    EomRhs r;
    r.k_dot = -model.v_grad_at(q, t);
    r.q_dot = grad_eps0(model, frame, band);
    if (order < 1 || hbar == 0.0) return r;

    if (order >= 2) {
        // -hbar^2 dPhi/dq from the q-dependence of Phi through dV
        auto sample = connection_at(model, K, t, opts);
        auto T = tensors(model, sample, q, opts);
        const double hq = opts.fd_k * (1.0 + q.norm());
        for (int i = 0; i < d; ++i) {
            Vec qp = q, qm = q;
            qp[i] += hq;
            qm[i] -= hq;
            const double dphi =
                (phi_scalar_from(T, model, blk, qp, t) - phi_scalar_from(T, model, blk, qm, t)) /
                (2.0 * hq);
            r.k_dot[i] -= hbar * hbar * dphi;
        }
    }

    // electric-type force -hbar E_n
    if (!model.time_independent) {
        auto E = electric_field(model, K, t, opts);
        for (int i = 0; i < d; ++i) r.q_dot[i] -= hbar * E[blk][i](0, 0).real();
    }

    // Lorentz-type force, tensor contraction with the full kdot
    if (d >= 2) {
        auto theta = berry_curvature(model, K, t, opts);
        auto L = lorentz_term(theta.theta[blk], r.k_dot, hbar);
        for (int i = 0; i < d; ++i) r.q_dot[i] += L[i](0, 0).real();
    }

    if (order >= 2) {
        // + hbar^2 grad_K Phi at fixed q
        const double hk = opts.fd_k * (1.0 + K.norm());
        for (int i = 0; i < d; ++i) {
            Vec Kp = K, Km = K;
            Kp[i] += hk;
            Km[i] -= hk;
            const double dphi = (phi_at(model, band, Kp, q, t, opts) -
                                 phi_at(model, band, Km, q, t, opts)) /
                                (2.0 * hk);
            r.q_dot[i] += hbar * hbar * dphi;
        }
    }
    return r;
}

Trajectory integrate_eom(const ModelHamiltonian& model, int band, const Vec& q0, const Vec& k0,
                         const Vec& times, double hbar, int order,
                         const NumericsOptions& opts) {
    const int n = static_cast<int>(times.size());
    const int d = model.space_dim;
    Trajectory tr;
    tr.times = times;
    tr.q = Mat::Zero(n, d);
    tr.k = Mat::Zero(n, d);
    tr.energy = Vec::Zero(n);

    Vec q = q0, k = k0;
    auto record = [&](int i) {
        tr.q.row(i) = q.transpose();
        tr.k.row(i) = k.transpose();
        tr.energy[i] =
            effective_energy_at_q(model, band, k /*K*/, q, times[i], hbar, opts, order).value;
    };

    try {
        record(0);
        for (int i = 0; i + 1 < n; ++i) {
            const double h = times[i + 1] - times[i];
            const double t = times[i];
            auto f = [&](const Vec& qq, const Vec& kk, double tt) {
                return eom_rhs(model, band, qq, kk, tt, hbar, order, opts);
            };
            EomRhs k1 = f(q, k, t);
            EomRhs k2 = f(q + 0.5 * h * k1.q_dot, k + 0.5 * h * k1.k_dot, t + 0.5 * h);
            EomRhs k3 = f(q + 0.5 * h * k2.q_dot, k + 0.5 * h * k2.k_dot, t + 0.5 * h);
            EomRhs k4 = f(q + h * k3.q_dot, k + h * k3.k_dot, t + h);
            q += (h / 6.0) * (k1.q_dot + 2.0 * k2.q_dot + 2.0 * k3.q_dot + k4.q_dot);
            k += (h / 6.0) * (k1.k_dot + 2.0 * k2.k_dot + 2.0 * k3.k_dot + k4.k_dot);
            record(i + 1);
        }
    } catch (const GapTooSmall& err) {
        tr.completed = false;
        tr.diagnostic = err.what();
    }
    return tr;
}

BlochFields bloch_fields(const ModelHamiltonian& model, int band, const Vec& k, const Vec& f,
                         double hbar, const NumericsOptions& opts) {
    const int d = model.space_dim;
    if (d < 2 || d > 3) throw Error("effective", "bloch_fields requires space_dim 2 or 3");

    // grad_k Phi (Q plays no role for a linear V; pass the origin)
    const Vec Q0 = Vec::Zero(d);
    Vec gradPhi(d);
    const double hk = opts.fd_k * (1.0 + k.norm());
    auto frame = diagonalize_fiber(model, k, 0.0, opts.gap_tol);
    const int blk = frame.block_of(band);
    for (int i = 0; i < d; ++i) {
        Vec kp = k, km = k;
        kp[i] += hk;
        km[i] -= hk;
        auto Tp = tensors(model, connection_at(model, kp, 0.0, opts), Q0, opts);
        auto Tm = tensors(model, connection_at(model, km, 0.0, opts), Q0, opts);
        gradPhi[i] = (phi_scalar_from(Tp, model, blk, Q0, 0.0) -
                      phi_scalar_from(Tm, model, blk, Q0, 0.0)) /
                     (2.0 * hk);
    }

    auto embed = [d](const Vec& v) {
        Vec u = Vec::Zero(3);
        for (int i = 0; i < d; ++i) u[i] = v[i];
        return u;
    };
    const Vec f3 = embed(f);
    const Vec g3 = embed(gradPhi);
    const double f2 = f3.squaredNorm();

    BlochFields out;
    out.omega = Vec::Zero(3);
    out.omega[0] = hbar * (f3[1] * g3[2] - f3[2] * g3[1]) / f2;
    out.omega[1] = hbar * (f3[2] * g3[0] - f3[0] * g3[2]) / f2;
    out.omega[2] = hbar * (f3[0] * g3[1] - f3[1] * g3[0]) / f2;
    out.chi = f3.dot(g3) / f2;

    Vec theta3 = Vec::Zero(3);
    auto cf = berry_curvature(model, k, 0.0, opts);
    if (d == 3) {
        theta3 = cf.axial(blk);
    } else {
        theta3[2] = cf.scalar(blk, 0, 1);
    }
    out.omega_total = theta3 + hbar * out.omega;
    return out;
}

} // namespace geomgauge
