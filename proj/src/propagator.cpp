#include "geomgauge/propagator.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>

namespace geomgauge {

namespace {

// 4th-order cumulative integral of uniformly sampled f (Simpson on interval
// pairs, 3-point Newton-Cotes for the odd half-pairs). f.size() must be odd
// (an even number of intervals).
Vec cumulative_integral(const Vec& f, double h) {
    const int n = static_cast<int>(f.size());
    Vec F = Vec::Zero(n);
    for (int j = 0; j + 2 < n; j += 2) {
        F[j + 1] = F[j] + h / 12.0 * (5.0 * f[j] + 8.0 * f[j + 1] - f[j + 2]);
        F[j + 2] = F[j] + h / 3.0 * (f[j] + 4.0 * f[j + 1] + f[j + 2]);
    }
    if (n >= 2 && (n - 1) % 2 == 1) {
        // odd total interval count: close the last interval with trapezoid
        F[n - 1] = F[n - 2] + 0.5 * h * (f[n - 2] + f[n - 1]);
    }
    return F;
}

CMat herm_exp(const CMat& X, double scale) {
    // exp(-i scale X) for Hermitian X
    Eigen::SelfAdjointEigenSolver<CMat> es(X);
    const Vec& e = es.eigenvalues();
    CVec ph(e.size());
    for (int i = 0; i < e.size(); ++i) ph[i] = std::exp(cplx(0.0, -scale * e[i]));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

double wrap_pi(double x) {
    double y = std::fmod(x + kPi, 2.0 * kPi);
    if (y < 0) y += 2.0 * kPi;
    return y - kPi;
}

} // namespace

SpectralFlow::SpectralFlow(const ModelHamiltonian& model, const Vec& user_times, double hbar,
                           const NumericsOptions& opts, const TimePhase& gauge,
                           const Vec& k_fixed)
    : model_(&model), hbar_(hbar), k_fixed_(k_fixed), user_times_(user_times) {
    const int nu = static_cast<int>(user_times.size());
    if (nu < 2) throw Error("propagator", "time grid needs at least two nodes");
    const double du = user_times[1] - user_times[0];
    for (int i = 0; i + 1 < nu; ++i)
        if (std::abs(user_times[i + 1] - user_times[i] - du) > 1e-9 * std::abs(du))
            throw Error("propagator", "time grid must be uniform");

    if (k_fixed_.size() == 0 && model.space_dim > 0) k_fixed_ = Vec::Zero(model.space_dim);

    // fine grid: an even number of subintervals per user interval
    per_user_ = 2 * std::max(1, opts.time_refine);
    h_ = du / per_user_;
    const int nf = (nu - 1) * per_user_ + 1;
    fine_times_.resize(nf);
    for (int j = 0; j < nf; ++j) fine_times_[j] = user_times[0] + h_ * j;
    fine_times_[nf - 1] = user_times[nu - 1];

    dim_ = model.dim;
    frames_.reserve(nf);
    for (int j = 0; j < nf; ++j) {
        EigenFrame f = diagonalize_fiber(model, k_fixed_, fine_times_[j], opts.gap_tol);
        for (const auto& blk : f.blocks)
            if (blk.size() != 1)
                throw GapTooSmall("propagator",
                                  "degenerate block on the time grid at t=" +
                                      std::to_string(fine_times_[j]) +
                                      "; the D-diagonalization assumes non-degenerate bands");
        if (j > 0) f = align_bands(frames_[j - 1], f);
        if (gauge)
            f = rephase(f, [&](int band, const Vec&, double tt) { return gauge(band, tt); });
        frames_.push_back(std::move(f));
    }

    me_.resize(nf);
    mt_.resize(nf);
    Mat epsv(nf, dim_), mtv(nf, dim_);
    for (int j = 0; j < nf; ++j) {
        const EigenFrame& f = frames_[j];
        const CMat dT = f.u0 * model.t_deriv(k_fixed_, fine_times_[j], 0) * f.u0.adjoint();
        CMat me = CMat::Zero(dim_, dim_);
        for (int m = 0; m < dim_; ++m)
            for (int n = 0; n < dim_; ++n)
                if (m != n) me(m, n) = dT(m, n) / (f.energies[n] - f.energies[m]);
        me_[j] = std::move(me);
        mt_[j] = Vec::Zero(dim_);
        for (int n = 0; n < dim_; ++n) {
            double s = 0.0;
            for (int m = 0; m < dim_; ++m)
                if (m != n) s += std::norm(me_[j](m, n)) / (f.energies[n] - f.energies[m]);
            mt_[j][n] = s;
        }
        for (int n = 0; n < dim_; ++n) epsv(j, n) = f.energies[n];
    }

    dber_ = Mat::Zero(nf - 1, dim_);
    for (int j = 0; j + 1 < nf; ++j)
        for (int n = 0; n < dim_; ++n) {
            const cplx o = (frames_[j].u0.row(n) * frames_[j + 1].u0.row(n).adjoint())(0, 0);
            dber_(j, n) = std::imag(std::log(o));
        }

    dyn_.resize(nf, dim_);
    mc_.resize(nf, dim_);
    ber_ = Mat::Zero(nf, dim_);
    for (int n = 0; n < dim_; ++n) {
        dyn_.col(n) = cumulative_integral(epsv.col(n), h_) / hbar_;
        Vec mcol(nf);
        for (int j = 0; j < nf; ++j) mcol[j] = mt_[j][n];
        mc_.col(n) = hbar_ * cumulative_integral(mcol, h_);
        for (int j = 0; j + 1 < nf; ++j) ber_(j + 1, n) = ber_(j, n) + dber_(j, n);
    }
}

double SpectralFlow::a0(int j, int band) const {
    const int nf = n_fine();
    if (j == 0) return (3.0 * dber_(0, band) - dber_(1, band)) / (2.0 * h_);
    if (j == nf - 1) return (3.0 * dber_(nf - 2, band) - dber_(nf - 3, band)) / (2.0 * h_);
    return (dber_(j - 1, band) + dber_(j, band)) / (2.0 * h_);
}

cplx SpectralFlow::A_mn(int j, int m, int n) const {
    return cplx(0.0, 1.0) * me_[j](m, n) / (frames_[j].energies[n] - frames_[j].energies[m]);
}

cplx SpectralFlow::A_dot(int j, int m, int n) const {
    const int nf = n_fine();
    if (j == 0)
        return (-3.0 * A_mn(0, m, n) + 4.0 * A_mn(1, m, n) - A_mn(2, m, n)) / (2.0 * h_);
    if (j == nf - 1)
        return (3.0 * A_mn(nf - 1, m, n) - 4.0 * A_mn(nf - 2, m, n) + A_mn(nf - 3, m, n)) /
               (2.0 * h_);
    return (A_mn(j + 1, m, n) - A_mn(j - 1, m, n)) / (2.0 * h_);
}

CMat SpectralFlow::hamiltonian(double t) const {
    CMat H = model_->t_at(k_fixed_, t);
    if (model_->v_scalar) {
        const double v = model_->v_at(Vec::Zero(std::max(0, model_->space_dim)), t);
        H += v * CMat::Identity(dim_, dim_);
    }
    return H;
}

// ----------------------------- oracle ---------------------------------------

ExactEvolution exact_propagate(const SpectralFlow& flow, const CVec& psi0) {
    const double hbar = flow.hbar();
    const double c1 = 0.5 - std::sqrt(3.0) / 6.0, c2 = 0.5 + std::sqrt(3.0) / 6.0;
    const double a1 = 0.25 - std::sqrt(3.0) / 6.0, a2 = 0.25 + std::sqrt(3.0) / 6.0;

    auto run = [&](int substeps, std::vector<CVec>* user_states) {
        CVec psi = psi0;
        if (user_states) user_states->push_back(psi);
        for (int j = 0; j + 1 < flow.n_fine(); ++j) {
            const double t0 = flow.fine_time(j);
            const double hs = flow.fine_step() / substeps;
            for (int s = 0; s < substeps; ++s) {
                const double ts = t0 + s * hs;
                const CMat H1 = flow.hamiltonian(ts + c1 * hs);
                const CMat H2 = flow.hamiltonian(ts + c2 * hs);
                psi = herm_exp(a2 * H1 + a1 * H2, hs / hbar) * psi;
                psi = herm_exp(a1 * H1 + a2 * H2, hs / hbar) * psi;
            }
            if (user_states && (j + 1) % (flow.fine_of_user(1)) == 0) user_states->push_back(psi);
        }
        return psi;
    };

    int substeps = 1;
    CVec prev = run(substeps, nullptr);
    const double tol = 1e-10;
    for (int level = 0; level < 10; ++level) {
        CVec cur = run(2 * substeps, nullptr);
        const double diff = (cur - prev).cwiseAbs().maxCoeff();
        substeps *= 2;
        prev = cur;
        if (diff < tol) break;
        if (level == 9)
            throw StepTooCoarse("propagator", "oracle did not converge to " + std::to_string(tol) +
                                " after substep refinement");
    }

    ExactEvolution out;
    out.substeps = substeps;
    out.times = Vec(flow.n_user());
    std::vector<CVec> states;
    run(substeps, &states);
    out.states = std::move(states);
    out.band.resize(flow.n_user());
    double drift = 0.0;
    for (int iu = 0; iu < flow.n_user(); ++iu) {
        out.times[iu] = flow.user_time(iu);
        const int j = flow.fine_of_user(iu);
        BandState bs;
        bs.t = flow.user_time(iu);
        bs.order = -1;
        bs.amplitudes = flow.frame(j).u0 * out.states[iu];
        out.band[iu] = std::move(bs);
        drift = std::max(drift, std::abs(out.states[iu].norm() - 1.0));
    }
    out.norm_drift = drift;
    if (drift > 1e-8)
        throw StepTooCoarse("propagator",
                            "oracle norm drift " + std::to_string(drift) + " exceeds 1e-8");
    return out;
}

ExactEvolution exact_propagate(const ModelHamiltonian& model, const CVec& psi0,
                               const Vec& times, double hbar, const NumericsOptions& opts) {
    SpectralFlow flow(model, times, hbar, opts);
    return exact_propagate(flow, psi0);
}

// ----------------------------- Lambda ---------------------------------------

LambdaN lambda_n(const ModelHamiltonian& model, int band, double t, double hbar,
                 const NumericsOptions& opts) {
    const Vec K0 = Vec::Zero(std::max(0, model.space_dim));
    auto fc = diagonalize_fiber(model, K0, t, opts.gap_tol);
    if (fc.blocks[fc.block_of(band)].size() != 1)
        throw GapTooSmall("propagator", "lambda_n needs a non-degenerate band at t=" +
                          std::to_string(t));
    const double h = opts.fd_t * (1.0 + std::abs(t));
    auto fp = align_bands(fc, diagonalize_fiber(model, K0, t + h, opts.gap_tol));
    auto fm = align_bands(fc, diagonalize_fiber(model, K0, t - h, opts.gap_tol));

    LambdaN out;
    out.eps = fc.energies[band];
    const cplx o = (fm.u0.row(band) * fp.u0.row(band).adjoint())(0, 0);
    out.a0 = std::imag(std::log(o)) / (2.0 * h);

    const CMat dT = fc.u0 * model.t_deriv(K0, t, 0) * fc.u0.adjoint();
    double mt = 0.0;
    for (int m = 0; m < model.dim; ++m) {
        if (m == band) continue;
        const double gap = fc.energies[band] - fc.energies[m];
        mt += std::norm(dT(m, band) / gap) / gap;
    }
    out.m_tilde = mt;
    out.m_paper = -mt;
    out.lambda = out.eps + hbar * out.a0 + hbar * hbar * out.m_tilde;
    return out;
}

// --------------------------- reconstruction ---------------------------------

namespace {

// complete second-order generator at fine node j (see header notes)
CMat u2_matrix(const SpectralFlow& flow, int j) {
    const int d = flow.dim();
    CMat U2 = CMat::Zero(d, d);
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            if (m == n) {
                double s = 0.0;
                for (int k = 0; k < d; ++k)
                    if (k != n) s += std::norm(flow.A_mn(j, k, n));
                U2(n, n) = -0.5 * s;
                continue;
            }
            cplx t_sum = 0.0;
            for (int k = 0; k < d; ++k) {
                if (k == m || k == n) continue;
                t_sum += flow.me(j, m, k) * flow.me(j, k, n) /
                         (flow.eps(j, k) - flow.eps(j, m));
            }
            const cplx t_diag = (flow.a0(j, n) - flow.a0(j, m)) * flow.A_mn(j, m, n);
            const cplx t_dt = cplx(0.0, 1.0) * flow.A_dot(j, m, n);
            U2(m, n) = -(t_sum + t_diag + t_dt) / (flow.eps(j, n) - flow.eps(j, m));
        }
    }
    return U2;
}

} // namespace

std::vector<BandState> reconstruct_state(const SpectralFlow& flow, int band, int order) {
    if (order < 0 || order > 2)
        throw Error("propagator", "reconstruction order must be 0, 1, or 2");
    const int d = flow.dim();
    const int n = band;
    const double hb = flow.hbar();

    const CMat U2_0 = (order >= 2) ? u2_matrix(flow, 0) : CMat();
    std::vector<BandState> out;
    out.reserve(flow.n_user());
    for (int iu = 0; iu < flow.n_user(); ++iu) {
        const int j = flow.fine_of_user(iu);
        CVec P(d);
        for (int l = 0; l < d; ++l) P[l] = std::exp(cplx(0.0, -flow.gamma(j, l)));

        CVec c = CVec::Zero(d);
        c[n] = P[n];
        if (order >= 1) {
            for (int m = 0; m < d; ++m) {
                if (m == n) continue;
                c[m] += hb * (flow.A_mn(0, m, n) * P[m] - flow.A_mn(j, m, n) * P[n]);
            }
        }
        if (order >= 2) {
            const CMat U2_t = u2_matrix(flow, j);
            c[n] += hb * hb * (std::conj(U2_t(n, n)) + U2_0(n, n)) * P[n];
            for (int m = 0; m < d; ++m) {
                if (m == n) continue;
                c[n] -= hb * hb * flow.A_mn(j, n, m) * flow.A_mn(0, m, n) * P[m];
                c[m] += hb * hb * (std::conj(U2_t(n, m)) * P[n] + U2_0(m, n) * P[m]);
                for (int p = 0; p < d; ++p) {
                    if (p == n || p == m) continue;
                    c[m] -= hb * hb * flow.A_mn(j, m, p) * flow.A_mn(0, p, n) * P[p];
                }
            }
        }
        BandState bs;
        bs.t = flow.user_time(iu);
        bs.order = order;
        bs.amplitudes = std::move(c);
        out.push_back(std::move(bs));
    }
    return out;
}

std::vector<BandState> reconstruct_state(const ModelHamiltonian& model, int band,
                                         const Vec& times, double hbar, int order,
                                         const NumericsOptions& opts) {
    SpectralFlow flow(model, times, hbar, opts);
    return reconstruct_state(flow, band, order);
}

// ------------------------------ phases --------------------------------------

PhaseReport phase_report(const SpectralFlow& flow, int band, bool with_oracle) {
    const int last = flow.n_fine() - 1;
    const cplx closure =
        (flow.frame(last).u0.row(band) * flow.frame(0).u0.row(band).adjoint())(0, 0);
    if (std::abs(closure) < 1.0 - 1e-8)
        throw OpenCycle("propagator", "endpoint eigenvector overlap " +
                        std::to_string(std::abs(closure)) + " < 1 - 1e-8");

    PhaseReport r;
    r.dynamical = flow.dyn_acc(last, band);
    r.berry = flow.berry_acc(last, band);
    r.hbar_correction = flow.mcorr_acc(last, band);
    r.total_gamma = r.dynamical + r.berry + r.hbar_correction;
    if (with_oracle) {
        auto ev = exact_propagate(flow, flow.frame(0).ket(band));
        const cplx amp = ev.band.back().amplitudes[band];
        const double gamma_oracle = -std::arg(amp);
        r.aa_phase = wrap_pi(gamma_oracle - r.dynamical);
    }
    return r;
}

PhaseReport phase_report(const ModelHamiltonian& model, int band, const Vec& cycle_times,
                         double hbar, const NumericsOptions& opts) {
    SpectralFlow flow(model, cycle_times, hbar, opts);
    return phase_report(flow, band);
}

// ------------------------------ fidelity ------------------------------------

FidelityResult fidelity(const SpectralFlow& flow, int band, bool with_oracle) {
    const int d = flow.dim();
    const int n = band;
    const double hb = flow.hbar();

    FidelityResult res;
    res.times = Vec(flow.n_user());
    res.formula = Vec(flow.n_user());
    for (int iu = 0; iu < flow.n_user(); ++iu) {
        const int j = flow.fine_of_user(iu);
        res.times[iu] = flow.user_time(iu);
        double f = 1.0;
        for (int k = 0; k < d; ++k) {
            if (k == n) continue;
            const double Dt = flow.eps(j, n) - flow.eps(j, k);
            const double D0 = flow.eps(0, n) - flow.eps(0, k);
            f -= hb * hb *
                 (std::norm(flow.me(j, n, k)) / (Dt * Dt) + std::norm(flow.me(0, n, k)) / (D0 * D0));
            const cplx phase = std::exp(cplx(0.0, -(flow.gamma(j, k) - flow.gamma(j, n))));
            f -= 2.0 * hb * hb *
                 std::real(phase * flow.me(j, n, k) * flow.me(0, k, n)) / (Dt * D0);
        }
        res.formula[iu] = f;
    }
    if (with_oracle) {
        auto ev = exact_propagate(flow, flow.frame(0).ket(band));
        res.oracle = Vec(flow.n_user());
        for (int iu = 0; iu < flow.n_user(); ++iu)
            res.oracle[iu] = std::norm(ev.band[iu].amplitudes[band]);
    }
    return res;
}

FidelityResult fidelity(const ModelHamiltonian& model, int band, const Vec& times, double hbar,
                        const NumericsOptions& opts) {
    SpectralFlow flow(model, times, hbar, opts);
    return fidelity(flow, band);
}

// --------------------------- interference -----------------------------------

cplx interference_term(const SpectralFlow& flow, int band, const CMat& obs) {
    if (flow.dim() != 2)
        throw Error("propagator", "interference_term is defined for two-level systems");
    const int n = band, m = 1 - band;
    const int last = flow.n_fine() - 1;
    const CMat O0 = flow.frame(0).u0 * obs * flow.frame(0).u0.adjoint();
    const cplx phase =
        std::exp(cplx(0.0, -(flow.gamma(last, m) - flow.gamma(last, n))));
    return 2.0 * flow.hbar() * flow.A_mn(0, m, n) * O0(n, m) * phase;
}

// --------------------------- wavepacket oracle ------------------------------

WavepacketRun propagate_wavepacket_1d(const ModelHamiltonian& model, const WavepacketSetup& set,
                                      const Vec& times, double hbar) {
    if (model.space_dim != 1)
        throw Error("propagator", "wavepacket oracle needs a 1-D model (space_dim == 1)");
    const int N = set.grid_points;
    const int d = model.dim;
    const double L = set.box_length;
    const double dx = L / N;

    Vec R(N);
    for (int i = 0; i < N; ++i) R[i] = (i - N / 2) * dx;
    Vec kv(N);
    for (int i = 0; i < N; ++i) {
        const int ii = (i <= N / 2) ? i : i - N;
        kv[i] = 2.0 * kPi * ii / L;
    }

    // band-polarized Gaussian packet
    Eigen::MatrixXcd psi(d, N);
    for (int i = 0; i < N; ++i) {
        Vec Ri(1);
        Ri[0] = R[i];
        auto f = diagonalize_fiber(model, Ri, times[0], 0.0);
        const CVec chi = f.ket(set.band);
        const cplx g = std::exp(cplx(-(R[i] - set.r0) * (R[i] - set.r0) / (4.0 * set.sigma * set.sigma),
                                     set.p0 * R[i] / hbar));
        psi.col(i) = chi * g;
    }
    double nrm = std::sqrt(psi.cwiseAbs2().sum() * dx);
    psi /= nrm;

    Eigen::FFT<double> fft;
    auto kinetic_half = [&](Eigen::MatrixXcd& p, double dt_step) {
        for (int c = 0; c < d; ++c) {
            CVec row = p.row(c).transpose();
            CVec rowk(N);
            fft.fwd(rowk, row);
            for (int i = 0; i < N; ++i)
                rowk[i] *= std::exp(cplx(0.0, -set.quad_coeff * hbar * kv[i] * kv[i] * dt_step / 2.0));
            fft.inv(row, rowk);
            p.row(c) = row.transpose();
        }
    };
    auto potential_half = [&](Eigen::MatrixXcd& p, double t, double dt_step) {
        for (int i = 0; i < N; ++i) {
            Vec Ri(1);
            Ri[0] = R[i];
            const CMat T = model.t_at(Ri, t);
            p.col(i) = herm_exp(T, dt_step / hbar) * CVec(p.col(i));
        }
    };

    WavepacketRun run;
    const int nt = static_cast<int>(times.size());
    run.times = times;
    run.mean_r = Vec(nt);
    run.mean_p = Vec(nt);

    auto record = [&](int it) {
        double norm = psi.cwiseAbs2().sum() * dx;
        double mr = 0.0;
        for (int i = 0; i < N; ++i) mr += R[i] * psi.col(i).squaredNorm() * dx;
        run.mean_r[it] = mr / norm;
        double mp = 0.0, nk = 0.0;
        for (int c = 0; c < d; ++c) {
            CVec row = psi.row(c).transpose();
            CVec rowk(N);
            fft.fwd(rowk, row);
            for (int i = 0; i < N; ++i) {
                mp += hbar * kv[i] * std::norm(rowk[i]);
                nk += std::norm(rowk[i]);
            }
        }
        run.mean_p[it] = mp / nk;
        run.norm_drift = std::max(run.norm_drift, std::abs(norm - 1.0));
    };

    record(0);
    for (int it = 0; it + 1 < nt; ++it) {
        const double dt = (times[it + 1] - times[it]) / set.substeps;
        for (int s = 0; s < set.substeps; ++s) {
            const double t = times[it] + s * dt;
            potential_half(psi, t + 0.5 * dt, 0.5 * dt);
            kinetic_half(psi, dt);
            potential_half(psi, t + 0.5 * dt, 0.5 * dt);
        }
        record(it + 1);
    }
    return run;
}

} // namespace geomgauge
