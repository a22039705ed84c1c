#include "geomgauge/geometry.hpp"
#include "geomgauge/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace geomgauge {

namespace {

double resolved_gap_tol(const NumericsOptions& opts, const Vec& energies) {
    return opts.gap_tol > 0.0 ? opts.gap_tol : default_gap_tol(energies);
}

void require_gaps(const EigenFrame& f, double gap_tol) {
    if (f.n_blocks() > 1 && f.min_interblock_gap < gap_tol)
        throw GapTooSmall("geometry", "inter-block gap " + std::to_string(f.min_interblock_gap) +
                          " below gap_tol at " + point_str(f.K, f.t));
}

CMat hermitize(const CMat& A) { return 0.5 * (A + A.adjoint()); }

} // namespace

Vec GaugeFieldSample::a_vec(int block) const {
    const int d = space_dim();
    Vec a(d);
    for (int i = 0; i < d; ++i) a[i] = a_band[block][i + 1](0, 0).real();
    return a;
}

double GaugeFieldSample::a0(int block) const { return a_band[block][0](0, 0).real(); }

FrameStencil build_stencil(const ModelHamiltonian& model, const Vec& K, double t,
                           const NumericsOptions& opts, const GaugePhase& chi,
                           const EigenFrame* reference) {
    FrameStencil st;
    st.gap_tol = opts.gap_tol;
    EigenFrame c = diagonalize_fiber(model, K, t, opts.gap_tol);
    if (reference) c = align_bands(*reference, c);
    st.gap_tol = resolved_gap_tol(opts, c.energies);

    const int nmu = model.space_dim + 1;
    st.steps.resize(nmu);
    st.plus.reserve(nmu);
    st.minus.reserve(nmu);
    for (int mu = 0; mu < nmu; ++mu) {
        double h;
        Vec Kp = K, Km = K;
        double tp = t, tm = t;
        if (mu == 0) {
            h = opts.fd_t * (1.0 + std::abs(t));
            tp += h;
            tm -= h;
        } else {
            h = opts.fd_k * (1.0 + K.norm());
            Kp[mu - 1] += h;
            Km[mu - 1] -= h;
        }
        st.steps[mu] = h;
        st.plus.push_back(align_bands(c, diagonalize_fiber(model, Kp, tp, opts.gap_tol)));
        st.minus.push_back(align_bands(c, diagonalize_fiber(model, Km, tm, opts.gap_tol)));
    }
    if (chi) {
        c = rephase(c, chi);
        for (auto& f : st.plus) f = rephase(f, chi);
        for (auto& f : st.minus) f = rephase(f, chi);
    }
    st.center = std::move(c);
    return st;
}

GaugeFieldSample connection(const ModelHamiltonian& model, const FrameStencil& st,
                            const NumericsOptions& opts) {
    const EigenFrame& c = st.center;
    const double gap_tol = st.gap_tol > 0.0 ? st.gap_tol : resolved_gap_tol(opts, c.energies);
    require_gaps(c, gap_tol);

    const int dim = c.dim();
    const int nmu = model.space_dim + 1;
    std::vector<int> blk_of(dim);
    for (size_t b = 0; b < c.blocks.size(); ++b)
        for (int i : c.blocks[b]) blk_of[i] = static_cast<int>(b);

    GaugeFieldSample s;
    s.K = c.K;
    s.t = c.t;
    s.energies = c.energies;
    s.blocks = c.blocks;
    s.a_full.resize(nmu);

    for (int mu = 0; mu < nmu; ++mu) {
        const double h = st.steps[mu];
        // route (i): stencil derivative of U0^H.  A^i = i U0 dU0^H, A^0 = -i U0 dtU0^H
        const cplx pref = (mu == 0) ? cplx(0.0, -1.0) : cplx(0.0, 1.0);
        CMat A_st = pref * (c.u0 * ((st.plus[mu].u0.adjoint() - st.minus[mu].u0.adjoint()) / (2.0 * h)));
        A_st = hermitize(A_st);

        // route (ii): Hellmann-Feynman for inter-block entries
        const CMat dT = c.u0 * model.t_deriv(c.K, c.t, mu) * c.u0.adjoint();
        CMat A = A_st;
        double max_dev = 0.0;
        for (int mrow = 0; mrow < dim; ++mrow) {
            for (int ncol = 0; ncol < dim; ++ncol) {
                if (blk_of[mrow] == blk_of[ncol]) continue;
                const cplx hf = pref * dT(mrow, ncol) / (c.energies[ncol] - c.energies[mrow]);
                max_dev = std::max(max_dev, std::abs(hf - A_st(mrow, ncol)));
                A(mrow, ncol) = hf;
            }
        }
        const double tol = 1e-6 * std::max(1.0, A.cwiseAbs().maxCoeff());
        if (max_dev > tol)
            throw NumericalFailure("geometry",
                                   "connection routes disagree (max dev " + std::to_string(max_dev) +
                                   ", mu=" + std::to_string(mu) + ") at " + point_str(c.K, c.t));
        s.a_full[mu] = hermitize(A);
    }

    s.a_band.resize(c.n_blocks());
    for (int b = 0; b < c.n_blocks(); ++b) {
        const auto& blk = c.blocks[b];
        const int bd = static_cast<int>(blk.size());
        s.a_band[b].resize(nmu);
        for (int mu = 0; mu < nmu; ++mu) {
            CMat sub(bd, bd);
            for (int p = 0; p < bd; ++p)
                for (int q = 0; q < bd; ++q) sub(p, q) = s.a_full[mu](blk[p], blk[q]);
            s.a_band[b][mu] = sub;
        }
    }
    return s;
}

GaugeFieldSample connection_at(const ModelHamiltonian& model, const Vec& K, double t,
                               const NumericsOptions& opts, const GaugePhase& chi) {
    return connection(model, build_stencil(model, K, t, opts, chi), opts);
}

Vec CurvatureField::axial(int block) const {
    const int d = static_cast<int>(theta[block].size());
    if (d != 3) throw Error("geometry", "axial curvature requires space_dim == 3");
    Vec v(3);
    v[0] = theta[block][1][2](0, 0).real();
    v[1] = theta[block][2][0](0, 0).real();
    v[2] = theta[block][0][1](0, 0).real();
    return v;
}

double CurvatureField::scalar(int block, int i, int j) const {
    return theta[block][i][j](0, 0).real();
}

CurvatureField berry_curvature(const ModelHamiltonian& model, const Vec& K, double t,
                               const NumericsOptions& opts, const GaugePhase& chi) {
    const int d = model.space_dim;
    auto center_stencil = build_stencil(model, K, t, opts, chi);
    auto sc = connection(model, center_stencil, opts);

    CurvatureField out;
    out.K = K;
    out.t = t;
    out.blocks = sc.blocks;
    const int nb = static_cast<int>(sc.blocks.size());

    // connection samples at K +- h e_i, band-aligned to the center frame
    std::vector<GaugeFieldSample> cp(d), cm(d);
    std::vector<double> hstep(d);
    for (int i = 0; i < d; ++i) {
        const double h = opts.fd_k * (1.0 + K.norm());
        hstep[i] = h;
        Vec Kp = K, Km = K;
        Kp[i] += h;
        Km[i] -= h;
        cp[i] = connection(model, build_stencil(model, Kp, t, opts, chi, &center_stencil.center), opts);
        cm[i] = connection(model, build_stencil(model, Km, t, opts, chi, &center_stencil.center), opts);
    }

    out.theta.resize(nb);
    for (int b = 0; b < nb; ++b) {
        const int bd = static_cast<int>(sc.blocks[b].size());
        out.theta[b].assign(d, std::vector<CMat>(d, CMat::Zero(bd, bd)));
        for (int i = 0; i < d; ++i) {
            for (int j = i + 1; j < d; ++j) {
                CMat didaj = (cp[i].a_band[b][j + 1] - cm[i].a_band[b][j + 1]) / (2.0 * hstep[i]);
                CMat djdai = (cp[j].a_band[b][i + 1] - cm[j].a_band[b][i + 1]) / (2.0 * hstep[j]);
                CMat comm = sc.a_band[b][i + 1] * sc.a_band[b][j + 1] -
                            sc.a_band[b][j + 1] * sc.a_band[b][i + 1];
                CMat th = didaj - djdai + comm;
                out.theta[b][i][j] = th;
                out.theta[b][j][i] = -th;
            }
        }
    }
    return out;
}

std::vector<std::vector<CMat>> electric_field(const ModelHamiltonian& model, const Vec& K,
                                              double t, const NumericsOptions& opts,
                                              const GaugePhase& chi) {
    const int d = model.space_dim;
    auto center_stencil = build_stencil(model, K, t, opts, chi);
    auto sc = connection(model, center_stencil, opts);
    const int nb = static_cast<int>(sc.blocks.size());

    const double ht = opts.fd_t * (1.0 + std::abs(t));
    auto tp = connection(model, build_stencil(model, K, t + ht, opts, chi, &center_stencil.center), opts);
    auto tm = connection(model, build_stencil(model, K, t - ht, opts, chi, &center_stencil.center), opts);

    std::vector<std::vector<CMat>> E(nb);
    for (int b = 0; b < nb; ++b) {
        const int bd = static_cast<int>(sc.blocks[b].size());
        E[b].assign(d, CMat::Zero(bd, bd));
    }
    for (int i = 0; i < d; ++i) {
        const double hk = opts.fd_k * (1.0 + K.norm());
        Vec Kp = K, Km = K;
        Kp[i] += hk;
        Km[i] -= hk;
        auto kp = connection(model, build_stencil(model, Kp, t, opts, chi, &center_stencil.center), opts);
        auto km = connection(model, build_stencil(model, Km, t, opts, chi, &center_stencil.center), opts);
        for (int b = 0; b < nb; ++b) {
            CMat dtda = (tp.a_band[b][i + 1] - tm.a_band[b][i + 1]) / (2.0 * ht);
            CMat dka0 = (kp.a_band[b][0] - km.a_band[b][0]) / (2.0 * hk);
            E[b][i] = -dtda - dka0;
        }
    }
    return E;
}

double efield_loop_integral(const ModelHamiltonian& model,
                            const std::function<Vec(double)>& path, int band, double t,
                            const NumericsOptions& opts) {
    if ((path(0.0) - path(1.0)).norm() > 1e-12)
        throw OpenLoop("geometry", "loop endpoints differ by more than 1e-12");
    const double hs = 1e-6;
    auto wrap = [](double sarg) { return sarg - std::floor(sarg); };
    auto integrand = [&](double sarg) {
        const Vec Kp = path(wrap(sarg));
        auto E = electric_field(model, Kp, t, opts);
        auto frame = diagonalize_fiber(model, Kp, t, opts.gap_tol);
        const int b = frame.block_of(band);
        Vec dK = (path(wrap(sarg + hs)) - path(wrap(sarg - hs))) / (2.0 * hs);
        double acc = 0.0;
        for (int i = 0; i < model.space_dim; ++i) acc += E[b][i](0, 0).real() * dK[i];
        return acc;
    };
    return refine_trapezoid_periodic(integrand, 0.0, 1.0, opts.quad_tol, 1 << 14);
}

MotiveForce motive_force(const ModelHamiltonian& model, const Vec& center, double radius,
                         double t, double dt, int band, const NumericsOptions& opts) {
    if (model.space_dim != 2)
        throw Error("geometry", "motive_force: circle construction requires space_dim == 2");

    auto path = [&](double sarg) {
        Vec K = center;
        K[0] += radius * std::cos(2.0 * kPi * sarg);
        K[1] += radius * std::sin(2.0 * kPi * sarg);
        return K;
    };
    MotiveForce mf;
    mf.line_integral = -efield_loop_integral(model, path, band, t, opts);

    auto flux = [&](double tt) {
        auto f = [&](double r, double phi) {
            Vec K = center;
            K[0] += r * std::cos(phi);
            K[1] += r * std::sin(phi);
            auto cf = berry_curvature(model, K, tt, opts);
            auto frame = diagonalize_fiber(model, K, tt, opts.gap_tol);
            return cf.scalar(frame.block_of(band), 0, 1) * r;
        };
        return refine_trapezoid_2d(f, 1e-9, radius, 0.0, 2.0 * kPi, opts.quad_tol, 512);
    };
    mf.flux_derivative = (flux(t + dt) - flux(t - dt)) / (2.0 * dt);
    return mf;
}

Mat GeometricTensors::g_scalar(int block) const {
    const int d = static_cast<int>(g[block].size());
    Mat out(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out(i, j) = g[block][i][j](0, 0).real();
    return out;
}

Mat GeometricTensors::m_scalar(int block) const {
    const int d = static_cast<int>(g[block].size());
    Mat out(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out(i, j) = m[block][i + 1][j + 1](0, 0).real();
    return out;
}

double GeometricTensors::m00_scalar(int block) const { return m[block][0][0](0, 0).real(); }

double GeometricTensors::phi_scalar(int block) const { return phi[block](0, 0).real(); }

GeometricTensors tensors(const ModelHamiltonian& model, const GaugeFieldSample& s,
                         const Vec& Q, const NumericsOptions& opts) {
    const int dim = static_cast<int>(s.energies.size());
    const int d = model.space_dim;
    const int nmu = d + 1;
    const int nb = static_cast<int>(s.blocks.size());
    const double gap_tol = opts.gap_tol > 0.0 ? opts.gap_tol : default_gap_tol(s.energies);

    std::vector<int> blk_of(dim);
    for (int b = 0; b < nb; ++b)
        for (int i : s.blocks[b]) blk_of[i] = b;

    GeometricTensors out;
    out.blocks = s.blocks;
    out.g.resize(nb);
    out.m.resize(nb);
    out.phi.resize(nb);

    const Vec gradV = model.v_grad_at(Q, s.t);
    const Mat hessV = model.v_hess_at(Q, s.t);

    for (int b = 0; b < nb; ++b) {
        const auto& blk = s.blocks[b];
        const int bd = static_cast<int>(blk.size());
        double eblk = 0.0;
        for (int i : blk) eblk += s.energies[i];
        eblk /= bd;

        // sums over m outside the block
        std::vector<int> outside;
        for (int i = 0; i < dim; ++i)
            if (blk_of[i] != b) outside.push_back(i);
        for (int i : outside)
            if (std::abs(s.energies[i] - eblk) < gap_tol)
                throw GapTooSmall("geometry", "tensor sum denominator below gap_tol at " +
                                  point_str(s.K, s.t));

        auto pair_sum = [&](int mu, int nu, bool weighted) {
            CMat acc = CMat::Zero(bd, bd);
            for (int p = 0; p < bd; ++p)
                for (int q = 0; q < bd; ++q)
                    for (int mm : outside) {
                        cplx term = s.a_full[mu](blk[p], mm) * s.a_full[nu](mm, blk[q]);
                        if (weighted) term /= (s.energies[mm] - eblk);
                        acc(p, q) += term;
                    }
            return CMat(0.5 * (acc + acc.adjoint()));
        };

        out.g[b].assign(d, std::vector<CMat>(d));
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j) {
                CMat gij = pair_sum(i + 1, j + 1, false);
                out.g[b][i][j] = gij;
                out.g[b][j][i] = gij.adjoint();  // = gij for the h.c.-symmetrized sum
            }
        }
        out.m[b].assign(nmu, std::vector<CMat>(nmu));
        for (int mu = 0; mu < nmu; ++mu)
            for (int nu = 0; nu < nmu; ++nu) out.m[b][mu][nu] = pair_sum(mu, nu, true);

        CMat phi = out.m[b][0][0];
        for (int i = 0; i < d; ++i) {
            phi += (out.m[b][0][i + 1] + out.m[b][i + 1][0]) * gradV[i];
            for (int j = 0; j < d; ++j) {
                phi += 0.5 * out.g[b][i][j] * hessV(i, j);
                phi += out.m[b][i + 1][j + 1] * gradV[i] * gradV[j];
            }
        }
        out.phi[b] = phi;
    }
    return out;
}

} // namespace geomgauge
