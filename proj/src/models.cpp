#include "geomgauge/models.hpp"

#include <cmath>

namespace geomgauge {

CMat pauli(int i) {
    CMat s(2, 2);
    switch (i) {
        case 0: s << 1, 0, 0, 1; break;
        case 1: s << 0, 1, 1, 0; break;
        case 2: s << 0, cplx(0, -1), cplx(0, 1), 0; break;
        case 3: s << 1, 0, 0, -1; break;
        default: throw Error("models", "pauli index out of range");
    }
    return s;
}

CMat dirac_beta() {
    CMat b = CMat::Zero(4, 4);
    b(0, 0) = b(1, 1) = 1.0;
    b(2, 2) = b(3, 3) = -1.0;
    return b;
}

CMat dirac_alpha(int i) {
    CMat a = CMat::Zero(4, 4);
    const CMat s = pauli(i);
    a.block<2, 2>(0, 2) = s;
    a.block<2, 2>(2, 0) = s;
    return a;
}

CMat dirac_sigma(int i) {
    CMat S = CMat::Zero(4, 4);
    const CMat s = pauli(i);
    S.block<2, 2>(0, 0) = s;
    S.block<2, 2>(2, 2) = s;
    return S;
}

namespace {

CMat dot_sigma(const Vec& v) {
    return v[0] * pauli(1) + v[1] * pauli(2) + v[2] * pauli(3);
}

} // namespace

// ------------------------------- spin ---------------------------------------

ModelHamiltonian make_spin(const SpinConfig& cfg) {
    ModelHamiltonian m;
    m.dim = 2;
    m.space_dim = 0;
    auto b_field = cfg.b_field;
    m.t_matrix = [b_field](const Vec&, double t) { return CMat(dot_sigma(b_field(t))); };
    if (cfg.b_dot) {
        auto b_dot = cfg.b_dot;
        m.dt_matrix = [b_dot](const Vec&, double t, int) { return CMat(dot_sigma(b_dot(t))); };
    }
    if (cfg.use_analytic_u0) {
        m.analytic_u0 = [b_field](const Vec&, double t) {
            const Vec B = b_field(t);
            const Vec n = B / B.norm();
            return CMat((dot_sigma(n) + pauli(3)) / std::sqrt(2.0 * (1.0 + n[2])));
        };
    }
    return m;
}

SpinConfig spin_uniform_drive(double theta, double omega, double b0) {
    SpinConfig cfg;
    cfg.b_field = [=](double t) {
        Vec B(3);
        B << b0 * std::sin(theta) * std::cos(omega * t),
             b0 * std::sin(theta) * std::sin(omega * t),
             b0 * std::cos(theta);
        return B;
    };
    cfg.b_dot = [=](double t) {
        Vec dB(3);
        dB << -b0 * std::sin(theta) * std::sin(omega * t) * omega,
               b0 * std::sin(theta) * std::cos(omega * t) * omega,
               0.0;
        return dB;
    };
    return cfg;
}

double spin_a0_closed(int band_sign, double theta, double omega) {
    return band_sign * 0.5 * (1.0 - std::cos(theta)) * omega;
}

double spin_m_paper_closed(int band_sign, double theta, double phidot, double thetadot,
                           double b) {
    const double num = std::sin(theta) * std::sin(theta) * phidot * phidot + thetadot * thetadot;
    return -band_sign * num / (8.0 * b);
}

double spin_berry_cycle_closed(int band_sign, double theta) {
    return band_sign * kPi * (1.0 - std::cos(theta));
}

double spin_fidelity_closed(double t, double theta, double omega, double omega0) {
    const double s = std::sin(theta);
    const double amp = omega * omega * s * s / (4.0 * omega0 * omega0);
    const double arg = (omega0 - omega) * t;
    return 1.0 - amp * std::sin(arg) * std::sin(arg);
}

ModelHamiltonian make_spin_sphere(double b0) {
    ModelHamiltonian m;
    m.dim = 2;
    m.space_dim = 2;  // K = (theta, phi)
    m.time_independent = true;
    auto nvec = [](const Vec& K) {
        Vec n(3);
        n << std::sin(K[0]) * std::cos(K[1]), std::sin(K[0]) * std::sin(K[1]), std::cos(K[0]);
        return n;
    };
    m.t_matrix = [=](const Vec& K, double) { return CMat(b0 * dot_sigma(nvec(K))); };
    m.dt_matrix = [=](const Vec& K, double, int mu) {
        Vec dn = Vec::Zero(3);
        const double th = K[0], ph = K[1];
        if (mu == 1) {
            dn << std::cos(th) * std::cos(ph), std::cos(th) * std::sin(ph), -std::sin(th);
        } else if (mu == 2) {
            dn << -std::sin(th) * std::sin(ph), std::sin(th) * std::cos(ph), 0.0;
        }
        return CMat(b0 * dot_sigma(dn));
    };
    return m;
}

// ------------------------------- Dirac --------------------------------------

ModelHamiltonian make_dirac(const DiracConfig& cfg) {
    ModelHamiltonian m;
    m.dim = 4;
    m.space_dim = 3;
    m.time_independent = true;
    m.block_spec = {{0, 1}, {2, 3}};
    const double mass = cfg.mass;
    if (mass <= 0.0) throw ConfigInvalid("models", "dirac: mass must be positive");

    m.t_matrix = [mass](const Vec& p, double) {
        CMat T = mass * dirac_beta();
        for (int i = 0; i < 3; ++i) T += p[i] * dirac_alpha(i + 1);
        return T;
    };
    m.dt_matrix = [](const Vec&, double, int mu) {
        if (mu == 0) return CMat(CMat::Zero(4, 4));
        return dirac_alpha(mu);
    };
    if (cfg.use_analytic_u0) {
        m.analytic_u0 = [mass](const Vec& p, double) {
            const double E = std::sqrt(p.squaredNorm() + mass * mass);
            CMat ap = CMat::Zero(4, 4);
            for (int i = 0; i < 3; ++i) ap += p[i] * dirac_alpha(i + 1);
            CMat U = ((E + mass) * CMat::Identity(4, 4) + dirac_beta() * ap) /
                     std::sqrt(2.0 * E * (E + mass));
            return U;
        };
    }

    if (cfg.force.norm() > 0.0) {
        const Vec F = cfg.force;
        m.v_scalar = [F](const Vec& R, double) { return -F.dot(R); };
        m.dv_grad = [F](const Vec&, double) { return Vec(-F); };
        m.dv_hess = [](const Vec&, double) { return Mat(Mat::Zero(3, 3)); };
    } else if (cfg.coulomb_strength != 0.0) {
        const double Z = cfg.coulomb_strength, a2 = cfg.coulomb_soft * cfg.coulomb_soft;
        m.v_scalar = [=](const Vec& R, double) { return -Z / std::sqrt(R.squaredNorm() + a2); };
        m.dv_grad = [=](const Vec& R, double) {
            const double w = R.squaredNorm() + a2;
            return Vec(Z * R / std::pow(w, 1.5));
        };
        m.dv_hess = [=](const Vec& R, double) {
            const double w = R.squaredNorm() + a2;
            Mat H = Z * Mat::Identity(3, 3) / std::pow(w, 1.5);
            H -= 3.0 * Z * R * R.transpose() / std::pow(w, 2.5);
            return H;
        };
    }
    return m;
}

DiracClosedForms dirac_closed_forms(const Vec& p, double m, double hbar, const Vec& gradV,
                                    const Mat& hessV) {
    if (m <= 0.0) throw ConfigInvalid("models", "dirac_closed_forms: mass must be positive");
    const double E = std::sqrt(p.squaredNorm() + m * m);
    DiracClosedForms out;
    out.g_metric = Mat::Identity(3, 3) - p * p.transpose() / (E * E);
    out.m_tensor = out.g_metric / (8.0 * E * E * E);
    out.g_metric /= (4.0 * E * E);
    // recover g^{ij} for the phi contraction
    const Mat g = 4.0 * E * E * out.g_metric;

    double phi = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            phi += g(i, j) * (hessV(i, j) + gradV[i] * gradV[j] / E);
    out.phi = hbar * hbar / (8.0 * E * E) * phi;

    out.darwin = hbar * hbar * hessV.trace() / (8.0 * m * m);
    out.grad_sq = hbar * hbar * gradV.squaredNorm() / (8.0 * m * m * m);
    Vec cr(3);
    cr << gradV[1] * p[2] - gradV[2] * p[1], gradV[2] * p[0] - gradV[0] * p[2],
          gradV[0] * p[1] - gradV[1] * p[0];
    out.spin_orbit = CMat::Zero(4, 4);
    for (int i = 0; i < 3; ++i) out.spin_orbit += cr[i] * dirac_sigma(i + 1);
    out.spin_orbit *= hbar / (4.0 * m * m);
    return out;
}

// ------------------------------- Bloch --------------------------------------

ModelHamiltonian make_bloch(const BlochConfig& cfg) {
    if (cfg.k_dim < 1 || cfg.k_dim > 3)
        throw ConfigInvalid("models", "bloch: k_dim must be 1..3");
    if (cfg.force.size() != cfg.k_dim)
        throw ConfigInvalid("models", "bloch: force dimension must match k_dim");
    ModelHamiltonian m;
    m.dim = 2;
    m.space_dim = cfg.k_dim;
    m.time_independent = true;
    auto h_vec = cfg.h_vec;
    m.t_matrix = [h_vec](const Vec& k, double) { return CMat(dot_sigma(h_vec(k))); };
    if (cfg.h_jac) {
        auto h_jac = cfg.h_jac;
        m.dt_matrix = [h_jac, h_vec](const Vec& k, double, int mu) {
            if (mu == 0) return CMat(CMat::Zero(2, 2));
            const Mat J = h_jac(k);
            Vec dh = J.col(mu - 1);
            return CMat(dot_sigma(dh));
        };
    }
    const Vec F = cfg.force;
    m.v_scalar = [F](const Vec& R, double) { return -F.dot(R); };
    m.dv_grad = [F](const Vec&, double) { return Vec(-F); };
    const int d = cfg.k_dim;
    m.dv_hess = [d](const Vec&, double) { return Mat(Mat::Zero(d, d)); };
    return m;
}

BlochConfig bloch_qwz(double delta, const Vec& force) {
    BlochConfig cfg;
    cfg.k_dim = 2;
    cfg.force = force;
    cfg.h_vec = [delta](const Vec& k) {
        Vec h(3);
        h << std::sin(k[0]), std::sin(k[1]), delta + std::cos(k[0]) + std::cos(k[1]);
        return h;
    };
    cfg.h_jac = [](const Vec& k) {
        Mat J(3, 2);
        J << std::cos(k[0]), 0.0,
             0.0, std::cos(k[1]),
             -std::sin(k[0]), -std::sin(k[1]);
        return J;
    };
    return cfg;
}

BlochConfig bloch_chain(double delta, double force) {
    BlochConfig cfg;
    cfg.k_dim = 1;
    cfg.force = Vec::Constant(1, force);
    cfg.h_vec = [delta](const Vec& k) {
        Vec h(3);
        h << std::cos(k[0]), std::sin(k[0]), delta;
        return h;
    };
    cfg.h_jac = [](const Vec& k) {
        Mat J(3, 1);
        J << -std::sin(k[0]), std::cos(k[0]), 0.0;
        return J;
    };
    return cfg;
}

// ----------------------------- BO (slow-fast) -------------------------------

ModelHamiltonian make_bo(const BOConfig& cfg) {
    if (cfg.inv_mass <= 0.0)
        throw ConfigInvalid("models", "bo: inverse mass tensor must be positive definite");
    ModelHamiltonian m;
    m.dim = 2;
    m.space_dim = 1;  // K~ = R
    m.time_independent = (cfg.omega == 0.0);

    const double b0 = cfg.b0, tilt = cfg.tilt, twist = cfg.twist;
    const double ma = cfg.mod_amp, mf = cfg.mod_freq, om = cfg.omega;
    auto bmag = [=](double R) { return b0 * (1.0 + ma * std::sin(mf * R)); };
    auto theta = [=](double R) { return tilt + twist * R; };
    auto nvec = [=](double R, double t) {
        Vec n(3);
        n << std::sin(theta(R)) * std::cos(om * t), std::sin(theta(R)) * std::sin(om * t),
             std::cos(theta(R));
        return n;
    };
    m.t_matrix = [=](const Vec& K, double t) {
        return CMat(bmag(K[0]) * dot_sigma(nvec(K[0], t)));
    };
    m.dt_matrix = [=](const Vec& K, double t, int mu) {
        const double R = K[0];
        const double th = theta(R), c = std::cos(om * t), s = std::sin(om * t);
        if (mu == 0) {
            Vec dn(3);
            dn << -std::sin(th) * s * om, std::sin(th) * c * om, 0.0;
            return CMat(bmag(R) * dot_sigma(dn));
        }
        Vec n = nvec(R, t);
        Vec dn(3);
        dn << std::cos(th) * twist * c, std::cos(th) * twist * s, -std::sin(th) * twist;
        const double dB = b0 * ma * mf * std::cos(mf * R);
        return CMat(dB * dot_sigma(n) + bmag(R) * dot_sigma(dn));
    };

    const double b = cfg.inv_mass;
    m.v_scalar = [b](const Vec& Q, double) { return 0.5 * b * Q.squaredNorm(); };
    m.dv_grad = [b](const Vec& Q, double) { return Vec(b * Q); };
    m.dv_hess = [b](const Vec&, double) { return Mat(b * Mat::Identity(1, 1)); };
    return m;
}

// ----------------------------- twist model ----------------------------------

double twist_alpha(const TwistConfig& cfg, double rho, double t) {
    const double amax = cfg.alpha0 + cfg.ramp * t;
    const double r2 = rho * rho, c2 = cfg.rho_scale * cfg.rho_scale;
    return amax * r2 / (r2 + c2);
}

ModelHamiltonian make_twist(const TwistConfig& cfg) {
    ModelHamiltonian m;
    m.dim = 2;
    m.space_dim = 2;
    const double b0 = cfg.b0, a0 = cfg.alpha0, ramp = cfg.ramp;
    const double c2 = cfg.rho_scale * cfg.rho_scale;

    auto nvec = [=](const Vec& K, double t) {
        const double r2 = K.squaredNorm();
        const double a = (a0 + ramp * t) * r2 / (r2 + c2);
        const double g = std::atan2(K[1], K[0]);
        Vec n(3);
        n << std::sin(a) * std::cos(g), std::sin(a) * std::sin(g), std::cos(a);
        return n;
    };
    m.t_matrix = [=](const Vec& K, double t) { return CMat(b0 * dot_sigma(nvec(K, t))); };
    m.dt_matrix = [=](const Vec& K, double t, int mu) {
        const double r2 = K.squaredNorm();
        const double amax = a0 + ramp * t;
        const double s_prof = r2 / (r2 + c2);
        const double a = amax * s_prof;
        const double g = std::atan2(K[1], K[0]);
        const double ca = std::cos(a), sa = std::sin(a);
        const double cg = std::cos(g), sg = std::sin(g);
        double da, dg;
        if (mu == 0) {
            da = ramp * s_prof;
            dg = 0.0;
        } else {
            // d(r^2/(r^2+c^2))/dK_i = 2 K_i c^2/(r^2+c^2)^2
            const double dprof = 2.0 * K[mu - 1] * c2 / ((r2 + c2) * (r2 + c2));
            da = amax * dprof;
            dg = (mu == 1 ? -K[1] : K[0]) / std::max(r2, 1e-300);
        }
        Vec dn(3);
        dn << ca * cg * da - sa * sg * dg, ca * sg * da + sa * cg * dg, -sa * da;
        return CMat(b0 * dot_sigma(dn));
    };
    return m;
}

double twist_flux_closed(const TwistConfig& cfg, int band_sign, double radius, double t) {
    return -band_sign * kPi * (1.0 - std::cos(twist_alpha(cfg, radius, t)));
}

double twist_motive_force_closed(const TwistConfig& cfg, int band_sign, double radius,
                                 double t) {
    const double r2 = radius * radius, c2 = cfg.rho_scale * cfg.rho_scale;
    const double dadt = cfg.ramp * r2 / (r2 + c2);
    return -band_sign * kPi * std::sin(twist_alpha(cfg, radius, t)) * dadt;
}

} // namespace geomgauge
