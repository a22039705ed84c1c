// core.hpp — shared types, error hierarchy, and the pluggable Hamiltonian
// definition H = T(K,t) + V(Q,t) with T matrix valued and V scalar valued.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace geomgauge {

using cplx = std::complex<double>;
using Vec  = Eigen::VectorXd;
using Mat  = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

// ----------------------------- errors ---------------------------------------

// Base error; every failure names the module and the phase-space point.
class Error : public std::runtime_error {
public:
    Error(std::string module, std::string what_arg)
        : std::runtime_error("[" + module + "] " + what_arg), module_(std::move(module)) {}
    const std::string& module() const noexcept { return module_; }
private:
    std::string module_;
};

class NonHermitianInput : public Error {
public: using Error::Error;
};
class DegenerateUnblocked : public Error {
public: using Error::Error;
};
class TrackingAmbiguous : public Error {
public: using Error::Error;
};
class GapTooSmall : public Error {
public: using Error::Error;
};
class OpenLoop : public Error {
public: using Error::Error;
};
class OpenCycle : public Error {
public: using Error::Error;
};
class StepTooCoarse : public Error {
public: using Error::Error;
};
class ConfigInvalid : public Error {
public: using Error::Error;
};
// Internal consistency failure (route disagreement, norm drift, ...).
class NumericalFailure : public Error {
public: using Error::Error;
};

inline std::string point_str(const Vec& K, double t) {
    std::ostringstream os;
    os << "K=(";
    for (int i = 0; i < K.size(); ++i) os << (i ? "," : "") << K[i];
    os << "), t=" << t;
    return os.str();
}

// ----------------------------- model ----------------------------------------

// User-pluggable Hamiltonian H = T(K,t) + V(Q,t).
//
// Derivative direction index mu: 0 is time, 1..space_dim are the K components.
// Optional callables fall back to central finite differences.
struct ModelHamiltonian {
    int dim       = 2;  // Hilbert-space dimension of the matrix part (>= 2)
    int space_dim = 0;  // number of spatial components of K (0 = time-driven only)

    std::function<CMat(const Vec& K, double t)> t_matrix;
    std::function<double(const Vec& Q, double t)> v_scalar;  // null => V = 0

    std::function<CMat(const Vec& K, double t, int mu)> dt_matrix;  // analytic d_mu T
    std::function<Vec(const Vec& Q, double t)> dv_grad;
    std::function<Mat(const Vec& Q, double t)> dv_hess;

    std::function<CMat(const Vec& K, double t)> analytic_u0;  // closed-form diagonalizer
    std::vector<std::vector<int>> block_spec;                 // intended degenerate blocks
    bool time_independent = false;  // lets pipelines skip temporal derivatives

    // finite-difference step scales (see t_deriv / v helpers)
    double fd_scale = 1e-5;

    CMat t_at(const Vec& K, double t) const { return t_matrix(K, t); }

    double v_at(const Vec& Q, double t) const {
        return v_scalar ? v_scalar(Q, t) : 0.0;
    }

    // d_mu T: analytic when provided, else central differences with
    // h = fd_scale * (1 + |K|) (or (1 + |t|) for mu = 0).
    CMat t_deriv(const Vec& K, double t, int mu) const {
        if (dt_matrix) return dt_matrix(K, t, mu);
        if (mu == 0) {
            const double h = fd_scale * (1.0 + std::abs(t));
            return (t_matrix(K, t + h) - t_matrix(K, t - h)) / (2.0 * h);
        }
        const double h = fd_scale * (1.0 + K.norm());
        Vec Kp = K, Km = K;
        Kp[mu - 1] += h;
        Km[mu - 1] -= h;
        return (t_matrix(Kp, t) - t_matrix(Km, t)) / (2.0 * h);
    }

    Vec v_grad_at(const Vec& Q, double t) const {
        if (dv_grad) return dv_grad(Q, t);
        Vec g(Q.size());
        const double h = fd_scale * (1.0 + Q.norm());
        for (int i = 0; i < Q.size(); ++i) {
            Vec Qp = Q, Qm = Q;
            Qp[i] += h;
            Qm[i] -= h;
            g[i] = (v_at(Qp, t) - v_at(Qm, t)) / (2.0 * h);
        }
        return g;
    }

    Mat v_hess_at(const Vec& Q, double t) const {
        if (dv_hess) return dv_hess(Q, t);
        const int d = static_cast<int>(Q.size());
        Mat H(d, d);
        const double h = fd_scale * (1.0 + Q.norm());
        for (int i = 0; i < d; ++i) {
            for (int j = i; j < d; ++j) {
                Vec Qpp = Q, Qpm = Q, Qmp = Q, Qmm = Q;
                Qpp[i] += h; Qpp[j] += h;
                Qpm[i] += h; Qpm[j] -= h;
                Qmp[i] -= h; Qmp[j] += h;
                Qmm[i] -= h; Qmm[j] -= h;
                H(i, j) = (v_at(Qpp, t) - v_at(Qpm, t) - v_at(Qmp, t) + v_at(Qmm, t)) / (4.0 * h * h);
                H(j, i) = H(i, j);
            }
        }
        return H;
    }
};

// Numerical knobs shared by the field/propagation pipelines.
struct NumericsOptions {
    double hbar      = 1.0;
    double gap_tol   = 0.0;    // <= 0 picks the default 1e-8 * spectral range
    double fd_k      = 1e-5;   // stencil step scale for d/dK of eigenframes
    double fd_t      = 1e-5;   // stencil step scale for d/dt of eigenframes
    double quad_tol  = 1e-6;   // loop/flux quadrature refinement target
    double oracle_tol = 1e-10; // exact-propagation refinement target
    int time_refine  = 2;      // fine subintervals per user interval = 2*this
};

} // namespace geomgauge
