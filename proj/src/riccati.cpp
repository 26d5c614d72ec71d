#include "geoxray/riccati.hpp"

#include <algorithm>
#include <cmath>

#include "geoxray/common.hpp"

namespace geoxray {

namespace {

struct Pair {
    ComplexMatrix Y;
    ComplexMatrix Z;
};

Pair rhs(const RiccatiCoefficients& c, double t, const Pair& s) {
    const RealMatrix B = c.B(t);
    const RealMatrix C = c.C(t);
    const RealMatrix F = c.F(t);
    return {B.transpose().cast<std::complex<double>>() * s.Y + C.cast<std::complex<double>>() * s.Z,
            -F.cast<std::complex<double>>() * s.Y - B.cast<std::complex<double>>() * s.Z};
}

Pair rk4(const RiccatiCoefficients& c, double t, const Pair& s, double h) {
    auto add = [](const Pair& a, double w, const Pair& b) { return Pair{a.Y + w * b.Y, a.Z + w * b.Z}; };
    const Pair k1 = rhs(c, t, s);
    const Pair k2 = rhs(c, t + 0.5 * h, add(s, 0.5 * h, k1));
    const Pair k3 = rhs(c, t + 0.5 * h, add(s, 0.5 * h, k2));
    const Pair k4 = rhs(c, t + h, add(s, h, k3));
    return {s.Y + (h / 6.0) * (k1.Y + 2.0 * k2.Y + 2.0 * k3.Y + k4.Y),
            s.Z + (h / 6.0) * (k1.Z + 2.0 * k2.Z + 2.0 * k3.Z + k4.Z)};
}

double min_eigenvalue_sym(const RealMatrix& m) {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace

RiccatiSolution riccati_solve(const RiccatiCoefficients& coeffs, const ComplexMatrix& H0, double T, double step) {
    if (!coeffs.B || !coeffs.C || !coeffs.F) throw ParameterError("Riccati coefficients must all be set");
    if (H0.rows() != H0.cols() || H0.rows() == 0) throw ParameterError("H0 must be a non-empty square matrix");
    if (!(T > 0.0) || !(step > 0.0)) throw ParameterError("Riccati horizon and step must be positive");
    if ((H0 - H0.transpose()).norm() > 1e-12 * std::max(1.0, H0.norm()))
        throw ParameterError("H0 must be symmetric");
    const auto n = H0.rows();
    const bool real_start = H0.imag().norm() == 0.0;
    const double im0 = real_start ? 0.0 : min_eigenvalue_sym(H0.imag());
    const bool positive_start = !real_start && im0 > 0.0;

    RiccatiSolution sol;
    sol.min_im_eigenvalue = real_start ? 0.0 : im0;
    Pair s{ComplexMatrix::Identity(n, n), H0};
    auto record = [&](double t, const Pair& p) {
        Eigen::FullPivLU<ComplexMatrix> lu(p.Y);
        if (!lu.isInvertible()) {
            if (positive_start) throw ConsistencyError("y became singular although Im H0 is positive definite");
            sol.y_nonvanishing = false;
            return;
        }
        const ComplexMatrix H = p.Z * lu.inverse();
        const double asym = (H - H.transpose()).norm();
        sol.max_asymmetry = std::max(sol.max_asymmetry, asym);
        if (positive_start) {
            const double ev = min_eigenvalue_sym(H.imag());
            sol.min_im_eigenvalue = std::min(sol.min_im_eigenvalue, ev);
            if (!(ev > 0.0)) throw ConsistencyError("Im H lost positive definiteness");
        }
        sol.times.push_back(t);
        sol.H.push_back(H);
    };
    record(0.0, s);
    const int nsteps = std::max(1, static_cast<int>(std::ceil(T / step - 1e-12)));
    const double h = T / nsteps;
    for (int k = 0; k < nsteps; ++k) {
        const double t = k * h;
        const Pair next = rk4(coeffs, t, s, h);
        if (real_start) {
            const double d0 = s.Y.determinant().real();
            const double d1 = next.Y.determinant().real();
            if (d1 == 0.0 || (d0 > 0.0) != (d1 > 0.0)) {
                double lo = 0.0, hi = h;
                while (hi - lo > 1e-13) {
                    const double mid = 0.5 * (lo + hi);
                    const double dm = rk4(coeffs, t, s, mid).Y.determinant().real();
                    if (dm != 0.0 && (dm > 0.0) == (d0 > 0.0)) lo = mid;
                    else hi = mid;
                }
                sol.blowup_time = t + 0.5 * (lo + hi);
                sol.y_nonvanishing = false;
                return sol;
            }
        }
        s = next;
        record(t + h, s);
    }
    return sol;
}

RiccatiSolution riccati_solve_simple(const MatrixFunction& F, const ComplexMatrix& H0, double T, double step) {
    if (!F) throw ParameterError("F must be set");
    const auto n = H0.rows();
    RiccatiCoefficients c;
    c.B = [n](double) { return RealMatrix::Zero(n, n); };
    c.C = [n](double) { return RealMatrix::Identity(n, n); };
    c.F = [F](double t) { return RealMatrix(-F(t)); };
    return riccati_solve(c, H0, T, step);
}

}  // namespace geoxray
