#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace geoxray {

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using MatrixFunction = std::function<RealMatrix(double)>;

// Coefficients of H' + B H + H B^T + H C H + F = 0.
struct RiccatiCoefficients {
    MatrixFunction B;
    MatrixFunction C;
    MatrixFunction F;
};

struct RiccatiSolution {
    std::vector<double> times;
    std::vector<ComplexMatrix> H;
    bool y_nonvanishing = true;
    std::optional<double> blowup_time;
    // Diagnostics over the samples.
    double max_asymmetry = 0.0;
    double min_im_eigenvalue = 0.0;  // smallest eigenvalue of Im H over the samples
};

// Solves the matrix Riccati equation through the linear system
//   Y' = B^T Y + C Z,   Z' = -F Y - B Z,   Y(0) = I, Z(0) = H0,
// with H = Z Y^{-1} (classical RK4, fixed step). For real H0 a sign change of
// det Y is bisected and reported as blowup_time, and the solution stops
// there. For Im H0 positive definite, a singular Y or loss of positivity of
// Im H throws ConsistencyError.
RiccatiSolution riccati_solve(const RiccatiCoefficients& coeffs, const ComplexMatrix& H0, double T,
                              double step = 1e-3);

// The reduced model H' + H^2 = F (B = 0, C = I, and the general F replaced by -F),
// linearized as y' = z, z' = F y.
RiccatiSolution riccati_solve_simple(const MatrixFunction& F, const ComplexMatrix& H0, double T,
                                     double step = 1e-3);

}  // namespace geoxray
