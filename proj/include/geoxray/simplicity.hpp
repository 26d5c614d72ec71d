#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "geoxray/geodesic.hpp"
#include "geoxray/metric.hpp"

namespace geoxray {

struct SimplicityWitness {
    Vec2 x;
    double theta = 0.0;
    std::string failure_kind;  // "not_convex", "trapped", "conjugate_point", "integration_error"
    double value = 0.0;        // II value, t_max, conjugate time, or NaN
};

struct SimplicityReport {
    bool strictly_convex = true;
    bool nontrapping = true;
    bool no_conjugate_points = true;
    int boundary_samples = 0;
    int fan_samples = 0;
    int interior_samples = 0;
    int failed_samples = 0;  // integration errors, recorded as witnesses
    std::vector<SimplicityWitness> witnesses;

    bool simple() const { return strictly_convex && nontrapping && no_conjugate_points; }
    nlohmann::json to_json() const;
};

// Second fundamental form of the unit circle for g = exp(2 lambda) delta,
// relative to g: II = 1 + d_r lambda (up to the positive factor exp(-lambda)).
double boundary_second_fundamental_form(const ConformalMetric& g, double beta);

// Inward fan on the boundary: beta_i = 2 pi i / n_beta, alpha_j =
// -pi/2 + (j + 1/2) pi / n_alpha, direction theta = beta + pi + alpha.
PhaseState fan_state(double beta, double alpha);

// Tests the three defining properties of a simple metric on the disk:
// convexity at n_boundary boundary points; trapping and conjugate points
// over the n_boundary x n_angles inward fan. Trapping is also probed from
// interior rings (|x| = 0.2, 0.4, 0.6, 0.8) since trapped geodesics need not
// reach the boundary. `max_witnesses` caps the stored witnesses per kind.
SimplicityReport verify_simplicity(const ConformalMetric& g, int n_boundary = 32, int n_angles = 32,
                                   double t_max = kDefaultTrapTime, double tol = 1e-8, int max_witnesses = 16);

}  // namespace geoxray
