#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace slicer {

// dN/dt = -alpha N^2 - beta N^3 in normalized units N/n_unit; n_unit states
// how many atoms one unit of N represents.
struct LossParams {
    double alpha = 0.0;  // 1/(unit s)
    double beta = 0.0;   // 1/(unit^2 s)
    double n_unit = 1.0;

    void validate() const;
};

struct DecayCurve {
    std::vector<double> t_s;
    std::vector<double> n;
    double n0 = 1.0;
};

struct FitResult {
    std::vector<double> params;
    double residual_ss = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Fixed-step fourth-order integration of the rate equation on the given time
// grid; min_steps is the total substep budget over the grid span.
DecayCurve integrate_loss(const LossParams& p, double n0,
                          const std::vector<double>& t_grid, int min_steps = 4000);

double loss_survival(const LossParams& p, double n0, double t_s, int steps = 2000);

// Smallest t with N(t) = n0/2, bisection to 1e-4 relative.
double half_life_s(const LossParams& p, double n0);

// Scales the (alpha, beta) weighting by a common factor so that the half-life
// hits the target; the rate equation is homogeneous in time, so the scale is
// the half-life ratio (re-checked after scaling).
LossParams calibrate_to_halflife(double target_s, double n0, double ratio_alpha,
                                 double ratio_beta, double n_unit = 1.0);

struct SimplexOptions {
    double xtol = 1e-8;
    double ftol = 1e-12;
    int max_iterations = 4000;
    double initial_step = 0.05;          // relative, with an absolute floor
    std::vector<double> initial_steps;   // absolute per-coordinate override
};

FitResult simplex_minimize(const std::function<double(const std::vector<double>&)>& objective,
                           const std::vector<double>& x0, const SimplexOptions& options = {});

// Least squares over (alpha, beta), non-negativity via squared parameters.
FitResult fit_loss(const DecayCurve& curve);

// Raised-cosine fringe y = offset + amplitude (1 + cos(2 pi (x-phase)/period))/2.
// Returned params: {amplitude, phase, offset}.
FitResult fit_fringe(const std::vector<std::pair<double, double>>& scan, double period);

// Two channels sharing phase and offset; params {amp_a, amp_b, phase, offset},
// amplitude shares amp_a/(amp_a+amp_b) recover the per-channel signal split.
FitResult fit_fringe_simultaneous(const std::vector<std::pair<double, double>>& chan_a,
                                  const std::vector<std::pair<double, double>>& chan_b,
                                  double period);

} // namespace slicer
