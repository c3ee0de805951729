#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lsc/tensor.hpp"

namespace lsc {

struct ReceptiveField {
    Tensor image;  // side x side, row-major
    int neuron_id = 0;
    /// Normalizer sum_s |x_j(y_s)|; zero marks a dead neuron with a zero image.
    double total_response = 0.0;

    bool dead() const noexcept { return total_response == 0.0; }
};

/// Maps a d x c block of stimuli to the m x c block of responses.
using ResponseFn = std::function<Matrix(const Matrix&)>;

struct StaOptions {
    std::size_t num_samples = 100000;
    std::uint64_t seed = 0;
    std::size_t chunk = 4096;
};

/// Spike-triggered averages under standard Gaussian white noise:
/// RF_j = sum_s x_j(y_s) y_s / sum_s |x_j(y_s)|.
std::vector<ReceptiveField> sta_receptive_fields(const ResponseFn& respond, int patch_side,
                                                 const StaOptions& options);

/// Receptive fields read straight off dictionary columns.
std::vector<ReceptiveField> atom_receptive_fields(const Matrix& atoms, int patch_side);

/// 2D Gabor K exp(-(u'^2/2sx^2 + v'^2/2sy^2)) cos(2 pi f u' + phi) with
/// u' = (u-u0) cos t + (v-v0) sin t, v' = -(u-u0) sin t + (v-v0) cos t.
/// u is the column index, v the row index.
struct GaborParams {
    double amplitude = 0.0;
    double u0 = 0.0;
    double v0 = 0.0;
    double theta = 0.0;    // [0, pi)
    double sigma_x = 1.0;  // > 0
    double sigma_y = 1.0;  // > 0
    double freq = 0.1;     // cycles / pixel, > 0
    double phase = 0.0;    // (-pi, pi]
    double residual = 1.0;
    bool converged = false;
    int neuron_id = 0;
    int iterations = 0;
};

/// Evaluates the Gabor on a side x side grid.
Tensor render_gabor(const GaborParams& params, int side);

/// Maps an equivalent parameter set (negative K, f or sigma, theta outside
/// [0, pi)) to its canonical representative. The rendered image is unchanged.
GaborParams canonicalize(GaborParams params);

struct GaborFitOptions {
    int max_iterations = 200;
    double step_tolerance = 1e-8;
    double converged_residual = 0.5;
    /// Best grid candidates refined by Levenberg-Marquardt.
    int refine_starts = 6;
};

/// Least-squares Gabor fit to a mean-subtracted field.
///
/// Model and data are both compared with their means removed, since the
/// model has no DC term. Initialization scans 12 orientations, 8 log-spaced
/// frequencies in [0.05, 0.45] and 8 phases with the center at the peak of
/// |rf| and sigma = side / 4; the amplitude is solved in closed form per
/// candidate. The best candidates are refined with damped Gauss-Newton.
GaborParams gabor_fit(const ReceptiveField& rf, const GaborFitOptions& options = {});

/// Folds a phase into [0, 90] degrees: 0 = even-symmetric, 90 = odd.
double fold_phase(double phase_rad);

struct PhaseHistogram {
    std::vector<double> bin_edges;  // degrees, num_bins + 1 entries
    std::vector<std::size_t> counts;
    std::size_t excluded = 0;  // non-converged fits left out

    std::size_t total() const noexcept;
};

PhaseHistogram phase_histogram(const std::vector<GaborParams>& params, int num_bins);

/// Fraction of histogram mass in [lo_deg, hi_deg]; bins straddling a bound
/// contribute in proportion to their overlap.
double mass_fraction(const PhaseHistogram& h, double lo_deg, double hi_deg);

/// min(L, R) / max(L, R) with L the mass below 45 degrees and R the rest.
/// With an odd bin count the middle bin is split evenly across 45 degrees.
double symmetry_score(const PhaseHistogram& h);

/// (sigma_x f, sigma_y f) for a converged fit.
std::pair<double, double> shape_metrics(const GaborParams& params);

std::string gabor_csv(const std::vector<GaborParams>& params);
std::string histogram_csv(const PhaseHistogram& h);

} // namespace lsc
