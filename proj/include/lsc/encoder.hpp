#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "lsc/penalties.hpp"
#include "lsc/tensor.hpp"

namespace lsc {

/// Extrapolation schedule for the unrolled encoder.
///
/// AsWritten runs the recursion eta' = (1 + sqrt(1 + 4 eta)) / 2
/// from eta = 0, which makes the first gamma equal to -1. StandardFista uses
/// eta = 1 and 4 eta^2 under the root. None disables extrapolation.
enum class MomentumMode { AsWritten, StandardFista, None };

std::string_view to_string(MomentumMode mode);
/// Accepts "aswritten", "fista", "none".
MomentumMode parse_momentum_mode(std::string_view name);

struct MomentumSchedule {
    std::vector<double> etas;    // eta^(0) .. eta^(T)
    std::vector<double> gammas;  // gamma^(0) .. gamma^(T-1)
};

MomentumSchedule momentum_schedule(int steps, MomentumMode mode);

struct EncoderConfig {
    int steps = 15;
    PenaltyConfig penalty;
    MomentumMode momentum_mode = MomentumMode::AsWritten;
    std::optional<double> step_size_override;
    /// Worker cap for column-separable work; results do not depend on it.
    int threads = 1;

    void validate() const;
};

struct EncodeTrace {
    /// Composite objective at x^(0) .. x^(T), summed over the batch. For the
    /// simplex paths the objective includes the simplex indicator, so the
    /// all-zero start x^(0) scores +infinity.
    std::vector<double> objective_per_step;
};

struct EncodeResult {
    Matrix codes;
    EncodeTrace trace;
    double step_size = 0.0;
};

/// 1 / sigma_max(A)^2 via power iteration on A^T A.
double spectral_norm_sq_inv(const Matrix& atoms);

/// Runs T steps of extrapolated projected gradient descent from zero.
///
/// WeightedL1 and Laplacian codes are projected onto the probability simplex
/// after every gradient step. L1 is the sparse-coding baseline: on the
/// simplex ||x||_1 is constant, so it uses soft-thresholding instead and its
/// codes are signed.
EncodeResult encode(const Matrix& stimuli, const Matrix& atoms, const EncoderConfig& cfg);

/// Same iteration with an explicit schedule (its gammas must cover cfg.steps).
EncodeResult encode(const Matrix& stimuli, const Matrix& atoms, const EncoderConfig& cfg,
                    const MomentumSchedule& schedule);

} // namespace lsc
