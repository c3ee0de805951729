#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "lsc/tensor.hpp"

namespace lsc {

enum class PenaltyKind { L1, WeightedL1, Laplacian };

std::string_view to_string(PenaltyKind kind);
/// Accepts "l1", "wl", "lap" (and the long names "weighted_l1", "laplacian").
PenaltyKind parse_penalty_kind(std::string_view name);

struct PenaltyConfig {
    PenaltyKind kind = PenaltyKind::WeightedL1;
    double lambda = 0.5;
    /// b x b graph Laplacian; required iff kind == Laplacian.
    std::optional<Matrix> laplacian;

    void validate(Eigen::Index batch_columns) const;
};

/// lambda * sum |x_ij|.
double l1_penalty(const Matrix& codes, double lambda);

/// m x n matrix of squared distances ||y_i - a_j||^2 (row j, column i).
Matrix atom_distance_matrix(const Matrix& stimuli, const Matrix& atoms);

/// lambda * mean_i sum_j x_ji ||y_i - a_j||^2.
double wl_penalty(const Matrix& stimuli, const Matrix& atoms, const Matrix& codes, double lambda);

/// Full-loss code gradient for one stimulus: A^T(Ax - y) + lambda * (||y - a_j||^2)_j.
Vector wl_code_gradient(const Vector& stimulus, const Matrix& atoms, const Vector& code, double lambda);

/// lambda * tr(X G X^T).
double lap_penalty(const Matrix& codes, const Matrix& laplacian, double lambda);

/// A^T(AX - Y) + lambda * X (G + G^T), the exact gradient of
/// 1/2||Y - AX||_F^2 + lambda tr(X G X^T).
Matrix lap_code_gradient(const Matrix& atoms, const Matrix& stimuli, const Matrix& codes,
                         const Matrix& laplacian, double lambda);

/// Gradient w.r.t. A of 1/2||Y - AX||_F^2 + lambda sum_i sum_j x_ji ||y_i - a_j||^2.
/// Column j receives (AX - Y) x_j^T + 2 lambda sum_i x_ji (a_j - y_i).
Matrix wl_atom_gradient(const Matrix& stimuli, const Matrix& atoms, const Matrix& codes, double lambda);

/// 1/2 ||Y - AX||_F^2.
double data_fit(const Matrix& stimuli, const Matrix& atoms, const Matrix& codes);

/// Batch-summed objective 1/2||Y - AX||_F^2 + S(X), with S summed (not
/// averaged) over columns. Dividing by n gives the per-stimulus loss.
double coding_objective(const Matrix& stimuli, const Matrix& atoms, const Matrix& codes,
                        const PenaltyConfig& penalty);

} // namespace lsc
