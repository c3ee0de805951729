#include "lsc/penalties.hpp"

#include "lsc/errors.hpp"

namespace lsc {
namespace {

std::string dims(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ContractError(what);
}

void check_coding_shapes(const Matrix& stimuli, const Matrix& atoms, const Matrix& codes) {
    require(stimuli.rows() == atoms.rows(),
            "stimuli " + dims(stimuli) + " and dictionary " + dims(atoms) + " differ in dimension");
    require(codes.rows() == atoms.cols(),
            "codes " + dims(codes) + " do not match " + std::to_string(atoms.cols()) + " atoms");
    require(codes.cols() == stimuli.cols(),
            "codes " + dims(codes) + " do not match " + std::to_string(stimuli.cols()) + " stimuli");
}

void check_laplacian(const Matrix& codes, const Matrix& laplacian) {
    require(laplacian.rows() == laplacian.cols(), "laplacian " + dims(laplacian) + " is not square");
    require(laplacian.rows() == codes.cols(),
            "laplacian " + dims(laplacian) + " does not match " + std::to_string(codes.cols()) +
                " code columns");
}

} // namespace

std::string_view to_string(PenaltyKind kind) {
    switch (kind) {
        case PenaltyKind::L1: return "l1";
        case PenaltyKind::WeightedL1: return "wl";
        case PenaltyKind::Laplacian: return "lap";
    }
    return "?";
}

PenaltyKind parse_penalty_kind(std::string_view name) {
    if (name == "l1" || name == "L1") return PenaltyKind::L1;
    if (name == "wl" || name == "weighted_l1") return PenaltyKind::WeightedL1;
    if (name == "lap" || name == "laplacian") return PenaltyKind::Laplacian;
    throw ConfigError("unknown penalty '" + std::string(name) + "' (expected l1|wl|lap)");
}

void PenaltyConfig::validate(Eigen::Index batch_columns) const {
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
    if (kind == PenaltyKind::Laplacian) {
        if (!laplacian) throw ConfigError("laplacian penalty requires a graph laplacian");
        if (laplacian->rows() != batch_columns || laplacian->cols() != batch_columns) {
            throw ContractError("laplacian " + dims(*laplacian) + " does not match batch of " +
                                std::to_string(batch_columns));
        }
    }
}

double l1_penalty(const Matrix& codes, double lambda) {
    return lambda * codes.cwiseAbs().sum();
}

Matrix atom_distance_matrix(const Matrix& stimuli, const Matrix& atoms) {
    require(stimuli.rows() == atoms.rows(),
            "stimuli " + dims(stimuli) + " and dictionary " + dims(atoms) + " differ in dimension");
    // ||y||^2 + ||a||^2 - 2 a^T y loses precision when y ~ a; use the direct form.
    Matrix out(atoms.cols(), stimuli.cols());
    for (Eigen::Index i = 0; i < stimuli.cols(); ++i) {
        for (Eigen::Index j = 0; j < atoms.cols(); ++j) {
            out(j, i) = (stimuli.col(i) - atoms.col(j)).squaredNorm();
        }
    }
    return out;
}

double wl_penalty(const Matrix& stimuli, const Matrix& atoms, const Matrix& codes, double lambda) {
    check_coding_shapes(stimuli, atoms, codes);
    const Matrix distances = atom_distance_matrix(stimuli, atoms);
    return lambda * distances.cwiseProduct(codes).sum() / static_cast<double>(stimuli.cols());
}

Vector wl_code_gradient(const Vector& stimulus, const Matrix& atoms, const Vector& code, double lambda) {
    check_coding_shapes(stimulus, atoms, code);
    const Matrix distances = atom_distance_matrix(stimulus, atoms);
    return atoms.transpose() * (atoms * code - stimulus) + lambda * distances.col(0);
}

double lap_penalty(const Matrix& codes, const Matrix& laplacian, double lambda) {
    check_laplacian(codes, laplacian);
    return lambda * (codes * laplacian).cwiseProduct(codes).sum();
}

Matrix lap_code_gradient(const Matrix& atoms, const Matrix& stimuli, const Matrix& codes,
                         const Matrix& laplacian, double lambda) {
    check_coding_shapes(stimuli, atoms, codes);
    check_laplacian(codes, laplacian);
    return atoms.transpose() * (atoms * codes - stimuli) +
           lambda * codes * (laplacian + laplacian.transpose());
}

Matrix wl_atom_gradient(const Matrix& stimuli, const Matrix& atoms, const Matrix& codes, double lambda) {
    check_coding_shapes(stimuli, atoms, codes);
    Matrix grad = (atoms * codes - stimuli) * codes.transpose();
    // sum_i x_ji (a_j - y_i) = a_j * rowsum_j - (Y X^T)_{:, j}
    const Vector activation = codes.rowwise().sum();
    grad += 2.0 * lambda * (atoms * activation.asDiagonal() - stimuli * codes.transpose());
    return grad;
}

double data_fit(const Matrix& stimuli, const Matrix& atoms, const Matrix& codes) {
    check_coding_shapes(stimuli, atoms, codes);
    return 0.5 * (stimuli - atoms * codes).squaredNorm();
}

double coding_objective(const Matrix& stimuli, const Matrix& atoms, const Matrix& codes,
                        const PenaltyConfig& penalty) {
    const double fit = data_fit(stimuli, atoms, codes);
    switch (penalty.kind) {
        case PenaltyKind::L1:
            return fit + l1_penalty(codes, penalty.lambda);
        case PenaltyKind::WeightedL1:
            return fit + wl_penalty(stimuli, atoms, codes, penalty.lambda) *
                             static_cast<double>(stimuli.cols());
        case PenaltyKind::Laplacian:
            penalty.validate(codes.cols());
            return fit + lap_penalty(codes, *penalty.laplacian, penalty.lambda);
    }
    return fit;
}

} // namespace lsc
