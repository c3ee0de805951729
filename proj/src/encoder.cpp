#include "lsc/encoder.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lsc/errors.hpp"
#include "lsc/parallel.hpp"
#include "lsc/rng.hpp"
#include "lsc/simplex.hpp"

namespace lsc {
namespace {

bool uses_simplex(PenaltyKind kind) { return kind != PenaltyKind::L1; }

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

double traced_objective(const Matrix& stimuli, const Matrix& atoms, const Matrix& codes,
                        const PenaltyConfig& penalty) {
    if (uses_simplex(penalty.kind)) {
        for (Eigen::Index j = 0; j < codes.cols(); ++j) {
            if (!on_simplex(codes.col(j), 1e-9)) return std::numeric_limits<double>::infinity();
        }
    }
    return coding_objective(stimuli, atoms, codes, penalty);
}

} // namespace

std::string_view to_string(MomentumMode mode) {
    switch (mode) {
        case MomentumMode::AsWritten: return "aswritten";
        case MomentumMode::StandardFista: return "fista";
        case MomentumMode::None: return "none";
    }
    return "?";
}

MomentumMode parse_momentum_mode(std::string_view name) {
    if (name == "aswritten") return MomentumMode::AsWritten;
    if (name == "fista") return MomentumMode::StandardFista;
    if (name == "none") return MomentumMode::None;
    throw ConfigError("unknown momentum mode '" + std::string(name) + "' (expected aswritten|fista|none)");
}

MomentumSchedule momentum_schedule(int steps, MomentumMode mode) {
    if (steps < 1) throw ConfigError("encoder needs at least one step");
    MomentumSchedule s;
    const auto T = static_cast<std::size_t>(steps);
    s.etas.resize(T + 1);
    s.gammas.assign(T, 0.0);
    switch (mode) {
        case MomentumMode::AsWritten:
            s.etas[0] = 0.0;
            for (std::size_t t = 0; t < T; ++t) s.etas[t + 1] = (1.0 + std::sqrt(1.0 + 4.0 * s.etas[t])) / 2.0;
            break;
        case MomentumMode::StandardFista:
            s.etas[0] = 1.0;
            for (std::size_t t = 0; t < T; ++t) {
                s.etas[t + 1] = (1.0 + std::sqrt(1.0 + 4.0 * s.etas[t] * s.etas[t])) / 2.0;
            }
            break;
        case MomentumMode::None:
            s.etas.assign(T + 1, 1.0);
            return s;
    }
    for (std::size_t t = 0; t < T; ++t) s.gammas[t] = (s.etas[t] - 1.0) / s.etas[t + 1];
    return s;
}

void EncoderConfig::validate() const {
    if (steps < 1) throw ConfigError("encoder steps must be >= 1");
    if (step_size_override && !(*step_size_override > 0.0)) {
        throw ConfigError("step size override must be positive");
    }
    if (!(penalty.lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
}

double spectral_norm_sq_inv(const Matrix& atoms) {
    if (atoms.size() == 0 || atoms.cwiseAbs().maxCoeff() == 0.0) {
        throw DegenerateInputError("spectral norm of a zero dictionary");
    }
    const Matrix gram = atoms.transpose() * atoms;
    // Fixed pseudo-random start: deterministic and almost surely not orthogonal
    // to the top eigenvector.
    CounterRng rng(0x5bd1e995ULL);
    Vector v(gram.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
    v.normalize();

    double rayleigh = v.dot(gram * v);
    for (int iter = 0; iter < 10000; ++iter) {
        Vector w = gram * v;
        const double norm = w.norm();
        if (norm == 0.0) {
            // Start fell in the null space; restart along the largest column.
            Eigen::Index best = 0;
            gram.diagonal().maxCoeff(&best);
            v = Vector::Unit(gram.cols(), best);
            continue;
        }
        v = w / norm;
        const double next = v.dot(gram * v);
        const bool done = std::abs(next - rayleigh) < 1e-10 * std::max(1.0, std::abs(next));
        rayleigh = next;
        if (done) break;
    }
    return 1.0 / rayleigh;
}

EncodeResult encode(const Matrix& stimuli, const Matrix& atoms, const EncoderConfig& cfg) {
    return encode(stimuli, atoms, cfg, momentum_schedule(cfg.steps, cfg.momentum_mode));
}

EncodeResult encode(const Matrix& stimuli, const Matrix& atoms, const EncoderConfig& cfg,
                    const MomentumSchedule& schedule) {
    cfg.validate();
    if (stimuli.rows() != atoms.rows()) {
        throw ContractError("stimuli have dimension " + std::to_string(stimuli.rows()) +
                            " but dictionary has " + std::to_string(atoms.rows()));
    }
    if (schedule.gammas.size() < static_cast<std::size_t>(cfg.steps)) {
        throw ConfigError("momentum schedule shorter than the step count");
    }
    const PenaltyConfig& penalty = cfg.penalty;
    penalty.validate(stimuli.cols());

    const double alpha = cfg.step_size_override ? *cfg.step_size_override : spectral_norm_sq_inv(atoms);
    const Eigen::Index m = atoms.cols();
    const Eigen::Index n = stimuli.cols();
    const Matrix gram = atoms.transpose() * atoms;
    const Matrix correlation = atoms.transpose() * stimuli;
    Matrix linear_term = -correlation;  // gradient at zero
    if (penalty.kind == PenaltyKind::WeightedL1) {
        linear_term += penalty.lambda * atom_distance_matrix(stimuli, atoms);
    }
    Matrix coupling;
    if (penalty.kind == PenaltyKind::Laplacian) {
        coupling = penalty.lambda * (*penalty.laplacian + penalty.laplacian->transpose());
    }

    EncodeResult result;
    result.step_size = alpha;
    Matrix current = Matrix::Zero(m, n);
    Matrix extrapolated = current;
    result.trace.objective_per_step.reserve(static_cast<std::size_t>(cfg.steps) + 1);
    result.trace.objective_per_step.push_back(traced_objective(stimuli, atoms, current, penalty));

    for (int t = 0; t < cfg.steps; ++t) {
        Matrix gradient = gram * extrapolated + linear_term;
        if (penalty.kind == PenaltyKind::Laplacian) gradient += extrapolated * coupling;
        Matrix next = extrapolated - alpha * gradient;

        if (uses_simplex(penalty.kind)) {
            if (!next.allFinite()) {
                throw DivergenceError("non-finite encoder iterate at step " + std::to_string(t));
            }
            project_columns_to_simplex(next, cfg.threads);
        } else {
            const double threshold = alpha * penalty.lambda;
            next = next.unaryExpr([threshold](double v) { return soft_threshold(v, threshold); });
        }
        if (!next.allFinite()) {
            throw DivergenceError("non-finite encoder iterate at step " + std::to_string(t));
        }

        const double gamma = schedule.gammas[static_cast<std::size_t>(t)];
        extrapolated = next + gamma * (next - current);
        current = std::move(next);
        result.trace.objective_per_step.push_back(traced_objective(stimuli, atoms, current, penalty));
    }
    result.codes = std::move(current);
    return result;
}

} // namespace lsc
