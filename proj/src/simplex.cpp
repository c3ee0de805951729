#include "lsc/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "lsc/errors.hpp"
#include "lsc/parallel.hpp"

namespace lsc {

double simplex_shift(const Vector& x) {
    if (x.size() < 1) throw ContractError("cannot project an empty vector");
    if (!x.allFinite()) throw ContractError("simplex projection of non-finite input");

    std::vector<double> u(x.data(), x.data() + x.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double prefix = 0.0;
    double shift = 1.0 - u[0];
    for (std::size_t j = 0; j < u.size(); ++j) {
        prefix += u[j];
        const double candidate = (1.0 - prefix) / static_cast<double>(j + 1);
        if (u[j] + candidate > 0.0) shift = candidate;
    }
    return shift;
}

Vector project_simplex(const Vector& x) {
    const double shift = simplex_shift(x);
    Vector z = (x.array() + shift).cwiseMax(0.0);
    // Clip-and-shift leaves only rounding-level error in the sum.
    const double total = z.sum();
    if (total > 0.0) z /= total;
    return z;
}

void project_columns_to_simplex(Matrix& codes, int threads) {
    parallel_for(codes.cols(), threads, [&](Eigen::Index j) {
        codes.col(j) = project_simplex(codes.col(j));
    });
}

bool on_simplex(const Vector& x, double tol) {
    return x.size() > 0 && (x.array() >= 0.0).all() && std::abs(x.sum() - 1.0) <= tol;
}

Vector atom_distances(const Vector& stimulus, const Matrix& atoms) {
    if (stimulus.size() != atoms.rows()) {
        throw ContractError("stimulus of length " + std::to_string(stimulus.size()) +
                            " does not match dictionary rows " + std::to_string(atoms.rows()));
    }
    Vector out(atoms.cols());
    for (Eigen::Index j = 0; j < atoms.cols(); ++j) out(j) = (stimulus - atoms.col(j)).squaredNorm();
    return out;
}

double quadratic_neuron(const Vector& stimulus, const Matrix& atoms) {
    return atom_distances(stimulus, atoms).sum();
}

} // namespace lsc
