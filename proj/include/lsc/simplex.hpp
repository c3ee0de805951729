#pragma once

#include "lsc/tensor.hpp"

namespace lsc {

/// Shift b(x) such that max(x + b, 0) lies on the probability simplex.
///
/// Sort descending into u, take rho = max{j : u_j + (1 - sum_{k<=j} u_k)/j > 0}
/// and b = (1 - sum_{k<=rho} u_k)/rho. Ties need no special handling.
double simplex_shift(const Vector& x);

/// Euclidean projection onto {z : z >= 0, sum z = 1}, i.e. ReLU(x + b(x) 1).
Vector project_simplex(const Vector& x);

/// Projects every column of `codes` in place.
void project_columns_to_simplex(Matrix& codes, int threads = 1);

bool on_simplex(const Vector& x, double tol = 1e-12);

/// (||y - a_j||^2)_j for each atom.
Vector atom_distances(const Vector& stimulus, const Matrix& atoms);

/// sum_j ||y - a_j||^2.
double quadratic_neuron(const Vector& stimulus, const Matrix& atoms);

} // namespace lsc
