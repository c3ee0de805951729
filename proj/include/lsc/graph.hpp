#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lsc/tensor.hpp"

namespace lsc {

/// Symmetric p x p matrix D - W with zero row sums.
struct GraphLaplacian {
    Matrix matrix;
    Eigen::Index num_vertices() const noexcept { return matrix.rows(); }
};

struct ClusterAssignment {
    std::vector<int> labels;
    int k = 0;
};

struct Eigendecomposition {
    Vector values;   // ascending
    Matrix vectors;  // column i pairs with values(i)
    int sweeps = 0;
};

/// Binary kNN adjacency on the columns of `points`, symmetrized by union.
/// Distance ties resolve toward the lower index.
Matrix knn_adjacency(const Matrix& points, int k);

GraphLaplacian laplacian_from_adjacency(const Matrix& weights);

/// Laplacian on m + n vertices: atoms first, then stimuli; the weight between
/// atom j and stimulus i is codes(j, i).
GraphLaplacian bipartite_laplacian(const Matrix& codes);

inline constexpr Eigen::Index kDefaultEigenCap = 2048;

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// 1e-12 ||M||_F; at most 100 sweeps.
Eigendecomposition symmetric_eigendecomposition(const Matrix& symmetric,
                                                Eigen::Index max_size = kDefaultEigenCap);

struct KMeansOptions {
    int restarts = 20;
    int max_iterations = 100;
    std::uint64_t seed = 0;
};

/// Lloyd's k-means on the rows of `points` with farthest-point seeding; the
/// restart with the lowest inertia wins.
ClusterAssignment kmeans_rows(const Matrix& points, int k, const KMeansOptions& options = {});

/// Unnormalized spectral clustering: k-means on the rows of the k
/// lowest-eigenvalue eigenvectors.
ClusterAssignment spectral_cluster(const GraphLaplacian& laplacian, int k, std::uint64_t seed = 0);

/// CSV `vertex_id,side,label`. With `num_atoms` > 0 the first vertices are
/// labelled "atom" and the rest "stimulus".
std::string cluster_csv(const ClusterAssignment& assignment, Eigen::Index num_atoms);

} // namespace lsc
