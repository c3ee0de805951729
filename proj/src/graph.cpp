#include "lsc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "lsc/errors.hpp"
#include "lsc/rng.hpp"

namespace lsc {

Matrix knn_adjacency(const Matrix& points, int k) {
    const Eigen::Index b = points.cols();
    if (k < 1 || k >= b) {
        throw ConfigError("knn needs 1 <= k < " + std::to_string(b) + ", got k=" + std::to_string(k));
    }
    Matrix adjacency = Matrix::Zero(b, b);
    std::vector<std::pair<double, Eigen::Index>> order(static_cast<std::size_t>(b - 1));
    for (Eigen::Index i = 0; i < b; ++i) {
        std::size_t slot = 0;
        for (Eigen::Index j = 0; j < b; ++j) {
            if (j != i) order[slot++] = {(points.col(i) - points.col(j)).squaredNorm(), j};
        }
        std::partial_sort(order.begin(), order.begin() + k, order.end());
        for (int r = 0; r < k; ++r) {
            const Eigen::Index j = order[static_cast<std::size_t>(r)].second;
            adjacency(i, j) = 1.0;
            adjacency(j, i) = 1.0;
        }
    }
    return adjacency;
}

GraphLaplacian laplacian_from_adjacency(const Matrix& weights) {
    if (weights.rows() != weights.cols()) throw ContractError("adjacency must be square");
    const double scale = std::max(1.0, weights.cwiseAbs().maxCoeff());
    if ((weights - weights.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw ContractError("adjacency is not symmetric");
    }
    if ((weights.array() < 0.0).any()) throw ContractError("adjacency has negative weights");

    GraphLaplacian g;
    g.matrix = -weights;
    g.matrix.diagonal().setZero();
    for (Eigen::Index i = 0; i < weights.rows(); ++i) {
        double degree = 0.0;
        for (Eigen::Index j = 0; j < weights.cols(); ++j) {
            if (j != i) degree += weights(i, j);
        }
        g.matrix(i, i) = degree;
    }
    return g;
}

GraphLaplacian bipartite_laplacian(const Matrix& codes) {
    if ((codes.array() < 0.0).any()) {
        throw ContractError("bipartite laplacian needs non-negative codes");
    }
    const Eigen::Index m = codes.rows();
    const Eigen::Index n = codes.cols();
    Matrix weights = Matrix::Zero(m + n, m + n);
    weights.topRightCorner(m, n) = codes;
    weights.bottomLeftCorner(n, m) = codes.transpose();
    return laplacian_from_adjacency(weights);
}

Eigendecomposition symmetric_eigendecomposition(const Matrix& symmetric, Eigen::Index max_size) {
    const Eigen::Index p = symmetric.rows();
    if (symmetric.cols() != p) throw ContractError("eigendecomposition needs a square matrix");
    if (p > max_size) {
        throw ConfigError("matrix of size " + std::to_string(p) + " exceeds eigensolver cap " +
                          std::to_string(max_size));
    }
    const double scale = symmetric.norm();
    if ((symmetric - symmetric.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, scale)) {
        throw ContractError("eigendecomposition input is not symmetric");
    }

    Matrix a = 0.5 * (symmetric + symmetric.transpose());
    Matrix v = Matrix::Identity(p, p);
    const double target = 1e-12 * scale;

    auto off_diagonal = [&] {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            for (Eigen::Index i = 0; i < p; ++i) {
                if (i != j) sum += a(i, j) * a(i, j);
            }
        }
        return std::sqrt(sum);
    };

    Eigendecomposition out;
    bool converged = off_diagonal() <= target;
    for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
        for (Eigen::Index q = 1; q < p; ++q) {
            for (Eigen::Index r = 0; r < q; ++r) {
                const double apq = a(r, q);
                if (apq == 0.0) continue;
                // Rotation zeroing a(r, q); t is the smaller root of t^2 + 2 theta t - 1.
                const double theta = (a(q, q) - a(r, r)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < p; ++k) {
                    const double akr = a(k, r), akq = a(k, q);
                    a(k, r) = c * akr - s * akq;
                    a(k, q) = s * akr + c * akq;
                }
                for (Eigen::Index k = 0; k < p; ++k) {
                    const double ark = a(r, k), aqk = a(q, k);
                    a(r, k) = c * ark - s * aqk;
                    a(q, k) = s * ark + c * aqk;
                }
                a(r, q) = a(q, r) = 0.0;
                for (Eigen::Index k = 0; k < p; ++k) {
                    const double vkr = v(k, r), vkq = v(k, q);
                    v(k, r) = c * vkr - s * vkq;
                    v(k, q) = s * vkr + c * vkq;
                }
            }
        }
        out.sweeps = sweep + 1;
        converged = off_diagonal() <= target;
    }
    if (!converged) throw NumericalError("Jacobi eigensolver did not converge in 100 sweeps");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
    out.values.resize(p);
    out.vectors.resize(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const Eigen::Index src = order[static_cast<std::size_t>(i)];
        out.values(i) = a(src, src);
        out.vectors.col(i) = v.col(src);
    }
    return out;
}

namespace {

struct KMeansRun {
    std::vector<int> labels;
    double inertia = std::numeric_limits<double>::infinity();
};

KMeansRun lloyd(const Matrix& points, int k, int max_iterations, CounterRng& rng) {
    const Eigen::Index p = points.rows();
    Matrix centers(k, points.cols());
    std::vector<double> nearest(static_cast<std::size_t>(p), std::numeric_limits<double>::infinity());

    // Farthest-point seeding from a random first center.
    Eigen::Index pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(p)));
    for (int c = 0; c < k; ++c) {
        centers.row(c) = points.row(pick);
        double farthest = -1.0;
        for (Eigen::Index i = 0; i < p; ++i) {
            auto& d = nearest[static_cast<std::size_t>(i)];
            d = std::min(d, (points.row(i) - centers.row(c)).squaredNorm());
            if (d > farthest) {
                farthest = d;
                pick = i;
            }
        }
    }

    KMeansRun run;
    run.labels.assign(static_cast<std::size_t>(p), -1);
    for (int iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        for (Eigen::Index i = 0; i < p; ++i) {
            int best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                const double d = (points.row(i) - centers.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (run.labels[static_cast<std::size_t>(i)] != best) {
                run.labels[static_cast<std::size_t>(i)] = best;
                changed = true;
            }
        }

        std::vector<Eigen::Index> sizes(static_cast<std::size_t>(k), 0);
        Matrix sums = Matrix::Zero(k, points.cols());
        for (Eigen::Index i = 0; i < p; ++i) {
            const int c = run.labels[static_cast<std::size_t>(i)];
            sums.row(c) += points.row(i);
            ++sizes[static_cast<std::size_t>(c)];
        }
        for (int c = 0; c < k; ++c) {
            if (sizes[static_cast<std::size_t>(c)] > 0) {
                centers.row(c) = sums.row(c) / static_cast<double>(sizes[static_cast<std::size_t>(c)]);
                continue;
            }
            // Empty cluster: steal the point farthest from its center.
            Eigen::Index worst = 0;
            double worst_d = -1.0;
            for (Eigen::Index i = 0; i < p; ++i) {
                const int own = run.labels[static_cast<std::size_t>(i)];
                if (sizes[static_cast<std::size_t>(own)] <= 1) continue;
                const double d = (points.row(i) - centers.row(own)).squaredNorm();
                if (d > worst_d) {
                    worst_d = d;
                    worst = i;
                }
            }
            --sizes[static_cast<std::size_t>(run.labels[static_cast<std::size_t>(worst)])];
            run.labels[static_cast<std::size_t>(worst)] = c;
            sizes[static_cast<std::size_t>(c)] = 1;
            centers.row(c) = points.row(worst);
            changed = true;
        }
        if (!changed) break;
    }

    run.inertia = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
        run.inertia += (points.row(i) - centers.row(run.labels[static_cast<std::size_t>(i)])).squaredNorm();
    }
    return run;
}

} // namespace

ClusterAssignment kmeans_rows(const Matrix& points, int k, const KMeansOptions& options) {
    const Eigen::Index p = points.rows();
    if (k < 1 || k > p) {
        throw ConfigError("cluster count must satisfy 1 <= k <= " + std::to_string(p));
    }
    CounterRng rng(derive_seed(options.seed, 0x6b6d65616e73ULL));
    KMeansRun best;
    for (int r = 0; r < std::max(1, options.restarts); ++r) {
        KMeansRun run = lloyd(points, k, options.max_iterations, rng);
        if (run.inertia < best.inertia) best = std::move(run);
    }

    // Relabel by first appearance so output does not depend on restart order.
    std::vector<int> remap(static_cast<std::size_t>(k), -1);
    int next = 0;
    ClusterAssignment out;
    out.k = k;
    out.labels.resize(static_cast<std::size_t>(p));
    for (Eigen::Index i = 0; i < p; ++i) {
        int& slot = remap[static_cast<std::size_t>(best.labels[static_cast<std::size_t>(i)])];
        if (slot < 0) slot = next++;
        out.labels[static_cast<std::size_t>(i)] = slot;
    }
    return out;
}

ClusterAssignment spectral_cluster(const GraphLaplacian& laplacian, int k, std::uint64_t seed) {
    const Eigen::Index p = laplacian.num_vertices();
    if (k < 1 || k > p) {
        throw ConfigError("cluster count must satisfy 1 <= k <= " + std::to_string(p));
    }
    if (k == 1) return ClusterAssignment{std::vector<int>(static_cast<std::size_t>(p), 0), 1};
    const Eigendecomposition eig = symmetric_eigendecomposition(laplacian.matrix);
    KMeansOptions options;
    options.seed = seed;
    return kmeans_rows(eig.vectors.leftCols(k), k, options);
}

std::string cluster_csv(const ClusterAssignment& assignment, Eigen::Index num_atoms) {
    std::ostringstream out;
    out << "vertex_id,side,label\n";
    for (std::size_t i = 0; i < assignment.labels.size(); ++i) {
        const bool atom = static_cast<Eigen::Index>(i) < num_atoms;
        out << i << ',' << (atom ? "atom" : "stimulus") << ',' << assignment.labels[i] << '\n';
    }
    return out.str();
}

} // namespace lsc
