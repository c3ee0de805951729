#include "lsc/rf_eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "lsc/errors.hpp"
#include "lsc/format.hpp"
#include "lsc/rng.hpp"

namespace lsc {

using std::numbers::pi;

std::vector<ReceptiveField> sta_receptive_fields(const ResponseFn& respond, int patch_side,
                                                 const StaOptions& options) {
    if (options.num_samples < 1) throw ConfigError("STA needs at least one sample");
    if (patch_side < 1) throw ConfigError("patch_side must be positive");
    const Eigen::Index d = static_cast<Eigen::Index>(patch_side) * patch_side;
    const std::size_t chunk = std::max<std::size_t>(1, options.chunk);

    CounterRng rng(options.seed);
    Matrix weighted;  // d x m: sum_s y_s x_j(y_s)
    Vector mass;      // m: sum_s |x_j(y_s)|
    for (std::size_t done = 0; done < options.num_samples; done += chunk) {
        const auto count = static_cast<Eigen::Index>(std::min(chunk, options.num_samples - done));
        Matrix noise(d, count);
        for (Eigen::Index s = 0; s < count; ++s) {
            for (Eigen::Index i = 0; i < d; ++i) noise(i, s) = rng.normal();
        }
        const Matrix responses = respond(noise);
        if (responses.cols() != count) {
            throw ContractError("response function returned " + std::to_string(responses.cols()) +
                                " columns for " + std::to_string(count) + " stimuli");
        }
        if (weighted.size() == 0) {
            weighted = Matrix::Zero(d, responses.rows());
            mass = Vector::Zero(responses.rows());
        } else if (responses.rows() != weighted.cols()) {
            throw ContractError("response function changed its output size");
        }
        weighted.noalias() += noise * responses.transpose();
        mass += responses.cwiseAbs().rowwise().sum();
    }

    std::vector<ReceptiveField> fields;
    fields.reserve(static_cast<std::size_t>(weighted.cols()));
    for (Eigen::Index j = 0; j < weighted.cols(); ++j) {
        ReceptiveField rf;
        rf.neuron_id = static_cast<int>(j);
        rf.image = Tensor({static_cast<std::size_t>(patch_side), static_cast<std::size_t>(patch_side)});
        if (mass(j) >= 1e-9) {
            rf.total_response = mass(j);
            for (Eigen::Index i = 0; i < d; ++i) {
                rf.image[static_cast<std::size_t>(i)] = weighted(i, j) / mass(j);
            }
        }
        fields.push_back(std::move(rf));
    }
    return fields;
}

std::vector<ReceptiveField> atom_receptive_fields(const Matrix& atoms, int patch_side) {
    if (static_cast<Eigen::Index>(patch_side) * patch_side != atoms.rows()) {
        throw ContractError("dictionary rows " + std::to_string(atoms.rows()) +
                            " are not patch_side^2 for side " + std::to_string(patch_side));
    }
    std::vector<ReceptiveField> fields;
    for (Eigen::Index j = 0; j < atoms.cols(); ++j) {
        ReceptiveField rf;
        rf.neuron_id = static_cast<int>(j);
        rf.image = Tensor({static_cast<std::size_t>(patch_side), static_cast<std::size_t>(patch_side)});
        for (Eigen::Index i = 0; i < atoms.rows(); ++i) rf.image[static_cast<std::size_t>(i)] = atoms(i, j);
        rf.total_response = atoms.col(j).norm();
        fields.push_back(std::move(rf));
    }
    return fields;
}

// ---------------------------------------------------------------------------
// Gabor model

namespace {

enum Slot { kK, kU0, kV0, kTheta, kSx, kSy, kF, kPhi, kSlots };
using Params = Eigen::Matrix<double, kSlots, 1>;

Params pack(const GaborParams& g) {
    Params p;
    p << g.amplitude, g.u0, g.v0, g.theta, g.sigma_x, g.sigma_y, g.freq, g.phase;
    return p;
}

GaborParams unpack(const Params& p) {
    GaborParams g;
    g.amplitude = p(kK);
    g.u0 = p(kU0);
    g.v0 = p(kV0);
    g.theta = p(kTheta);
    g.sigma_x = p(kSx);
    g.sigma_y = p(kSy);
    g.freq = p(kF);
    g.phase = p(kPhi);
    return g;
}

/// Model values on the grid and, optionally, the Jacobian (pixels x 8).
void evaluate(const Params& p, int side, Vector& model, Matrix* jacobian) {
    const Eigen::Index n = static_cast<Eigen::Index>(side) * side;
    model.resize(n);
    if (jacobian) jacobian->resize(n, kSlots);
    const double ct = std::cos(p(kTheta)), st = std::sin(p(kTheta));
    const double sx2 = p(kSx) * p(kSx), sy2 = p(kSy) * p(kSy);
    const double k = p(kK), w = 2.0 * pi * p(kF);
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            const Eigen::Index i = static_cast<Eigen::Index>(r) * side + c;
            const double du = c - p(kU0), dv = r - p(kV0);
            const double up = du * ct + dv * st;
            const double vp = -du * st + dv * ct;
            const double env = std::exp(-(up * up / (2.0 * sx2) + vp * vp / (2.0 * sy2)));
            const double arg = w * up + p(kPhi);
            const double cs = std::cos(arg), sn = std::sin(arg);
            model(i) = k * env * cs;
            if (!jacobian) continue;
            const double d_up = k * env * (-up / sx2 * cs - w * sn);
            const double d_vp = k * env * (-vp / sy2 * cs);
            auto row = jacobian->row(i);
            row(kK) = env * cs;
            row(kU0) = -ct * d_up + st * d_vp;
            row(kV0) = -st * d_up - ct * d_vp;
            row(kTheta) = vp * d_up - up * d_vp;
            row(kSx) = k * env * cs * up * up / (p(kSx) * sx2);
            row(kSy) = k * env * cs * vp * vp / (p(kSy) * sy2);
            row(kF) = -k * env * sn * 2.0 * pi * up;
            row(kPhi) = -k * env * sn;
        }
    }
}

void center(Vector& v) { v.array() -= v.mean(); }

void center_columns(Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j).array() -= m.col(j).mean();
}

struct Bounds {
    double min_freq, max_freq, min_sigma, max_sigma, min_center, max_center;
};

/// Box for the search: frequency at least a quarter cycle across the patch,
/// below 0.5 cycles/pixel; widths and center within a patch-sized margin.
Bounds search_bounds(int side) {
    return {0.25 / side, 0.5, 0.3, 2.0 * side, -0.5 * side, 1.5 * side};
}

Params project(Params p, const Bounds& b) {
    p(kF) = std::clamp(p(kF), b.min_freq, b.max_freq);
    p(kSx) = std::clamp(p(kSx), b.min_sigma, b.max_sigma);
    p(kSy) = std::clamp(p(kSy), b.min_sigma, b.max_sigma);
    p(kU0) = std::clamp(p(kU0), b.min_center, b.max_center);
    p(kV0) = std::clamp(p(kV0), b.min_center, b.max_center);
    return p;
}

double centered_sse(const Params& p, int side, const Vector& target) {
    Vector model;
    evaluate(p, side, model, nullptr);
    center(model);
    return (model - target).squaredNorm();
}

struct Refined {
    Params params;
    double sse = 0.0;
    bool step_met = false;
    int iterations = 0;
};

Refined levenberg_marquardt(Params p, int side, const Vector& target, const GaborFitOptions& opt) {
    Refined out;
    const Bounds bounds = search_bounds(side);
    Vector model;
    Matrix jac;
    p = project(p, bounds);
    double sse = centered_sse(p, side, target);
    const double floor = 1e-28 * std::max(target.squaredNorm(), 1e-300);
    double mu = 1e-3;

    int iter = 0;
    for (; iter < opt.max_iterations; ++iter) {
        if (sse <= floor) {
            out.step_met = true;
            break;
        }
        evaluate(p, side, model, &jac);
        center(model);
        center_columns(jac);
        const Vector residual = model - target;
        const Matrix normal = jac.transpose() * jac;
        const Vector gradient = jac.transpose() * residual;
        const Vector scale = normal.diagonal().cwiseMax(1e-12);

        bool accepted = false;
        double moved = 0.0;
        while (mu < 1e12) {
            Matrix damped = normal;
            damped.diagonal() += mu * scale;
            const Params candidate = project(p + damped.ldlt().solve(-gradient), bounds);
            if (candidate.allFinite()) {
                const double next = centered_sse(candidate, side, target);
                if (next < sse) {
                    moved = (candidate - p).norm();
                    p = candidate;
                    sse = next;
                    mu = std::max(mu / 3.0, 1e-12);
                    accepted = true;
                    break;
                }
            }
            mu *= 4.0;
        }
        // No improving step under heavy damping, or a negligible one: stationary.
        if (!accepted || moved <= opt.step_tolerance * (p.norm() + opt.step_tolerance)) {
            out.step_met = true;
            ++iter;
            break;
        }
    }
    out.params = p;
    out.sse = sse;
    out.iterations = iter;
    return out;
}

double wrap_pi(double a) {
    // (-pi, pi]
    a = std::fmod(a, 2.0 * pi);
    if (a <= -pi) a += 2.0 * pi;
    if (a > pi) a -= 2.0 * pi;
    return a;
}

} // namespace

Tensor render_gabor(const GaborParams& params, int side) {
    Vector model;
    evaluate(pack(params), side, model, nullptr);
    Tensor image({static_cast<std::size_t>(side), static_cast<std::size_t>(side)});
    for (Eigen::Index i = 0; i < model.size(); ++i) image[static_cast<std::size_t>(i)] = model(i);
    return image;
}

GaborParams canonicalize(GaborParams g) {
    g.sigma_x = std::abs(g.sigma_x);
    g.sigma_y = std::abs(g.sigma_y);
    if (g.freq < 0.0) {
        g.freq = -g.freq;
        g.phase = -g.phase;
    }
    if (g.amplitude < 0.0) {
        g.amplitude = -g.amplitude;
        g.phase += pi;
    }
    // theta -> theta + pi flips u' and v', i.e. phi -> -phi.
    const double turns = std::floor(g.theta / pi);
    g.theta -= turns * pi;
    if (g.theta >= pi) g.theta -= pi;
    if (static_cast<long long>(turns) % 2 != 0) g.phase = -g.phase;
    g.phase = wrap_pi(g.phase);
    return g;
}

GaborParams gabor_fit(const ReceptiveField& rf, const GaborFitOptions& options) {
    if (rf.image.rank() != 2 || rf.image.dim(0) != rf.image.dim(1)) {
        throw ContractError("receptive field must be a square image");
    }
    const int side = static_cast<int>(rf.image.dim(0));
    const Eigen::Index n = static_cast<Eigen::Index>(side) * side;
    Vector raw(n);
    for (Eigen::Index i = 0; i < n; ++i) raw(i) = rf.image[static_cast<std::size_t>(i)];
    const double raw_norm = raw.norm();
    if (raw_norm == 0.0) throw DegenerateInputError("cannot fit a Gabor to an all-zero field");

    Vector target = raw;
    center(target);
    const double target_norm = target.norm();

    Eigen::Index peak = 0;
    target.cwiseAbs().maxCoeff(&peak);
    const double peak_u = static_cast<double>(peak % side);
    const double peak_v = static_cast<double>(peak / side);
    const double sigma0 = side / 4.0;

    GaborParams fallback;
    fallback.neuron_id = rf.neuron_id;
    fallback.u0 = peak_u;
    fallback.v0 = peak_v;
    fallback.sigma_x = fallback.sigma_y = sigma0;
    fallback.freq = 0.05;
    if (target_norm <= 1e-12 * raw_norm) {
        // Constant field: nothing oscillatory to fit.
        fallback.residual = 1.0;
        return fallback;
    }

    struct Candidate {
        double sse;
        int theta_idx, freq_idx;
        Params params;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(12 * 8 * 8);
    Vector model;
    for (int ti = 0; ti < 12; ++ti) {
        for (int fi = 0; fi < 8; ++fi) {
            for (int pi_idx = 0; pi_idx < 8; ++pi_idx) {
                Params p;
                p << 1.0, peak_u, peak_v, ti * pi / 12.0, sigma0, sigma0,
                    0.05 * std::pow(0.45 / 0.05, fi / 7.0), pi_idx * pi / 8.0;
                evaluate(p, side, model, nullptr);
                center(model);
                const double gg = model.squaredNorm();
                if (gg <= 1e-300) continue;
                const double gt = model.dot(target);
                p(kK) = gt / gg;
                candidates.push_back({target.squaredNorm() - gt * gt / gg, ti, fi, p});
            }
        }
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.sse < b.sse; });

    // Refine the best few candidates with distinct (orientation, frequency).
    std::vector<const Candidate*> starts;
    for (const Candidate& c : candidates) {
        if (static_cast<int>(starts.size()) >= options.refine_starts) break;
        const bool seen = std::any_of(starts.begin(), starts.end(), [&](const Candidate* s) {
            return s->theta_idx == c.theta_idx && s->freq_idx == c.freq_idx;
        });
        if (!seen) starts.push_back(&c);
    }

    Refined best;
    best.sse = std::numeric_limits<double>::infinity();
    for (const Candidate* start : starts) {
        Refined r = levenberg_marquardt(start->params, side, target, options);
        if (r.sse < best.sse) best = r;
    }
    if (!std::isfinite(best.sse)) {
        fallback.residual = 1.0;
        return fallback;
    }

    GaborParams fit = canonicalize(unpack(best.params));
    fit.neuron_id = rf.neuron_id;
    fit.iterations = best.iterations;
    fit.residual = std::sqrt(best.sse) / target_norm;
    fit.converged = fit.residual < options.converged_residual && best.step_met && fit.freq > 0.0;
    return fit;
}

double fold_phase(double phase_rad) {
    double r = std::fmod(phase_rad, pi);
    if (r < 0.0) r += pi;
    if (r >= pi) r -= pi;
    if (r > pi / 2.0) r = pi - r;
    return r * 180.0 / pi;
}

std::size_t PhaseHistogram::total() const noexcept {
    std::size_t sum = 0;
    for (std::size_t c : counts) sum += c;
    return sum;
}

PhaseHistogram phase_histogram(const std::vector<GaborParams>& params, int num_bins) {
    if (num_bins < 2) throw ConfigError("phase histogram needs at least 2 bins");
    PhaseHistogram h;
    h.bin_edges.resize(static_cast<std::size_t>(num_bins) + 1);
    for (int i = 0; i <= num_bins; ++i) h.bin_edges[static_cast<std::size_t>(i)] = 90.0 * i / num_bins;
    h.counts.assign(static_cast<std::size_t>(num_bins), 0);
    for (const GaborParams& g : params) {
        if (!g.converged) {
            ++h.excluded;
            continue;
        }
        const double deg = fold_phase(g.phase);
        auto bin = static_cast<int>(std::floor(deg / 90.0 * num_bins));
        bin = std::clamp(bin, 0, num_bins - 1);  // 90 degrees lands in the last bin
        ++h.counts[static_cast<std::size_t>(bin)];
    }
    if (h.total() == 0) throw EmptyHistogramError("no converged Gabor fits to histogram");
    return h;
}

double mass_fraction(const PhaseHistogram& h, double lo_deg, double hi_deg) {
    const double total = static_cast<double>(h.total());
    if (total == 0.0) throw EmptyHistogramError("mass fraction of an empty histogram");
    double mass = 0.0;
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        const double lo = h.bin_edges[b], hi = h.bin_edges[b + 1];
        const double overlap = std::max(0.0, std::min(hi, hi_deg) - std::max(lo, lo_deg));
        mass += static_cast<double>(h.counts[b]) * overlap / (hi - lo);
    }
    return mass / total;
}

double symmetry_score(const PhaseHistogram& h) {
    if (h.counts.empty()) throw EmptyHistogramError("symmetry of an empty histogram");
    const double left = mass_fraction(h, 0.0, 45.0);
    const double right = mass_fraction(h, 45.0, 90.0);
    const double hi = std::max(left, right);
    if (hi == 0.0) throw EmptyHistogramError("symmetry of an empty histogram");
    return std::min(left, right) / hi;
}

std::pair<double, double> shape_metrics(const GaborParams& params) {
    if (!params.converged) throw ContractError("shape metrics need a converged Gabor fit");
    return {params.sigma_x * params.freq, params.sigma_y * params.freq};
}

std::string gabor_csv(const std::vector<GaborParams>& params) {
    std::ostringstream out;
    out << "neuron_id,K,u0,v0,theta_rad,sigma_x,sigma_y,freq,phase_rad,phase_folded_deg,n_x,n_y,residual,"
           "converged\n";
    for (const GaborParams& g : params) {
        const double nx = g.sigma_x * g.freq, ny = g.sigma_y * g.freq;
        out << g.neuron_id << ',' << fmt_double(g.amplitude) << ',' << fmt_double(g.u0) << ','
            << fmt_double(g.v0) << ',' << fmt_double(g.theta) << ',' << fmt_double(g.sigma_x) << ','
            << fmt_double(g.sigma_y) << ',' << fmt_double(g.freq) << ',' << fmt_double(g.phase) << ','
            << fmt_double(fold_phase(g.phase)) << ',' << fmt_double(nx) << ',' << fmt_double(ny) << ','
            << fmt_double(g.residual) << ',' << (g.converged ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string histogram_csv(const PhaseHistogram& h) {
    std::ostringstream out;
    out << "bin_lo_deg,bin_hi_deg,count\n";
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        out << fmt_double(h.bin_edges[b]) << ',' << fmt_double(h.bin_edges[b + 1]) << ',' << h.counts[b] << '\n';
    }
    return out.str();
}

} // namespace lsc
