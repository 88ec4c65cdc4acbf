#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qfint/cluster.hpp"
#include "qfint/errors.hpp"
#include "qfint/interp.hpp"
#include "qfint/model.hpp"
#include "qfint/oracle.hpp"
#include "qfint/symmat.hpp"

namespace qfint::apps {

using Edge = std::pair<std::size_t, std::size_t>;  // 0-based point indices, first < second

/// s_pts points in ℝ^d (n = d·s_pts) with a repulsion term 1 + α‖v_i − v_j‖² per edge.
struct PotentialSpec {
    std::size_t d = 1;
    std::size_t points = 0;
    std::vector<Edge> edges;
    double alpha = 0.0;
    /// Optional per-edge strengths, parallel to `edges`; overrides `alpha`.
    std::vector<double> edge_alpha;

    std::size_t n() const noexcept { return d * points; }
};

inline std::vector<Edge> complete_edges(std::size_t points) {
    std::vector<Edge> e;
    for (std::size_t i = 0; i < points; ++i)
        for (std::size_t j = i + 1; j < points; ++j) e.emplace_back(i, j);
    return e;
}

inline void validate(const PotentialSpec& spec) {
    if (spec.d == 0) throw std::invalid_argument("point dimension d must be positive");
    if (!spec.edge_alpha.empty() && spec.edge_alpha.size() != spec.edges.size())
        throw std::invalid_argument("edge_alpha must have one entry per edge");
    std::vector<Edge> seen;
    for (const auto& [i, j] : spec.edges) {
        if (i >= j) throw std::invalid_argument("edge {" + std::to_string(i) + "," + std::to_string(j) + "}: need i < j");
        if (j >= spec.points)
            throw std::out_of_range("edge {" + std::to_string(i) + "," + std::to_string(j) + "} exceeds " +
                                    std::to_string(spec.points) + " points");
        seen.emplace_back(i, j);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
        throw std::invalid_argument("duplicate edge in potential spec");
}

/// The matrix of q(x) = a·‖v_i − v_j‖²: 2a on both diagonal d-blocks, −2a on the off-diagonal ones.
inline SymMatrix pair_form(std::size_t d, std::size_t points, Edge e, double a) {
    std::vector<Triplet> t;
    for (std::size_t c = 0; c < d; ++c) {
        const std::size_t xi = e.first * d + c;
        const std::size_t xj = e.second * d + c;
        t.push_back({xi, xi, 2.0 * a});
        t.push_back({xi, xj, -2.0 * a});
        t.push_back({xj, xj, 2.0 * a});
    }
    return SymMatrix::from_triplets(d * points, t);
}

inline Instance build_potential_instance(const PotentialSpec& spec) {
    validate(spec);
    std::vector<SymMatrix> forms;
    forms.reserve(spec.edges.size());
    for (std::size_t e = 0; e < spec.edges.size(); ++e) {
        const double a = spec.edge_alpha.empty() ? spec.alpha : spec.edge_alpha[e];
        forms.push_back(pair_form(spec.d, spec.points, spec.edges[e], a));
    }
    return build_instance(spec.n(), std::move(forms));
}

/// Largest uniform α for which the potential instance passes check_admissible(cfg).
/// Each pair form has ½‖Q‖ = 2α, so α = bound/2.
inline double max_alpha_admissible(const PotentialSpec& spec, const ToleranceConfig& cfg) {
    if (spec.edges.empty()) throw std::invalid_argument("max_alpha_admissible: no edges");
    PotentialSpec unit = spec;
    unit.alpha = 1.0;
    unit.edge_alpha.clear();
    const Instance inst = build_potential_instance(unit);
    return 0.5 * admissibility_bound(inst, locality_params(inst), cfg);
}

/// Parameters of the feasibility score for m uniform-strength forms normalized to Σ q_k = ‖x‖²/2.
struct FeasibilityParams {
    double alpha = 0.0;
    double beta = 0.0;  // root of 2m(1/β − 1/α) = n/(1−β) in (0, 1)
    double t = 0.0;     // 1/β − 1/α
    double log_v_max = 0.0;
    double v_max = 0.0;  // may overflow to inf; use log_v_max
    double residual = 0.0;
};

/**
 * Solves 2m(1/β − 1/α) = n/(1 − β) on (0, 1) by bisection.  The left side
 * decreases from +∞ and the right side increases to +∞, so the root is unique.
 * The left side is evaluated as 2m(α − β)/(αβ) to avoid cancellation.
 */
inline FeasibilityParams solve_beta(std::size_t m, std::size_t n, double alpha) {
    if (m == 0 || n == 0) throw std::invalid_argument("solve_beta: m and n must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("solve_beta: alpha must be positive");
    const double dm = static_cast<double>(m), dn = static_cast<double>(n);
    auto g = [&](double b) { return 2.0 * dm * (alpha - b) / (alpha * b) - dn / (1.0 - b); };

    double lo = 0.0, hi = 1.0;
    double root = 0.5;
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double v = g(mid);
        root = mid;
        if (v == 0.0) break;
        (v > 0.0 ? lo : hi) = mid;
    }
    // take whichever bracketing point has the smaller residual
    for (double c : {lo, hi})
        if (c > 0.0 && c < 1.0 && std::abs(g(c)) < std::abs(g(root))) root = c;

    FeasibilityParams p;
    p.alpha = alpha;
    p.beta = root;
    p.t = 1.0 / root - 1.0 / alpha;
    p.residual = std::abs(g(root));
    p.log_v_max = dm * (std::log(alpha) - std::log(root) + root / alpha - 1.0) - 0.5 * dn * std::log1p(-root);
    p.v_max = std::exp(p.log_v_max);
    return p;
}

/// Σ_k [ln(1 + α q_k(x)) − β q_k(x)]; bounded above by m·ln(α/β·e^{β/α−1}) for PSD forms when β < α.
inline double log_damped_product(const Instance& inst, double alpha, double beta, std::span<const double> x) {
    double acc = 0.0;
    for (const auto& f : inst.forms()) {
        const double q = eval_form(f.matrix, x);
        acc += std::log1p(alpha * q) - beta * q;
    }
    return acc;
}

/// Throws NormalizationError unless every form is PSD and Σ Q_k = I entrywise within tol.
inline void check_normalized(const Instance& inst, double tol = 1e-9) {
    const std::size_t n = inst.n();
    std::vector<double> sum(n * n, 0.0);
    for (std::size_t k = 0; k < inst.m(); ++k) {
        const SymMatrix& q = inst.matrix(k);
        for (std::size_t i = 0; i < n * n; ++i) sum[i] += q.data()[i];
        const auto eig = symmetric_eigen(q);
        if (!eig.values.empty() && eig.values.front() < -tol * std::max(1.0, inst.forms()[k].norm))
            throw NormalizationError("form " + std::to_string(k) + " is not positive semidefinite (min eigenvalue " +
                                     std::to_string(eig.values.front()) + ")");
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double want = i == j ? 1.0 : 0.0;
            if (std::abs(sum[i * n + j] - want) > tol)
                throw NormalizationError("sum of forms differs from the identity at (" + std::to_string(i) + "," +
                                         std::to_string(j) + "): " + std::to_string(sum[i * n + j]));
        }
    }
}

/// Congruence by S^{-1/2}, S = Σ Q_k, so the result sums to the identity.
/// Throws NormalizationError when S is not positive definite.
inline Instance normalize_instance(const Instance& inst) {
    const std::size_t n = inst.n();
    std::vector<double> sum(n * n, 0.0);
    for (const auto& f : inst.forms())
        for (std::size_t i = 0; i < n * n; ++i) sum[i] += f.matrix.data()[i];
    const auto eig = symmetric_eigen(SymMatrix::from_dense(n, sum));
    if (eig.values.empty() || !(eig.values.front() > 1e-12 * std::max(1.0, std::abs(eig.values.back()))))
        throw NormalizationError("sum of forms is not positive definite");

    // W = V diag(λ^{-1/2}) Vᵀ
    std::vector<double> w(n * n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = 1.0 / std::sqrt(eig.values[k]);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) w[i * n + j] += s * eig.vectors[i * n + k] * eig.vectors[j * n + k];
    }
    std::vector<SymMatrix> out;
    std::vector<double> tmp(n * n), res(n * n);
    for (const auto& f : inst.forms()) {
        const auto q = f.matrix.data();
        std::fill(tmp.begin(), tmp.end(), 0.0);
        std::fill(res.begin(), res.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < n; ++l)
                for (std::size_t j = 0; j < n; ++j) tmp[i * n + j] += w[i * n + l] * q[l * n + j];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < n; ++l)
                for (std::size_t j = 0; j < n; ++j) res[i * n + j] += tmp[i * n + l] * w[l * n + j];
        out.push_back(SymMatrix::from_dense(n, res));
    }
    return build_instance(n, std::move(out));
}

enum class Backend { interp, oracle, monte_carlo };

inline const char* to_string(Backend b) {
    switch (b) {
        case Backend::interp: return "interp";
        case Backend::oracle: return "oracle";
        case Backend::monte_carlo: return "mc";
    }
    return "?";
}

struct FeasibilityOptions {
    Backend backend = Backend::interp;
    ToleranceConfig cfg;
    ClusterOptions cluster;
    std::uint64_t mc_samples = 1'000'000;
    std::uint64_t mc_seed = 1;
};

struct FeasibilityReport {
    FeasibilityParams params;
    Backend backend = Backend::interp;
    double integral = 0.0;
    double log_integral = 0.0;
    /// ln(integral / v_max); ≤ 0 up to approximation error.
    double log_score = 0.0;
    double score = 0.0;
    std::optional<Estimate> estimate;     // interp backend
    std::optional<oracle::MCResult> mc;  // mc backend
    std::string interpretation;
};

/**
 * Scores how close the system q_k(x) = 1, k = 1..m, is to having many
 * near-solutions: the Gaussian average of ∏(1 + α q_k) against its ceiling
 * v_max.  The input must already be normalized (PSD forms summing to I).
 */
inline FeasibilityReport feasibility_report(const Instance& inst, double alpha, double epsilon,
                                            const FeasibilityOptions& opts = {}) {
    check_normalized(inst);
    if (inst.m() == 0) throw NormalizationError("feasibility needs at least one form");
    FeasibilityReport rep;
    rep.backend = opts.backend;
    rep.params = solve_beta(inst.m(), inst.n(), alpha);
    const Instance scaled = inst.scaled(alpha);

    switch (opts.backend) {
        case Backend::interp: {
            rep.estimate = integrate(scaled, opts.cfg, epsilon, opts.cluster);
            rep.log_integral = rep.estimate->log_value;
            break;
        }
        case Backend::oracle: {
            const double v = oracle::exact_value(scaled, 1.0).real();
            rep.log_integral = std::log(v);
            break;
        }
        case Backend::monte_carlo: {
            oracle::MCOptions mo;
            mo.threads = opts.cluster.threads;
            rep.mc = oracle::mc_estimate(scaled, opts.mc_samples, opts.mc_seed, mo);
            rep.log_integral = std::log(rep.mc->mean);
            break;
        }
    }
    rep.integral = std::exp(rep.log_integral);
    rep.log_score = rep.log_integral - rep.params.log_v_max;
    rep.score = std::exp(rep.log_score);
    rep.interpretation =
        "score = integral / v_max lies in (0, 1]; values near 1 point to many near-solutions of q_k(x) = 1, "
        "small values to a system far from feasible (heuristic, no hard threshold)";
    return rep;
}

}  // namespace qfint::apps
