#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "qfint/errors.hpp"
#include "qfint/symmat.hpp"

namespace qfint {

/// Radius of the guaranteed zero-free disk, ¼·e^{-1/2}.
inline const double kGamma = 0.25 * std::exp(-0.5);

/// Default γ′; gives an interpolation disk ratio γ/γ′ ≈ 3.03.
inline constexpr double kDefaultGammaPrime = 0.05;

struct QuadraticForm {
    SymMatrix matrix;
    double norm = 0.0;  // op_norm(matrix)
};

struct LocalityParams {
    std::size_t r_dep = 0;  // variables per form
    std::size_t r_int = 0;  // other forms sharing a variable
    std::size_t r = 0;      // max of the two
};

class Instance;
inline Instance build_instance(std::size_t n, std::vector<SymMatrix> matrices);

/**
 * m quadratic forms over n variables plus the interaction graph: forms k and
 * j are adjacent iff their supports intersect.  Immutable once built.
 */
class Instance {
public:
    Instance() = default;

    std::size_t n() const noexcept { return n_; }
    std::size_t m() const noexcept { return forms_.size(); }
    const std::vector<QuadraticForm>& forms() const noexcept { return forms_; }
    const SymMatrix& matrix(std::size_t k) const { return forms_.at(k).matrix; }
    /// Sorted neighbours of form k.
    const std::vector<std::size_t>& neighbors(std::size_t k) const { return adjacency_.at(k); }
    bool adjacent(std::size_t k, std::size_t j) const {
        const auto& nb = adjacency_.at(k);
        return std::binary_search(nb.begin(), nb.end(), j);
    }

    /// Same supports, every matrix multiplied by c.
    Instance scaled(double c) const;

    friend Instance build_instance(std::size_t n, std::vector<SymMatrix> matrices);

private:
    std::size_t n_ = 0;
    std::vector<QuadraticForm> forms_;
    std::vector<std::vector<std::size_t>> adjacency_;
};

inline Instance build_instance(std::size_t n, std::vector<SymMatrix> matrices) {
    Instance inst;
    inst.n_ = n;
    inst.forms_.reserve(matrices.size());
    for (std::size_t k = 0; k < matrices.size(); ++k) {
        if (matrices[k].n() != n)
            throw DimensionError("form " + std::to_string(k) + " is " + std::to_string(matrices[k].n()) +
                                 "x" + std::to_string(matrices[k].n()) + ", expected n=" + std::to_string(n));
        const double norm = op_norm(matrices[k]);
        inst.forms_.push_back({std::move(matrices[k]), norm});
    }

    // variable -> forms touching it
    std::vector<std::vector<std::size_t>> users(n);
    for (std::size_t k = 0; k < inst.forms_.size(); ++k)
        for (std::size_t v : inst.forms_[k].matrix.support()) users[v].push_back(k);

    inst.adjacency_.assign(inst.forms_.size(), {});
    for (const auto& u : users)
        for (std::size_t a : u)
            for (std::size_t b : u)
                if (a != b) inst.adjacency_[a].push_back(b);
    for (auto& nb : inst.adjacency_) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    return inst;
}

inline Instance Instance::scaled(double c) const {
    std::vector<SymMatrix> ms;
    ms.reserve(forms_.size());
    for (const auto& f : forms_) ms.push_back(f.matrix.scaled(c));
    return build_instance(n_, std::move(ms));
}

inline LocalityParams locality_params(const Instance& inst) {
    LocalityParams p;
    for (std::size_t k = 0; k < inst.m(); ++k) {
        p.r_dep = std::max(p.r_dep, inst.matrix(k).support().size());
        p.r_int = std::max(p.r_int, inst.neighbors(k).size());
    }
    p.r = std::max(p.r_dep, p.r_int);
    return p;
}

enum class BoundMode { local, uniform };

inline const char* to_string(BoundMode m) { return m == BoundMode::local ? "local" : "uniform"; }

struct ToleranceConfig {
    double gamma_prime = kDefaultGammaPrime;
    BoundMode mode = BoundMode::local;

    double gamma() const noexcept { return kGamma; }
    /// Interpolation disk ratio γ/γ′.
    double beta() const noexcept { return kGamma / gamma_prime; }
};

struct AdmissibilityReport {
    BoundMode mode = BoundMode::local;
    double gamma_prime = 0.0;
    LocalityParams locality;
    /// γ′/r (local) or γ′/max(m, n) (uniform); every ½‖Q_k‖ must stay below it.
    double bound = 0.0;
    std::vector<double> margins;  // bound − ½‖Q_k‖
    double beta = 0.0;
    bool pass = true;

    /// Index of the form with the smallest margin, or m when there are no forms.
    std::size_t worst_form() const {
        return static_cast<std::size_t>(std::min_element(margins.begin(), margins.end()) - margins.begin());
    }
};

/// The bound that ½‖Q_k‖ has to respect under cfg.  r is clamped to ≥ 1 so
/// an all-zero instance yields a finite number.
inline double admissibility_bound(const Instance& inst, const LocalityParams& loc, const ToleranceConfig& cfg) {
    const double denom = cfg.mode == BoundMode::local
                             ? static_cast<double>(std::max<std::size_t>(loc.r, 1))
                             : static_cast<double>(std::max<std::size_t>({inst.m(), inst.n(), 1}));
    return cfg.gamma_prime / denom;
}

inline AdmissibilityReport check_admissible(const Instance& inst, const ToleranceConfig& cfg) {
    AdmissibilityReport rep;
    rep.mode = cfg.mode;
    rep.gamma_prime = cfg.gamma_prime;
    rep.locality = locality_params(inst);
    rep.bound = admissibility_bound(inst, rep.locality, cfg);
    rep.beta = cfg.beta();
    rep.margins.reserve(inst.m());
    for (const auto& f : inst.forms()) {
        const double margin = rep.bound - 0.5 * f.norm;
        rep.margins.push_back(margin);
        if (margin < 0.0) rep.pass = false;
    }
    if (!(cfg.gamma_prime > 0.0 && cfg.gamma_prime < kGamma)) rep.pass = false;
    return rep;
}

/// Raised by integrate when the norm/locality hypotheses fail; carries the report.
class AdmissibilityError : public Error {
public:
    explicit AdmissibilityError(AdmissibilityReport rep)
        : Error(describe(rep)), report_(std::move(rep)) {}

    const AdmissibilityReport& report() const noexcept { return report_; }

private:
    static std::string describe(const AdmissibilityReport& rep) {
        if (!(rep.gamma_prime > 0.0 && rep.gamma_prime < kGamma))
            return "gamma_prime=" + std::to_string(rep.gamma_prime) + " must lie in (0, " + std::to_string(kGamma) + ")";
        const std::size_t k = rep.worst_form();
        return "form " + std::to_string(k) + " violates the " + to_string(rep.mode) + " norm bound " +
               std::to_string(rep.bound) + " (margin " + std::to_string(rep.margins[k]) + ")";
    }

    AdmissibilityReport report_;
};

}  // namespace qfint
