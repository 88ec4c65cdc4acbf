#pragma once

#include <chrono>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qfint/apps.hpp"
#include "qfint/cluster.hpp"
#include "qfint/interp.hpp"
#include "qfint/io.hpp"
#include "qfint/model.hpp"
#include "qfint/oracle.hpp"

// Subcommand bodies for the qfint tool.  Each writes its JSON report to `out`,
// diagnostics to `err`, and returns the process exit code.

namespace qfint::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,          // bad flags
    kInadmissible = 2,   // norm/locality hypotheses fail
    kBadInput = 3,       // unreadable or malformed instance / edge list
    kBudget = 4,         // collection cap exceeded
    kGuard = 5,          // oracle size limit
    kNormalization = 6,  // feasibility input not normalized
    kNumeric = 7,        // non-finite intermediate
};

/// QFINT_THREADS when set to a positive integer, else 1.
inline unsigned default_threads() {
    if (const char* s = std::getenv("QFINT_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(s, &end, 10);
        if (end != s && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return 1;
}

inline BoundMode parse_mode(const std::string& s) {
    if (s == "local") return BoundMode::local;
    if (s == "uniform") return BoundMode::uniform;
    throw std::invalid_argument("mode must be 'local' or 'uniform', got '" + s + "'");
}

inline io::Json admissibility_json(const AdmissibilityReport& a) {
    io::Json j;
    j["mode"] = to_string(a.mode);
    j["gamma"] = kGamma;
    j["gamma_prime"] = a.gamma_prime;
    j["r_dep"] = a.locality.r_dep;
    j["r_int"] = a.locality.r_int;
    j["r"] = a.locality.r;
    j["bound"] = a.bound;
    j["beta"] = a.beta;
    j["pass"] = a.pass;
    j["margins"] = a.margins;
    return j;
}

inline io::Json estimate_json(const Estimate& e) {
    io::Json j;
    j["estimate"] = {{"value", e.value},
                     {"log_value", e.log_value},
                     {"additive_log_error_bound", e.additive_log_error_bound},
                     {"roundoff_indicator", e.roundoff_indicator}};
    j["plan"] = {{"k", e.plan.k}, {"beta", e.plan.beta}, {"bound", e.plan.bound}, {"epsilon", e.plan.epsilon}};
    j["coefficients"] = e.coeffs.c;
    j["log_coefficients"] = e.f;
    return j;
}

struct IntegrateArgs {
    std::string instance;
    double epsilon = 1e-6;
    double gamma_prime = kDefaultGammaPrime;
    std::string mode = "local";
    std::uint64_t max_collections = ClusterOptions{}.max_collections;
    unsigned threads = 1;
    bool timing = true;
};

inline int cmd_integrate(const IntegrateArgs& a, std::ostream& out, std::ostream& err) {
    const auto t0 = std::chrono::steady_clock::now();
    Instance inst;
    ToleranceConfig cfg;
    try {
        cfg.gamma_prime = a.gamma_prime;
        cfg.mode = parse_mode(a.mode);
        inst = io::load_instance(a.instance);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kBadInput;
    }
    for (std::size_t k = 0; k < inst.m(); ++k)
        if (inst.matrix(k).was_symmetrized()) err << "warning: form " << k << " was symmetrized\n";

    io::Json rep;
    rep["n"] = inst.n();
    rep["m"] = inst.m();
    int code = kOk;
    try {
        ClusterOptions opts;
        opts.max_collections = a.max_collections;
        opts.threads = a.threads;
        const Estimate est = integrate(inst, cfg, a.epsilon, opts);
        const io::Json ej = estimate_json(est);
        for (auto& [k, v] : ej.items()) rep[k] = v;
        rep["admissibility"] = admissibility_json(est.admissibility);
        rep["budget"] = {{"max_collections", a.max_collections},
                         {"collections", est.coeffs.total_collections()},
                         {"collections_per_level", est.coeffs.collections},
                         {"polymers", est.coeffs.polymers}};
    } catch (const AdmissibilityError& e) {
        err << "error: " << e.what() << "\n";
        rep["admissibility"] = admissibility_json(e.report());
        code = kInadmissible;
    } catch (const BudgetError& e) {
        err << "error: " << e.what() << "\n";
        rep["budget"] = {{"max_collections", a.max_collections}, {"exceeded_at_level", e.level()}};
        code = kBudget;
    } catch (const NonFiniteError& e) {
        err << "error: " << e.what() << "\n";
        code = kNumeric;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    rep["status"] = code == kOk ? "ok" : "failed";
    if (a.timing)
        rep["timing"] = {{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
    out << io::dump(rep);
    return code;
}

struct OracleArgs {
    std::string instance;
    std::optional<std::complex<double>> omega;
    std::optional<std::uint64_t> mc_samples;
    std::uint64_t seed = 1;
    bool product_only = false;
    bool radial = true;
    std::optional<std::pair<double, std::size_t>> zero_scan;
    unsigned threads = 1;
};

inline int cmd_oracle(const OracleArgs& a, std::ostream& out, std::ostream& err) {
    const int modes = (a.omega ? 1 : 0) + (a.mc_samples ? 1 : 0) + (a.zero_scan ? 1 : 0);
    if (modes != 1) {
        err << "error: give exactly one of --omega, --mc, --zero-scan\n";
        return kUsage;
    }
    Instance inst;
    try {
        inst = io::load_instance(a.instance);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kBadInput;
    }
    io::Json rep;
    rep["n"] = inst.n();
    rep["m"] = inst.m();
    try {
        if (a.omega) {
            const auto v = oracle::exact_value(inst, *a.omega);
            rep["omega"] = {a.omega->real(), a.omega->imag()};
            rep["value"] = {v.real(), v.imag()};
        } else if (a.mc_samples) {
            oracle::MCOptions mo;
            mo.threads = a.threads;
            mo.product_only = a.product_only;
            mo.radial = a.radial;
            const auto r = oracle::mc_estimate(inst, *a.mc_samples, a.seed, mo);
            rep["mc"] = {{"mean", r.mean},
                         {"stderr", r.std_error},
                         {"samples", r.samples},
                         {"seed", r.seed},
                         {"product_only", a.product_only},
                         {"radial", a.product_only && a.radial}};
        } else {
            const auto z = oracle::zero_scan(inst, a.zero_scan->first, a.zero_scan->second);
            rep["zero_scan"] = {{"radius", a.zero_scan->first},
                                {"grid", a.zero_scan->second},
                                {"points", z.points},
                                {"min_modulus", z.min_modulus},
                                {"argmin", {z.argmin.real(), z.argmin.imag()}}};
        }
    } catch (const GuardError& e) {
        err << "error: " << e.what() << "\n";
        return kGuard;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    out << io::dump(rep);
    return kOk;
}

struct BuildPotentialArgs {
    std::size_t d = 1;
    std::size_t points = 0;
    std::string edges = "complete";  // or a path to a JSON list of 0-based pairs
    std::string alpha = "auto";      // a number or "auto"
    std::optional<std::string> out_path;
    double gamma_prime = kDefaultGammaPrime;
    std::string mode = "local";
};

inline std::vector<apps::Edge> parse_edges(const std::string& text) {
    const io::Json doc = io::parse_json(text, "edge list");
    if (!doc.is_array()) throw ParseError("edge list must be an array of [i, j] pairs");
    std::vector<apps::Edge> edges;
    for (std::size_t e = 0; e < doc.size(); ++e) {
        const std::string where = "edges[" + std::to_string(e) + "]";
        if (!doc[e].is_array() || doc[e].size() != 2) throw ParseError(where + ": expected [i, j]");
        edges.emplace_back(io::read_index(doc[e][0], where), io::read_index(doc[e][1], where));
    }
    return edges;
}

inline int cmd_build_potential(const BuildPotentialArgs& a, std::ostream& out, std::ostream& err) {
    apps::PotentialSpec spec;
    spec.d = a.d;
    spec.points = a.points;
    Instance inst;
    double alpha = 0.0;
    try {
        spec.edges = a.edges == "complete" ? apps::complete_edges(a.points) : parse_edges(io::read_file(a.edges));
        apps::validate(spec);
        if (a.alpha == "auto") {
            ToleranceConfig cfg;
            cfg.gamma_prime = a.gamma_prime;
            cfg.mode = parse_mode(a.mode);
            alpha = apps::max_alpha_admissible(spec, cfg);
        } else {
            std::size_t used = 0;
            alpha = std::stod(a.alpha, &used);
            if (used != a.alpha.size() || !(alpha >= 0.0) || !std::isfinite(alpha))
                throw std::invalid_argument("bad --alpha '" + a.alpha + "'");
        }
        spec.alpha = alpha;
        inst = apps::build_potential_instance(spec);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << "\n";
        return kBadInput;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kBadInput;
    }
    err << "alpha = " << io::format_double(alpha) << "\n";
    const std::string doc = io::serialize_instance(inst);
    if (a.out_path) {
        std::ofstream f(*a.out_path, std::ios::binary);
        f << doc;
        if (!f) {
            err << "error: cannot write '" << *a.out_path << "'\n";
            return kBadInput;
        }
        io::Json rep;
        rep["alpha"] = alpha;
        rep["n"] = inst.n();
        rep["m"] = inst.m();
        rep["out"] = *a.out_path;
        out << io::dump(rep);
    } else {
        out << doc;
    }
    return kOk;
}

struct FeasibilityArgs {
    std::string instance;
    double alpha = 0.0;
    double epsilon = 1e-3;
    double gamma_prime = kDefaultGammaPrime;
    std::string mode = "local";
    std::string backend = "interp";
    std::uint64_t samples = 1'000'000;
    std::uint64_t seed = 1;
    std::uint64_t max_collections = ClusterOptions{}.max_collections;
    unsigned threads = 1;
};

inline int cmd_feasibility(const FeasibilityArgs& a, std::ostream& out, std::ostream& err) {
    apps::FeasibilityOptions opts;
    Instance inst;
    try {
        opts.cfg.gamma_prime = a.gamma_prime;
        opts.cfg.mode = parse_mode(a.mode);
        if (a.backend == "interp")
            opts.backend = apps::Backend::interp;
        else if (a.backend == "oracle")
            opts.backend = apps::Backend::oracle;
        else if (a.backend == "mc")
            opts.backend = apps::Backend::monte_carlo;
        else
            throw std::invalid_argument("backend must be interp, oracle or mc");
        if (!(a.alpha > 0.0)) throw std::invalid_argument("--alpha must be positive");
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    try {
        inst = io::load_instance(a.instance);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kBadInput;
    }
    opts.cluster.max_collections = a.max_collections;
    opts.cluster.threads = a.threads;
    opts.mc_samples = a.samples;
    opts.mc_seed = a.seed;

    io::Json rep;
    rep["n"] = inst.n();
    rep["m"] = inst.m();
    try {
        const auto r = apps::feasibility_report(inst, a.alpha, a.epsilon, opts);
        rep["backend"] = apps::to_string(r.backend);
        rep["alpha"] = r.params.alpha;
        rep["beta"] = r.params.beta;
        rep["t"] = r.params.t;
        rep["beta_residual"] = r.params.residual;
        rep["log_v_max"] = r.params.log_v_max;
        rep["v_max"] = r.params.v_max;
        rep["log_integral"] = r.log_integral;
        rep["integral"] = r.integral;
        rep["log_score"] = r.log_score;
        rep["score"] = r.score;
        if (r.estimate) {
            rep["additive_log_error_bound"] = r.estimate->additive_log_error_bound;
            rep["plan"] = {{"k", r.estimate->plan.k}, {"beta", r.estimate->plan.beta}};
        }
        if (r.mc) rep["mc"] = {{"stderr", r.mc->std_error}, {"samples", r.mc->samples}, {"seed", r.mc->seed}};
        rep["interpretation"] = r.interpretation;
    } catch (const NormalizationError& e) {
        err << "error: " << e.what() << "\n";
        return kNormalization;
    } catch (const AdmissibilityError& e) {
        err << "error: " << e.what() << "\n";
        rep["admissibility"] = admissibility_json(e.report());
        rep["status"] = "failed";
        out << io::dump(rep);
        return kInadmissible;
    } catch (const BudgetError& e) {
        err << "error: " << e.what() << "\n";
        return kBudget;
    } catch (const GuardError& e) {
        err << "error: " << e.what() << "\n";
        return kGuard;
    } catch (const NonFiniteError& e) {
        err << "error: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    rep["status"] = "ok";
    out << io::dump(rep);
    return kOk;
}

}  // namespace qfint::cli
