// qfint: Gaussian integrals of products of quadratic forms.
//
//   qfint integrate        --instance F [--epsilon E] [--gamma-prime G] [--mode local|uniform]
//   qfint oracle           --instance F (--omega RE IM | --mc N [--seed S] | --zero-scan R GRID)
//   qfint build-potential  --d D --points S --edges complete|FILE --alpha A|auto [--out F]
//   qfint feasibility      --instance F --alpha A [--epsilon E] [--backend interp|oracle|mc]

#include <complex>
#include <iostream>
#include <vector>

#include <CLI11.hpp>

#include "qfint/cli.hpp"

int main(int argc, char** argv) {
    using namespace qfint::cli;

    CLI::App app{"Gaussian averages of products of quadratic forms"};
    app.require_subcommand(1);
    const unsigned env_threads = default_threads();

    IntegrateArgs ia;
    ia.threads = env_threads;
    bool ia_no_timing = false;
    auto* integrate = app.add_subcommand("integrate", "approximate E prod(1 + q_k) by interpolation");
    integrate->add_option("--instance", ia.instance, "instance JSON file")->required();
    integrate->add_option("--epsilon", ia.epsilon, "target relative error in (0, 1)");
    integrate->add_option("--gamma-prime", ia.gamma_prime, "norm constant, 0 < G < 0.1516");
    integrate->add_option("--mode", ia.mode, "local | uniform")->check(CLI::IsMember({"local", "uniform"}));
    integrate->add_option("--max-collections", ia.max_collections, "enumeration budget");
    integrate->add_option("--threads", ia.threads, "worker threads (default QFINT_THREADS or 1)");
    integrate->add_flag("--no-timing", ia_no_timing, "omit the timing block from the report");

    OracleArgs oa;
    oa.threads = env_threads;
    std::vector<double> omega;
    std::uint64_t mc_samples = 0;
    std::vector<double> scan;
    auto* orc = app.add_subcommand("oracle", "exact value, Monte Carlo estimate, or zero scan");
    orc->add_option("--instance", oa.instance, "instance JSON file")->required();
    auto* o_omega = orc->add_option("--omega", omega, "evaluate p(RE + i IM) exactly")->expected(2);
    auto* o_mc = orc->add_option("--mc", mc_samples, "Monte Carlo sample count");
    orc->add_option("--seed", oa.seed, "Monte Carlo seed");
    orc->add_flag("--product-only", oa.product_only, "average prod q_k instead of prod(1 + q_k)");
    bool no_radial = false;
    orc->add_flag("--no-radial", no_radial, "with --product-only, sample the plain product");
    auto* o_scan = orc->add_option("--zero-scan", scan, "RADIUS GRID: min |p| on a polar grid")->expected(2);
    orc->add_option("--threads", oa.threads, "worker threads for --mc");

    BuildPotentialArgs ba;
    std::string out_path;
    auto* build = app.add_subcommand("build-potential", "write the instance for a mollified log potential");
    build->add_option("--d", ba.d, "point dimension")->required();
    build->add_option("--points", ba.points, "number of points")->required();
    build->add_option("--edges", ba.edges, "'complete' or a JSON file of 0-based [i, j] pairs")->required();
    build->add_option("--alpha", ba.alpha, "pair strength, or 'auto' for the largest admissible")->required();
    auto* b_out = build->add_option("--out", out_path, "write the instance here instead of stdout");
    build->add_option("--gamma-prime", ba.gamma_prime, "constant used by --alpha auto");
    build->add_option("--mode", ba.mode, "local | uniform (for --alpha auto)")->check(CLI::IsMember({"local", "uniform"}));

    FeasibilityArgs fa;
    fa.threads = env_threads;
    auto* feas = app.add_subcommand("feasibility", "score a normalized quadratic system q_k(x) = 1");
    feas->add_option("--instance", fa.instance, "normalized instance JSON file")->required();
    feas->add_option("--alpha", fa.alpha, "scaling of the forms")->required();
    feas->add_option("--epsilon", fa.epsilon, "relative error for the interp backend");
    feas->add_option("--gamma-prime", fa.gamma_prime, "norm constant");
    feas->add_option("--mode", fa.mode, "local | uniform")->check(CLI::IsMember({"local", "uniform"}));
    feas->add_option("--backend", fa.backend, "interp | oracle | mc")->check(CLI::IsMember({"interp", "oracle", "mc"}));
    feas->add_option("--samples", fa.samples, "Monte Carlo samples (mc backend)");
    feas->add_option("--seed", fa.seed, "Monte Carlo seed (mc backend)");
    feas->add_option("--max-collections", fa.max_collections, "enumeration budget");
    feas->add_option("--threads", fa.threads, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    if (integrate->parsed()) {
        ia.timing = !ia_no_timing;
        return cmd_integrate(ia, std::cout, std::cerr);
    }
    if (orc->parsed()) {
        if (o_omega->count() > 0) oa.omega = std::complex<double>(omega[0], omega[1]);
        if (o_mc->count() > 0) oa.mc_samples = mc_samples;
        oa.radial = !no_radial;
        if (o_scan->count() > 0) {
            if (!(scan[1] >= 1.0) || scan[1] != static_cast<double>(static_cast<std::size_t>(scan[1]))) {
                std::cerr << "error: --zero-scan GRID must be a positive integer\n";
                return kUsage;
            }
            oa.zero_scan = std::make_pair(scan[0], static_cast<std::size_t>(scan[1]));
        }
        return cmd_oracle(oa, std::cout, std::cerr);
    }
    if (build->parsed()) {
        if (b_out->count() > 0) ba.out_path = out_path;
        return cmd_build_potential(ba, std::cout, std::cerr);
    }
    return cmd_feasibility(fa, std::cout, std::cerr);
}
