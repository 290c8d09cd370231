// cvp: causal variational principles at desk scale.
//
// Subcommands: solve, el-check, verify-identity, verify-noether,
// verify-killing, volume-check, continuum {current, energy, lemma,
// stability, consistency}.  All reports are JSON (CSV for long series);
// every report records the seed, and identical invocations reproduce
// byte-identical reports apart from the timestamp field.
// CVP_THREADS caps the evaluation thread count.

#include "cvp/json_io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>

namespace {

using namespace cvp;
using cvp::io::json;

constexpr int kExitOk = 0;
constexpr int kExitVerdictFailure = 1;
constexpr int kExitSchemaViolation = 2;
constexpr int kExitNumericalFailure = 3;

struct GlobalOptions {
    std::uint64_t seed = 0;
    double tol_abs = 1e-9;
    double tol_rel = 1e-9;
};

std::string timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%FT%TZ", std::gmtime(&t));
    return buffer;
}

json report_header(const std::string &command, const GlobalOptions &opts) {
    return {{"command", command},
            {"seed", opts.seed},
            {"tol_abs", opts.tol_abs},
            {"tol_rel", opts.tol_rel},
            {"timestamp", timestamp_now()}};
}

VerdictTolerances verdict_tols(const GlobalOptions &opts) {
    VerdictTolerances t;
    t.tol_abs = opts.tol_abs;
    t.tol_rel = opts.tol_rel;
    return t;
}

// EL report for either mode, with nu optionally pinned by the caller.
ElReport el_report_for(const io::SystemFile &sys, const GlobalOptions &opts,
                       std::optional<double> nu) {
    if (sys.compact) return el_residual_compact(sys.compact_system);
    ActionParams params;
    params.kappa = sys.kappa;
    params.nu = nu;
    params.probe_seed = opts.seed;
    return el_residual(sys.cfs, params);
}

int cmd_solve(const std::string &system_path, const std::string &config_path,
              const std::string &out_path, const std::string &csv_path,
              const GlobalOptions &opts) {
    const io::SystemFile sys = io::load_system(system_path);
    OptimizerConfig cfg;
    if (!config_path.empty())
        cfg = io::parse_optimizer_config(io::load_file(config_path));
    if (cfg.seed == 0) cfg.seed = opts.seed;

    json report = report_header("solve", opts);
    io::SystemFile solved = sys;
    std::ofstream csv(csv_path);
    csv << "iter,S,T,trace,residual_constancy,residual_minimality\n";

    if (sys.compact) {
        std::vector<int> points = sys.compact_system.rho.points;
        OptimizerConfig run = cfg;
        if (run.init_weights.empty())
            run.init_weights = sys.compact_system.rho.weights;
        const CompactSolveResult result =
            minimize_compact(sys.compact_system.kernel, points, run);
        solved.compact_system.rho = result.measure;
        report["mode"] = "compact";
        report["iterations"] = result.iterations;
        report["converged"] = result.converged;
        report["final_action"] = result.action_trace.back();
        report["el"] = io::to_json(result.report);
        for (std::size_t i = 0; i < result.action_trace.size(); ++i)
            csv << i << "," << result.action_trace[i] << ",0,0,,\n";
    } else {
        ActionParams params;
        params.kappa = sys.kappa;
        const CfsSolveResult result = minimize_cfs(sys.cfs, params, cfg);
        solved.cfs = result.measure;
        report["mode"] = "cfs";
        report["iterations"] = result.iterations;
        report["converged"] = result.converged;
        report["improved"] = result.improved;
        report["final_action"] = action(result.measure);
        report["el"] = io::to_json(result.report);
        for (const auto &row : result.trace)
            csv << row.iter << "," << row.action << "," << row.boundedness
                << "," << row.trace << "," << row.residual_constancy << ","
                << row.residual_minimality << "\n";
    }

    json out = io::system_to_json(solved);
    out["report"] = report;
    io::write_file(out_path, out);
    return kExitOk;
}

int cmd_el_check(const std::string &system_path, const std::string &out_path,
                 std::optional<double> nu, double threshold,
                 const GlobalOptions &opts) {
    const io::SystemFile sys = io::load_system(system_path);
    const ElReport rep = el_report_for(sys, opts, nu);

    // fixed-schema table on stdout
    std::printf("%6s %18s %18s %18s\n", "atom", "ell", "trace", "g");
    for (std::size_t i = 0; i < rep.ell_values.size(); ++i)
        std::printf("%6zu %18.12e %18.12e %18.12e\n", i, rep.ell_values[i],
                    rep.trace_values[i],
                    rep.ell_values[i] - rep.nu * rep.trace_values[i]);
    std::printf("nu=%.12e spread=%.12e\n", rep.nu, rep.nu_spread);
    std::printf("constancy=%.12e minimality=%.12e\n", rep.residual_constancy,
                rep.residual_minimality);

    json report = report_header("el-check", opts);
    report["el"] = io::to_json(rep);
    const bool pass = rep.total() <= threshold;
    report["pass"] = pass;
    report["threshold"] = threshold;
    io::write_file(out_path, report);
    return pass ? kExitOk : kExitVerdictFailure;
}

int cmd_verify_identity(const std::string &system_path,
                        const std::string &variation_path,
                        const std::string &omega_path, double tau,
                        const std::string &out_path,
                        const GlobalOptions &opts) {
    const io::SystemFile sys = io::load_system(system_path);
    const Region omega = io::load_region(omega_path);
    const json vj = io::load_file(variation_path);

    IdentityCheck check;
    if (sys.compact) {
        check = prpuseful_identity_residual(
            sys.compact_system, omega, io::parse_compact_variation(vj), tau);
    } else {
        check = prpuseful_identity_residual(
            sys.cfs_system(), omega,
            io::parse_cfs_variation(vj, sys.spin_dim), tau);
    }

    json report = report_header("verify-identity", opts);
    report["tau"] = tau;
    report["identity"] = io::to_json(check);
    const bool pass =
        check.residual <= opts.tol_abs + 1e-10 * (check.scale + 1.0);
    report["pass"] = pass;
    io::write_file(out_path, report);
    return pass ? kExitOk : kExitVerdictFailure;
}

int cmd_verify_noether(const std::string &system_path,
                       const std::string &variation_path,
                       const std::string &omega_path,
                       const std::string &out_path, double fd_h,
                       std::optional<double> nu, const GlobalOptions &opts) {
    const io::SystemFile sys = io::load_system(system_path);
    const Region omega = io::load_region(omega_path);
    const json vj = io::load_file(variation_path);
    const ElReport el = el_report_for(sys, opts, nu);

    FdConfig fd;
    fd.h = fd_h;
    ConservationVerdict verdict;
    json qualification;
    if (sys.compact) {
        const CompactVariation v = io::parse_compact_variation(vj);
        verdict = noether_derivative(sys.compact_system, omega, v, fd,
                                     verdict_tols(opts), el.total());
    } else {
        const CfsVariation v = io::parse_cfs_variation(vj, sys.spin_dim);
        const CfsSystem cfs = sys.cfs_system();
        // qualification: Lagrangian symmetry for unitary kinds, a gis
        // first-order check otherwise
        const double h = fd.h > 0 ? fd.h : 1e-3 * v.tau_max;
        if (v.kind == VariationKind::UnitaryConjugation) {
            const auto sym = is_lagrangian_symmetry(cfs, v, {h, 2 * h}, 1e-9);
            qualification = {{"kind", "lagrangian_symmetry"},
                             {"holds", sym.holds},
                             {"max_violation", sym.max_violation}};
            if (!sym.holds) {
                verdict.precondition_ok = false;
                verdict.failure_kind = "variation is not a Lagrangian symmetry";
            }
        } else {
            const auto [lag_p, trace_p] = gis_residual(cfs, omega, v, h);
            const auto [lag_m, trace_m] = gis_residual(cfs, omega, v, -h);
            const double first_order =
                std::abs(lag_p - lag_m) / (2 * h) +
                std::abs(trace_p - trace_m) / (2 * h);
            qualification = {{"kind", "gis_first_order"},
                             {"value", first_order}};
            if (first_order > opts.tol_abs + opts.tol_rel * (el.scale + 1.0) +
                                  10.0 * el.total()) {
                verdict.precondition_ok = false;
                verdict.failure_kind = "generalized integrated symmetry fails";
            }
        }
        if (verdict.precondition_ok)
            verdict = noether_derivative(cfs, omega, v, fd, verdict_tols(opts),
                                         el.total());
    }

    json report = report_header("verify-noether", opts);
    report["el"] = io::to_json(el);
    report["verdict"] = io::to_json(verdict);
    if (!qualification.is_null()) report["qualification"] = qualification;
    io::write_file(out_path, report);
    return verdict.pass && verdict.precondition_ok ? kExitOk
                                                   : kExitVerdictFailure;
}

int cmd_verify_killing(const std::string &system_path,
                       const std::string &killing_path,
                       const std::string &omega_path,
                       const std::string &out_path, double fd_h,
                       std::optional<double> nu, const GlobalOptions &opts) {
    const io::SystemFile sys = io::load_system(system_path);
    if (sys.compact)
        throw io::SchemaError("verify-killing expects a cfs system");
    const Region omega = io::load_region(omega_path);
    const io::KillingFile kf =
        io::parse_killing(io::load_file(killing_path), sys.spin_dim);
    const ElReport el = el_report_for(sys, opts, nu);

    FdConfig fd;
    fd.h = fd_h;
    const CfsSystem cfs = sys.cfs_system();
    const ConservationVerdict verdict = killing_conservation_derivative(
        cfs, omega, kf.variation, fd, verdict_tols(opts), el.total());

    // the subspace condition E_tau(u, x) = 0 off K, sampled at the stencil
    const double h = fd.h > 0 ? fd.h : 1e-3 * kf.variation.tau_max;
    const double mismatch =
        killing_mismatch_offsubspace(kf.variation, sys.cfs, h);

    json report = report_header("verify-killing", opts);
    report["el"] = io::to_json(el);
    report["verdict"] = io::to_json(verdict);
    report["offsubspace_mismatch"] = mismatch;
    io::write_file(out_path, report);
    return verdict.pass && verdict.precondition_ok ? kExitOk
                                                   : kExitVerdictFailure;
}

int cmd_volume_check(const std::string &system_path,
                     const std::string &variation_path,
                     const std::string &omega_path, double tau,
                     const std::string &out_path, const GlobalOptions &opts) {
    const io::SystemFile sys = io::load_system(system_path);
    const Region omega = io::load_region(omega_path);
    const json vj = io::load_file(variation_path);

    VolumeReduction check;
    if (sys.compact)
        check = volume_reduction_check(sys.compact_system, omega,
                                       io::parse_compact_variation(vj), tau);
    else
        check = volume_reduction_check(
            sys.cfs_system(), omega,
            io::parse_cfs_variation(vj, sys.spin_dim), tau);

    json report = report_header("volume-check", opts);
    report["tau"] = tau;
    report["volume_reduction"] = io::to_json(check);
    const bool pass = check.bijective &&
                      check.residual <=
                          opts.tol_abs + 1e-10 * (check.scale + 1.0);
    report["pass"] = pass;
    io::write_file(out_path, report);
    return pass ? kExitOk : kExitVerdictFailure;
}

int cmd_continuum_current(const std::string &model_path,
                          const std::string &packet_path,
                          const std::string &packet2_path, bool with_direct,
                          double eta0, int eta_levels,
                          const std::string &out_path,
                          const GlobalOptions &opts) {
    const QhatModel model = io::load_model(model_path);
    const WavePacket packet = io::load_packet(packet_path);

    json report = report_header("continuum current", opts);
    report["cone_margin"] = model.cone_margin;
    report["q2_max"] = model.q2_max;

    if (packet2_path.empty())
        report["closed"] = io::to_json(current_closed(model, packet));
    if (with_direct || !packet2_path.empty()) {
        const WavePacket other =
            packet2_path.empty() ? packet : io::load_packet(packet2_path);
        DirectConfig cfg;
        if (eta0 > 0) cfg.eta0 = eta0;
        cfg.eta_levels = eta_levels;
        json sweep = json::array();
        double eta = cfg.eta0 > 0 ? cfg.eta0 : 0.05 * model.masses.front();
        for (int level = 0; level < cfg.eta_levels; ++level, eta *= 0.5)
            sweep.push_back(
                {{"eta", eta},
                 {"value", current_direct(model, packet, other, eta, cfg)}});
        report["direct_sweep"] = sweep;
        report["direct_extrapolated"] =
            current_direct_extrapolated(model, packet, other, cfg);
    }
    io::write_file(out_path, report);
    return kExitOk;
}

int cmd_continuum_energy(const std::string &model_path,
                         const std::string &packet_path,
                         const std::string &out_path,
                         const GlobalOptions &opts) {
    const QhatModel model = io::load_model(model_path);
    const WavePacket packet = io::load_packet(packet_path);
    json report = report_header("continuum energy", opts);
    report["closed"] = io::to_json(energy_closed(model, packet));
    io::write_file(out_path, report);
    return kExitOk;
}

int cmd_continuum_lemma(int d, double amplitude, const std::string &out_path,
                        const GlobalOptions &opts) {
    // built-in odd Gaussian family fhat = i A w exp(-w^2 - |k|^2)
    auto fhat = [amplitude](double w, double k2) {
        return std::complex<double>(0.0,
                                    amplitude * w * std::exp(-w * w - k2));
    };
    const LayerLemmaResult r = fourier_layer_lemma(fhat, d);
    json report = report_header("continuum lemma", opts);
    report["d"] = d;
    report["amplitude"] = amplitude;
    report["lemma"] = io::to_json(r);
    const bool pass = r.preconditions_ok && std::abs(r.lhs - r.rhs) <= 1e-6;
    report["pass"] = pass;
    io::write_file(out_path, report);
    return pass ? kExitOk : kExitVerdictFailure;
}

int cmd_continuum_stability(const std::string &model_path,
                            const std::string &out_path,
                            const GlobalOptions &opts) {
    const QhatModel model = io::load_model(model_path);
    const StabilityReport rep =
        state_stability_check(model, default_q2_grid(model));
    json report = report_header("continuum stability", opts);
    report["stability"] = io::to_json(rep);
    io::write_file(out_path, report);
    return rep.pass ? kExitOk : kExitVerdictFailure;
}

int cmd_continuum_consistency(const std::string &model_path, double tol,
                              const std::string &out_path,
                              const GlobalOptions &opts) {
    const QhatModel model = io::load_model(model_path);
    const ConsistencyReport rep = consistency_check(model, tol);
    json report = report_header("continuum consistency", opts);
    report["consistency"] = io::to_json(rep);
    io::write_file(out_path, report);
    return rep.pass ? kExitOk : kExitVerdictFailure;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"causal variational principles: solve, verify, continuum"};
    app.require_subcommand(1);

    GlobalOptions opts;
    app.add_option("--seed", opts.seed, "seed recorded in every report");
    app.add_option("--tol-abs", opts.tol_abs, "absolute verdict tolerance");
    app.add_option("--tol-rel", opts.tol_rel, "relative verdict tolerance");

    std::string system_path, variation_path, omega_path, killing_path;
    std::string model_path, packet_path, packet2_path, config_path;
    std::string out_path = "report.json", csv_path = "iterations.csv";
    double tau = 0.1, fd_h = 0.0, eta0 = 0.0, amplitude = 1.0;
    double el_threshold = 1e-6, consistency_tol = 1e-9;
    int dim = 1, eta_levels = 3;
    bool with_direct = false;
    std::optional<double> nu;
    double nu_value = 0.0;

    auto *solve = app.add_subcommand("solve", "minimize the causal action");
    solve->add_option("--system", system_path)->required();
    solve->add_option("--config", config_path);
    solve->add_option("--out", out_path);
    solve->add_option("--trace-csv", csv_path);

    auto *el = app.add_subcommand("el-check", "Euler-Lagrange residuals");
    el->add_option("--system", system_path)->required();
    el->add_option("--out", out_path);
    auto *el_nu = el->add_option("--nu", nu_value, "pin the trace multiplier");
    el->add_option("--threshold", el_threshold);

    auto *vid =
        app.add_subcommand("verify-identity", "exact surface-layer identity");
    vid->add_option("--system", system_path)->required();
    vid->add_option("--variation", variation_path)->required();
    vid->add_option("--omega", omega_path)->required();
    vid->add_option("--tau", tau);
    vid->add_option("--out", out_path);

    auto *vn = app.add_subcommand("verify-noether", "conservation verdict");
    vn->add_option("--system", system_path)->required();
    vn->add_option("--variation", variation_path)->required();
    vn->add_option("--omega", omega_path)->required();
    vn->add_option("--report,--out", out_path);
    vn->add_option("--fd-h", fd_h);
    auto *vn_nu = vn->add_option("--nu", nu_value);

    auto *vk = app.add_subcommand("verify-killing",
                                  "Killing-symmetry conservation verdict");
    vk->add_option("--system", system_path)->required();
    vk->add_option("--killing", killing_path)->required();
    vk->add_option("--omega", omega_path)->required();
    vk->add_option("--report,--out", out_path);
    vk->add_option("--fd-h", fd_h);
    auto *vk_nu = vk->add_option("--nu", nu_value);

    auto *vc = app.add_subcommand("volume-check",
                                  "surface layer as a volume difference");
    vc->add_option("--system", system_path)->required();
    vc->add_option("--variation", variation_path)->required();
    vc->add_option("--omega", omega_path)->required();
    vc->add_option("--tau", tau);
    vc->add_option("--report,--out", out_path);

    auto *cont = app.add_subcommand("continuum", "continuum-limit checks");
    cont->require_subcommand(1);
    auto *cur = cont->add_subcommand("current", "current functionals");
    cur->add_option("--model", model_path)->required();
    cur->add_option("--packet", packet_path)->required();
    cur->add_option("--packet2", packet2_path);
    cur->add_flag("--direct", with_direct);
    cur->add_option("--eta0", eta0);
    cur->add_option("--eta-levels", eta_levels);
    cur->add_option("--out", out_path);
    auto *en = cont->add_subcommand("energy", "energy functional");
    en->add_option("--model", model_path)->required();
    en->add_option("--packet", packet_path)->required();
    en->add_option("--out", out_path);
    auto *lem = cont->add_subcommand("lemma", "Fourier layer identity");
    lem->add_option("--d", dim);
    lem->add_option("--amplitude", amplitude);
    lem->add_option("--out", out_path);
    auto *stab = cont->add_subcommand("stability", "state stability report");
    stab->add_option("--model", model_path)->required();
    stab->add_option("--out", out_path);
    auto *cons = cont->add_subcommand("consistency",
                                      "generation consistency condition");
    cons->add_option("--model", model_path)->required();
    cons->add_option("--tol", consistency_tol);
    cons->add_option("--out", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitSchemaViolation;
    }

    try {
        if (el_nu->count() || vn_nu->count() || vk_nu->count()) nu = nu_value;
        if (solve->parsed())
            return cmd_solve(system_path, config_path, out_path, csv_path,
                             opts);
        if (el->parsed())
            return cmd_el_check(system_path, out_path, nu, el_threshold, opts);
        if (vid->parsed())
            return cmd_verify_identity(system_path, variation_path, omega_path,
                                       tau, out_path, opts);
        if (vn->parsed())
            return cmd_verify_noether(system_path, variation_path, omega_path,
                                      out_path, fd_h, nu, opts);
        if (vk->parsed())
            return cmd_verify_killing(system_path, killing_path, omega_path,
                                      out_path, fd_h, nu, opts);
        if (vc->parsed())
            return cmd_volume_check(system_path, variation_path, omega_path,
                                    tau, out_path, opts);
        if (cur->parsed())
            return cmd_continuum_current(model_path, packet_path, packet2_path,
                                         with_direct, eta0, eta_levels,
                                         out_path, opts);
        if (en->parsed())
            return cmd_continuum_energy(model_path, packet_path, out_path,
                                        opts);
        if (lem->parsed())
            return cmd_continuum_lemma(dim, amplitude, out_path, opts);
        if (stab->parsed())
            return cmd_continuum_stability(model_path, out_path, opts);
        if (cons->parsed())
            return cmd_continuum_consistency(model_path, consistency_tol,
                                             out_path, opts);
    } catch (const cvp::io::SchemaError &e) {
        std::cerr << "schema error: " << e.what() << "\n";
        return kExitSchemaViolation;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumericalFailure;
    }
    return kExitSchemaViolation;
}
