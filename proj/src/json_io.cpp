#include "cvp/json_io.hpp"

#include <fstream>
#include <memory>

namespace cvp::io {

namespace {

const json &field(const json &j, const char *name) {
    auto it = j.find(name);
    if (it == j.end())
        throw SchemaError(std::string("missing field: ") + name);
    return *it;
}

double number(const json &j, const char *name) {
    const json &v = field(j, name);
    if (!v.is_number()) throw SchemaError(std::string(name) + ": not a number");
    return v.get<double>();
}

double number_or(const json &j, const char *name, double fallback) {
    auto it = j.find(name);
    if (it == j.end()) return fallback;
    if (!it->is_number())
        throw SchemaError(std::string(name) + ": not a number");
    return it->get<double>();
}

std::vector<double> reals(const json &j) {
    if (!j.is_array()) throw SchemaError("expected an array of numbers");
    std::vector<double> out;
    for (const auto &v : j) {
        if (!v.is_number()) throw SchemaError("expected an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

// flat row-major list of [re, im] pairs
Matrix complex_matrix(const json &j, int rows, int cols, const char *what) {
    if (!j.is_array() || static_cast<int>(j.size()) != rows * cols)
        throw SchemaError(std::string(what) + ": expected " +
                          std::to_string(rows * cols) + " [re,im] entries");
    Matrix m(rows, cols);
    int k = 0;
    for (const auto &entry : j) {
        if (!entry.is_array() || entry.size() != 2)
            throw SchemaError(std::string(what) + ": entries must be [re,im]");
        m(k / cols, k % cols) =
            Complex(entry[0].get<double>(), entry[1].get<double>());
        ++k;
    }
    return m;
}

json complex_matrix_to_json(const Matrix &m) {
    json out = json::array();
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            out.push_back({m(r, c).real(), m(r, c).imag()});
    return out;
}

} // namespace

json load_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error &e) {
        throw SchemaError("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

void write_file(const std::string &path, const json &j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

SystemFile parse_system(const json &j) {
    SystemFile s;
    const std::string mode = field(j, "mode").get<std::string>();
    s.kappa = number_or(j, "kappa", 0.0);
    if (mode == "cfs") {
        const int n = static_cast<int>(number(j, "n"));
        const int f = static_cast<int>(number(j, "f"));
        if (n < 1 || f < 1) throw SchemaError("n and f must be positive");
        s.spin_dim = n;
        const json &points = field(j, "points");
        if (!points.is_array() || points.empty())
            throw SchemaError("points: nonempty array required");
        for (const auto &p : points)
            s.cfs.points.emplace_back(
                complex_matrix(field(p, "psi"), 2 * n, f, "psi"), n);
        s.cfs.weights = reals(field(j, "weights"));
        s.cfs.total_volume = number(j, "total_volume");
        if (s.cfs.weights.size() != s.cfs.points.size())
            throw SchemaError("weights/points size mismatch");
        s.cfs.check();
    } else if (mode == "compact") {
        s.compact = true;
        const json &km = field(j, "kernel_matrix");
        if (!km.is_array() || km.empty())
            throw SchemaError("kernel_matrix: nonempty array required");
        std::vector<std::vector<double>> rows;
        for (const auto &r : km) rows.push_back(reals(r));
        try {
            s.compact_system.kernel = kernel_from_matrix(std::move(rows));
        } catch (const std::invalid_argument &e) {
            throw SchemaError(e.what());
        }
        s.compact_system.rho.weights = reals(field(j, "weights"));
        const std::size_t m = s.compact_system.rho.weights.size();
        if (static_cast<int>(m) > s.compact_system.kernel.num_points)
            throw SchemaError("more weights than kernel points");
        for (std::size_t i = 0; i < m; ++i)
            s.compact_system.rho.points.push_back(static_cast<int>(i));
        s.compact_system.rho.total_volume = number(j, "total_volume");
        if (auto it = j.find("probe_points"); it != j.end()) {
            for (const auto &v : *it)
                s.compact_system.kernel.probe_points.push_back(v.get<int>());
        }
        s.compact_system.rho.check();
    } else {
        throw SchemaError("mode must be \"cfs\" or \"compact\"");
    }
    return s;
}

json system_to_json(const SystemFile &s) {
    json j;
    if (s.compact) {
        j["mode"] = "compact";
        const int n = s.compact_system.kernel.num_points;
        json km = json::array();
        for (int r = 0; r < n; ++r) {
            json row = json::array();
            for (int c = 0; c < n; ++c)
                row.push_back(s.compact_system.kernel.evaluate(r, c));
            km.push_back(row);
        }
        j["kernel_matrix"] = km;
        j["weights"] = s.compact_system.rho.weights;
        j["total_volume"] = s.compact_system.rho.total_volume;
        if (!s.compact_system.kernel.probe_points.empty())
            j["probe_points"] = s.compact_system.kernel.probe_points;
    } else {
        j["mode"] = "cfs";
        j["n"] = s.spin_dim;
        j["f"] = s.cfs.points.empty() ? 0 : s.cfs.points[0].hilbert_dim();
        json points = json::array();
        for (const auto &p : s.cfs.points)
            points.push_back({{"psi", complex_matrix_to_json(p.psi)}});
        j["points"] = points;
        j["weights"] = s.cfs.weights;
        j["total_volume"] = s.cfs.total_volume;
    }
    if (s.kappa != 0.0) j["kappa"] = s.kappa;
    return j;
}

SystemFile load_system(const std::string &path) {
    return parse_system(load_file(path));
}

void save_system(const std::string &path, const SystemFile &s) {
    write_file(path, system_to_json(s));
}

namespace {

// Catmull-Rom interpolation of tabulated wave operators
struct PsiTable {
    std::vector<double> taus;
    std::vector<Matrix> psis;

    Matrix eval(double tau) const {
        const std::size_t n = taus.size();
        if (n == 1) return psis[0];
        if (tau <= taus.front()) return psis.front();
        if (tau >= taus.back()) return psis.back();
        std::size_t k = 0;
        while (k + 1 < n && taus[k + 1] < tau) ++k;
        const double t0 = taus[k], t1 = taus[k + 1];
        const double u = (tau - t0) / (t1 - t0);
        const Matrix &p1 = psis[k], &p2 = psis[k + 1];
        const Matrix &p0 = psis[k > 0 ? k - 1 : k];
        const Matrix &p3 = psis[k + 2 < n ? k + 2 : k + 1];
        const Matrix m1 = 0.5 * (p2 - p0);
        const Matrix m2 = 0.5 * (p3 - p1);
        const double u2 = u * u, u3 = u2 * u;
        return (2 * u3 - 3 * u2 + 1) * p1 + (u3 - 2 * u2 + u) * m1 +
               (-2 * u3 + 3 * u2) * p2 + (u3 - u2) * m2;
    }
};

} // namespace

CfsVariation parse_cfs_variation(const json &j, int spin_dim) {
    const std::string kind = field(j, "kind").get<std::string>();
    const double tau_max = number_or(j, "tau_max", 1.0);
    if (kind == "identity") {
        CfsVariation v;
        v.tau_max = tau_max;
        return v;
    }
    if (kind == "unitary") {
        const json &gen = field(j, "generator");
        const int f = static_cast<int>(std::lround(std::sqrt(gen.size())));
        if (f * f != static_cast<int>(gen.size()))
            throw SchemaError("generator: expected a square matrix");
        try {
            return make_unitary_variation(
                complex_matrix(gen, f, f, "generator"), tau_max);
        } catch (const std::invalid_argument &e) {
            throw SchemaError(e.what());
        }
    }
    if (kind == "point_flow") {
        const json &paths = field(j, "paths");
        std::vector<std::function<CfsPoint(double)>> fns;
        for (const auto &p : paths) {
            auto table = std::make_shared<PsiTable>();
            table->taus = reals(field(p, "tau"));
            const json &psis = field(p, "psi");
            if (psis.size() != table->taus.size())
                throw SchemaError("path: tau/psi tables differ in length");
            for (const auto &entry : psis) {
                const int total = static_cast<int>(entry.size());
                const int f = total / (2 * spin_dim);
                if (f * 2 * spin_dim != total)
                    throw SchemaError("path psi: wrong entry count");
                table->psis.push_back(
                    complex_matrix(entry, 2 * spin_dim, f, "path psi"));
            }
            fns.push_back([table, spin_dim](double tau) {
                return CfsPoint(table->eval(tau), spin_dim);
            });
        }
        return make_point_flow(std::move(fns), tau_max,
                               j.value("flow_on_measure", false));
    }
    if (kind == "composite") {
        std::vector<CfsVariation> parts;
        for (const auto &p : field(j, "parts"))
            parts.push_back(parse_cfs_variation(p, spin_dim));
        return make_composite(std::move(parts), tau_max);
    }
    throw SchemaError("unknown variation kind: " + kind);
}

CompactVariation parse_compact_variation(const json &j) {
    const std::string kind = field(j, "kind").get<std::string>();
    const double tau_max = number_or(j, "tau_max", 1.0);
    if (kind == "identity") {
        CompactVariation v;
        v.tau_max = tau_max;
        return v;
    }
    if (kind == "point_flow") {
        const json &paths = field(j, "paths");
        std::vector<std::function<int(double)>> fns;
        for (const auto &p : paths) {
            auto taus = std::make_shared<std::vector<double>>(
                reals(field(p, "tau")));
            auto ids = std::make_shared<std::vector<int>>();
            for (const auto &v : field(p, "point")) ids->push_back(v.get<int>());
            if (ids->size() != taus->size())
                throw SchemaError("path: tau/point tables differ in length");
            fns.push_back([taus, ids](double tau) {
                // nearest sampled permutation
                std::size_t best = 0;
                for (std::size_t k = 1; k < taus->size(); ++k)
                    if (std::abs((*taus)[k] - tau) <
                        std::abs((*taus)[best] - tau))
                        best = k;
                return (*ids)[best];
            });
        }
        return make_point_flow(std::move(fns), tau_max,
                               j.value("flow_on_measure", true));
    }
    throw SchemaError("unknown compact variation kind: " + kind);
}

Region parse_region(const json &j) {
    Region r;
    for (const auto &v : field(j, "indices")) {
        if (!v.is_number_integer()) throw SchemaError("omega: integer indices");
        r.indices.push_back(v.get<int>());
    }
    return r;
}

Region load_region(const std::string &path) {
    return parse_region(load_file(path));
}

KillingFile parse_killing(const json &j, int spin_dim) {
    KillingFile k;
    k.variation.f_tau = parse_cfs_variation(field(j, "f_tau"), spin_dim);
    const json &gen = field(j, "generator");
    const int f = static_cast<int>(std::lround(std::sqrt(gen.size())));
    if (f * f != static_cast<int>(gen.size()))
        throw SchemaError("generator: expected a square matrix");
    k.variation.u_tau = std::make_shared<UnitaryFamily>(
        complex_matrix(gen, f, f, "generator"));
    if (auto it = j.find("subspace_k"); it != j.end() && !it->empty()) {
        const int cols = static_cast<int>(it->size());
        Matrix kbasis(f, cols);
        int c = 0;
        for (const auto &colv : *it) {
            const Matrix col = complex_matrix(colv, f, 1, "subspace_k column");
            kbasis.col(c++) = col;
        }
        k.variation.subspace_k = kbasis;
    } else {
        k.variation.subspace_k = Matrix::Zero(f, 0);
    }
    if (auto it = j.find("cert_taus"); it != j.end())
        k.variation.cert_taus = reals(*it);
    k.variation.tau_max = number_or(j, "tau_max", 1.0);
    k.variation.f_tau.tau_max = k.variation.tau_max;
    return k;
}

QhatModel parse_model(const json &j) {
    const std::string type = field(j, "type").get<std::string>();
    std::vector<double> masses = reals(field(j, "masses"));
    std::vector<double> weights;
    if (auto it = j.find("weights"); it != j.end()) weights = reals(*it);
    const double q2_max = number(j, "q2_max");

    auto parse_slopes = [&](const json &arr) {
        std::vector<ShellSlopes> out;
        for (const auto &s : arr)
            out.push_back({number(s, "a_above"), number(s, "a_below"),
                           number(s, "b_above"), number(s, "b_below")});
        return out;
    };

    try {
        QhatModel model;
        if (type == "piecewise_linear") {
            model = make_piecewise_linear_model(
                masses, weights, number(j, "shell_value"),
                parse_slopes(field(j, "slopes")), number_or(j, "a0", 0.0),
                number_or(j, "a_share", 0.0), q2_max);
        } else if (type == "smooth") {
            model = make_smooth_model(
                masses, weights, number(j, "shell_value"),
                number(j, "curvature"), number_or(j, "a0", 0.0),
                number_or(j, "a_share", 0.0), q2_max);
        } else if (type == "sampled") {
            const json &curve = field(j, "curve");
            auto q2 = std::make_shared<std::vector<double>>(
                reals(field(curve, "q2")));
            auto av = std::make_shared<std::vector<double>>(
                reals(field(curve, "a")));
            auto bv = std::make_shared<std::vector<double>>(
                reals(field(curve, "b")));
            if (q2->size() != av->size() || q2->size() != bv->size() ||
                q2->size() < 2)
                throw SchemaError("curve: q2/a/b must share a length >= 2");
            auto interp = [q2](const std::shared_ptr<std::vector<double>> &ys) {
                return [q2, ys](double s) {
                    const auto &xs = *q2;
                    if (s <= xs.front()) return ys->front();
                    if (s >= xs.back()) return ys->back();
                    std::size_t k = 0;
                    while (k + 1 < xs.size() && xs[k + 1] < s) ++k;
                    const double u = (s - xs[k]) / (xs[k + 1] - xs[k]);
                    return (1.0 - u) * (*ys)[k] + u * (*ys)[k + 1];
                };
            };
            model.masses = masses;
            model.rho_weights = weights;
            model.a = interp(av);
            model.b = interp(bv);
            model.slopes = parse_slopes(field(j, "slopes"));
            model.q2_max = q2_max;
            model.check();
        } else {
            throw SchemaError("unknown model type: " + type);
        }
        model.cone_margin = number_or(j, "cone_margin", model.cone_margin);
        return model;
    } catch (const std::invalid_argument &e) {
        throw SchemaError(e.what());
    }
}

json model_to_json(const QhatModel &m, int curve_samples) {
    json j;
    j["type"] = "sampled";
    j["masses"] = m.masses;
    if (!m.rho_weights.empty()) j["weights"] = m.rho_weights;
    j["q2_max"] = m.q2_max;
    j["cone_margin"] = m.cone_margin;
    json slopes = json::array();
    for (const auto &s : m.slopes)
        slopes.push_back({{"a_above", s.a_above},
                          {"a_below", s.a_below},
                          {"b_above", s.b_above},
                          {"b_below", s.b_below}});
    j["slopes"] = slopes;
    json q2 = json::array(), av = json::array(), bv = json::array();
    const std::vector<double> grid = default_q2_grid(m, curve_samples);
    for (double s : grid) {
        q2.push_back(s);
        av.push_back(m.a(s));
        bv.push_back(m.b(s));
    }
    j["curve"] = {{"q2", q2}, {"a", av}, {"b", bv}};
    return j;
}

QhatModel load_model(const std::string &path) {
    return parse_model(load_file(path));
}

WavePacket parse_packet(const json &j) {
    const json &profile = field(j, "profile");
    const std::string type = field(profile, "type").get<std::string>();
    if (type != "gaussian")
        throw SchemaError("unknown profile type: " + type);
    WavePacket p = gaussian_packet(
        static_cast<int>(number(j, "generation")), number(profile, "width"),
        number_or(profile, "amplitude", 1.0),
        static_cast<int>(number_or(j, "radial_nodes", 256)),
        static_cast<int>(number_or(j, "polarization", 0)));
    return p;
}

WavePacket load_packet(const std::string &path) {
    return parse_packet(load_file(path));
}

OptimizerConfig parse_optimizer_config(const json &j) {
    OptimizerConfig cfg;
    if (auto it = j.find("method"); it != j.end()) {
        const std::string m = it->get<std::string>();
        if (m == "projected_gradient") cfg.method = OptMethod::ProjectedGradient;
        else if (m == "frank_wolfe") cfg.method = OptMethod::FrankWolfe;
        else if (m == "annealing") cfg.method = OptMethod::Annealing;
        else throw SchemaError("unknown method: " + m);
    }
    if (auto it = j.find("point_mode"); it != j.end()) {
        const std::string m = it->get<std::string>();
        if (m == "full") cfg.point_mode = PointMode::Full;
        else if (m == "scale") cfg.point_mode = PointMode::Scale;
        else if (m == "frozen") cfg.point_mode = PointMode::Frozen;
        else throw SchemaError("unknown point_mode: " + m);
    }
    cfg.max_iters = static_cast<int>(number_or(j, "max_iters", cfg.max_iters));
    cfg.step0 = number_or(j, "step0", cfg.step0);
    cfg.h_fd = number_or(j, "h_fd", cfg.h_fd);
    cfg.penalty_trace = number_or(j, "penalty_trace", cfg.penalty_trace);
    cfg.penalty_bound = number_or(j, "penalty_bound", cfg.penalty_bound);
    cfg.seed = static_cast<std::uint64_t>(number_or(j, "seed", 0.0));
    cfg.stop_tol = number_or(j, "stop_tol", cfg.stop_tol);
    if (auto it = j.find("init_weights"); it != j.end())
        cfg.init_weights = reals(*it);
    try {
        cfg.check();
    } catch (const std::invalid_argument &e) {
        throw SchemaError(e.what());
    }
    return cfg;
}

ActionParams parse_action_params(const json &j) {
    ActionParams p;
    p.kappa = number_or(j, "kappa", 0.0);
    if (auto it = j.find("nu"); it != j.end()) p.nu = it->get<double>();
    if (auto it = j.find("bound_C"); it != j.end())
        p.bound_C = it->get<double>();
    if (auto it = j.find("trace_target"); it != j.end())
        p.trace_target = it->get<double>();
    p.probe_count = static_cast<int>(number_or(j, "probe_count", 64));
    p.probe_seed = static_cast<std::uint64_t>(number_or(j, "probe_seed", 0.0));
    return p;
}

json to_json(const ElReport &r) {
    return {{"ell_values", r.ell_values},
            {"trace_values", r.trace_values},
            {"nu", r.nu},
            {"nu_estimate", r.nu_estimate},
            {"nu_spread", r.nu_spread},
            {"nu_excluded", r.nu_excluded},
            {"residual_constancy", r.residual_constancy},
            {"residual_minimality", r.residual_minimality},
            {"scale", r.scale},
            {"probe_count", r.probe_count},
            {"probe_seed", r.probe_seed}};
}

json to_json(const ConservationVerdict &v) {
    json profile = json::array();
    for (const auto &[tau, value] : v.tau_profile)
        profile.push_back({{"tau", tau}, {"sli", value}});
    return {{"derivative_estimate", v.derivative_estimate},
            {"fd_step", v.fd_step},
            {"fd_error", v.fd_error},
            {"scale", v.scale},
            {"el_residual", v.el_residual},
            {"el_slack", v.el_slack},
            {"tol_abs", v.tol_abs},
            {"tol_rel", v.tol_rel},
            {"precondition_ok", v.precondition_ok},
            {"failure_kind", v.failure_kind},
            {"pass", v.pass},
            {"tau_profile", profile}};
}

json to_json(const IdentityCheck &c) {
    return {{"lhs", c.lhs},         {"middle", c.middle}, {"sli", c.sli},
            {"residual", c.residual}, {"scale", c.scale}};
}

json to_json(const VolumeReduction &v) {
    return {{"sli", v.sli},
            {"ell_weighted_difference", v.ell_weighted_difference},
            {"residual", v.residual},
            {"scale", v.scale},
            {"volume_difference", v.volume_difference},
            {"ell_bar_times_volume", v.ell_bar_times_volume},
            {"bijective", v.bijective}};
}

json to_json(const StabilityReport &r) {
    return {{"a_nonnegative", r.a_nonnegative},
            {"min_a", r.min_a},
            {"shell_values_equal", r.shell_values_equal},
            {"shell_value", r.shell_value},
            {"shell_value_spread", r.shell_value_spread},
            {"minimal_on_shells", r.minimal_on_shells},
            {"grid_min", r.grid_min},
            {"grid_min_location", r.grid_min_location},
            {"boost_invariance_violation", r.boost_invariance_violation},
            {"c_values", r.c_values},
            {"c_nonnegative", r.c_nonnegative},
            {"pass", r.pass}};
}

json to_json(const ConsistencyReport &r) {
    return {{"products", r.products},
            {"max_rel_deviation", r.max_rel_deviation},
            {"pass", r.pass}};
}

json to_json(const DualValue &v) {
    return {{"momentum_form", v.momentum_form},
            {"position_form", v.position_form},
            {"difference", v.difference()}};
}

json to_json(const LayerLemmaResult &r) {
    return {{"lhs", r.lhs},
            {"rhs", r.rhs},
            {"difference", std::abs(r.lhs - r.rhs)},
            {"preconditions_ok", r.preconditions_ok},
            {"note", r.note}};
}

} // namespace cvp::io
