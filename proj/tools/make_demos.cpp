// Regenerates the bundled demo inputs under demo/.  Run from the repository
// root: build/tools/cvp_make_demos [output-dir]

#include "cvp/json_io.hpp"
#include "cvp/variation.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>

using namespace cvp;
using cvp::io::json;

namespace {

json psi_json(const Matrix &m) {
    json out = json::array();
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
            out.push_back({m(r, c).real(), m(r, c).imag()});
    return out;
}

// exact global minimizer: atoms on orthogonal two-planes (see the test
// fixtures for the construction)
CfsMeasure orthogonal_minimizer(int atoms) {
    CfsMeasure m;
    const int f = 2 * atoms;
    for (int i = 0; i < atoms; ++i) {
        Matrix psi = Matrix::Zero(2, f);
        psi(0, 2 * i) = 1.0;
        psi(1, 2 * i + 1) = 1.0;
        m.points.emplace_back(psi, 1);
        m.weights.push_back(1.0 / atoms);
    }
    m.total_volume = 1.0;
    return m;
}

Matrix kron_shift_generator(int atoms, double tau_step) {
    const int m = atoms;
    Matrix small = Matrix::Zero(m, m);
    for (int k = 0; k < m; ++k) {
        const int rep = k <= m / 2 ? k : k - m;
        const double theta = -2.0 * M_PI * rep / (m * tau_step);
        Vector v(m);
        for (int j = 0; j < m; ++j)
            v[j] = std::polar(1.0 / std::sqrt(double(m)),
                              2.0 * M_PI * j * k / m);
        small += theta * (v * v.adjoint());
    }
    Matrix full = Matrix::Zero(2 * m, 2 * m);
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
            for (int a = 0; a < 2; ++a)
                full(2 * j + a, 2 * k + a) = small(j, k);
    return full;
}

} // namespace

int main(int argc, char **argv) {
    const std::filesystem::path dir = argc > 1 ? argv[1] : "demo";
    std::filesystem::create_directories(dir);
    auto emit = [&](const std::string &name, const json &j) {
        io::write_file((dir / name).string(), j);
        std::cout << "wrote " << (dir / name).string() << "\n";
    };

    const int atoms = 4;
    const CfsMeasure minimizer = orthogonal_minimizer(atoms);

    // systems
    {
        io::SystemFile s;
        s.cfs = minimizer;
        s.spin_dim = 1;
        emit("system_minimizer.json", io::system_to_json(s));
    }
    {
        json j;
        j["mode"] = "compact";
        j["kernel_matrix"] = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
        j["weights"] = {0.5, 0.3, 0.2};
        j["total_volume"] = 1.0;
        emit("system_compact_diag.json", j);
    }

    // unitary variation: the orbit generator of the cyclic shift
    const double tau_step = 0.5;
    const Matrix generator = kron_shift_generator(atoms, tau_step);
    emit("variation_unitary.json", {{"kind", "unitary"},
                                    {"tau_max", 2.0},
                                    {"generator", psi_json(generator)}});

    // point-flow variation: the orbit path, tabulated at the fd stencil and
    // at the permutation-complete tau so the interpolation is exact there
    UnitaryFamily family(generator);
    const double h = 1e-3 * 2.0;
    const std::vector<double> taus = {-tau_step, -h,      -h / 2, 0.0,
                                      h / 2,     h,       tau_step};
    json paths = json::array();
    for (int i = 0; i < atoms; ++i) {
        json tau_arr = json::array(), psi_arr = json::array();
        for (double t : taus) {
            tau_arr.push_back(t);
            psi_arr.push_back(
                psi_json(minimizer.points[i].psi * family.inverse_at(t)));
        }
        paths.push_back({{"tau", tau_arr}, {"psi", psi_arr}});
    }
    emit("variation_orbit_flow.json", {{"kind", "point_flow"},
                                       {"tau_max", 2.0},
                                       {"flow_on_measure", true},
                                       {"paths", paths}});

    emit("omega_first2.json", {{"indices", {0, 1}}});

    // Killing pair: orbit flow against unitaries that differ on a
    // two-dimensional invariant subspace K
    Matrix k_basis = Matrix::Zero(2 * atoms, 2);
    for (int j = 0; j < atoms; ++j) {
        const Complex phase = std::polar(1.0 / std::sqrt(double(atoms)),
                                         2.0 * M_PI * j / atoms);
        k_basis(2 * j, 0) = phase;
        k_basis(2 * j + 1, 1) = phase;
    }
    const Matrix b = 0.8 * (k_basis * k_basis.adjoint());
    json k_cols = json::array();
    for (int c = 0; c < 2; ++c) {
        json col = json::array();
        for (int r = 0; r < 2 * atoms; ++r)
            col.push_back({k_basis(r, c).real(), k_basis(r, c).imag()});
        k_cols.push_back(col);
    }
    emit("killing_orbit.json",
         {{"f_tau",
           {{"kind", "point_flow"},
            {"tau_max", 2.0},
            {"flow_on_measure", true},
            {"paths", paths}}},
          {"generator", psi_json(generator + b)},
          {"subspace_k", k_cols},
          {"cert_taus", {tau_step, -tau_step}},
          {"tau_max", 2.0}});

    // continuum model and packet; the slopes realize c_beta = kappa0 /
    // (rho_beta m_beta) so the generation consistency condition holds exactly
    {
        const std::vector<double> masses = {1.0, 1.35, 1.8};
        const std::vector<double> weights = {1.0, 0.9, 1.2};
        const double kappa0 = 2.0, a_share = 0.35;
        json slopes = json::array();
        for (int beta = 0; beta < 3; ++beta) {
            const double c = kappa0 / (weights[beta] * masses[beta]);
            const double above = 1.25 * c, below = -0.25 * c;
            slopes.push_back({{"a_above", a_share * above},
                              {"a_below", a_share * below},
                              {"b_above", (1.0 - a_share) * above},
                              {"b_below", (1.0 - a_share) * below}});
        }
        emit("model_pwl.json", {{"type", "piecewise_linear"},
                                {"masses", masses},
                                {"weights", weights},
                                {"shell_value", 2.0},
                                {"slopes", slopes},
                                {"a0", 0.4},
                                {"a_share", a_share},
                                {"q2_max", 36.0},
                                {"cone_margin", 1e-6}});
    }
    emit("packet_gauss.json", {{"generation", 0},
                               {"polarization", 0},
                               {"radial_nodes", 128},
                               {"profile",
                                {{"type", "gaussian"}, {"width", 0.9}}}});
    emit("opt_compact.json", {{"method", "projected_gradient"},
                              {"max_iters", 5000},
                              {"stop_tol", 1e-12},
                              {"seed", 7}});
    return 0;
}
