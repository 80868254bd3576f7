// Command line front end: run single cases, convergence sweeps, the mesh
// relay demo, and the transcendental front-coefficient solvers.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "xmesh/cases.hpp"

namespace {

int verbosity() {
    const char* v = std::getenv("XMESH_VERBOSE");
    return v ? std::atoi(v) : 0;
}

void apply_overrides(xmesh::CaseConfig& cfg, const std::string& out_dir, int vtk_every) {
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (vtk_every >= 0) cfg.vtk_every = vtk_every;
}

void print_series(const xmesh::TimeSeries& series) {
    if (verbosity() < 1) return;
    for (const auto& s : series.samples)
        std::cerr << "t=" << s.time << "s front=" << s.front_pos << "m xi=" << s.xi
                  << " iters=" << s.iterations << " err=" << s.err << "K\n";
    for (const auto& e : series.events) std::cerr << "event: " << e << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-phase front-tracking simulator on a relaying mesh"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int vtk_every = -1;
    unsigned seed = 0; // reserved; all algorithms are deterministic
    app.add_option("--out-dir", out_dir, "output directory (overrides config)");
    app.add_option("--vtk-every", vtk_every, "snapshot every N steps (overrides config)");
    app.add_option("--seed", seed, "random seed (reserved, unused)");

    auto* run = app.add_subcommand("run", "run one case from a config file");
    run->add_option("config", config_path, "config file")->required();

    auto* sweep = app.add_subcommand("sweep", "mesh convergence sweep of a case");
    std::vector<double> sizes;
    sweep->add_option("config", config_path, "config file")->required();
    sweep->add_option("--sizes", sizes, "element sizes [m]")->required()->expected(-2);

    auto* demo = app.add_subcommand("demo", "demonstrations");
    auto* relay = demo->add_subcommand("relay", "pure mesh-relay demo on a rotating line");
    bool anti = false;
    relay->add_flag("--anti", anti, "move the wrong (downstream) nodes to show the failure mode");
    demo->require_subcommand(1);

    auto* phi = app.add_subcommand("phi", "solve a front-coefficient transcendental equation");
    std::string phi_kind;
    double T_s = 263.15, T_l = 293.15, latent = 3.3e5, Q = 100.0;
    phi->add_option("kind", phi_kind, "planar|axisym")->required()
        ->check(CLI::IsMember({"planar", "axisym"}));
    phi->add_option("--T-s", T_s, "cold wall temperature [K] (planar)");
    phi->add_option("--T-l", T_l, "liquid temperature [K]");
    phi->add_option("--latent", latent, "latent heat [J/kg]");
    phi->add_option("--Q", Q, "sink intensity [W/m] (axisym)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto cfg = xmesh::parse_case_config(xmesh::Config::load(config_path));
            apply_overrides(cfg, out_dir, vtk_every);
            xmesh::CaseSetup setup = xmesh::build_case(cfg);
            xmesh::TimeSeries series = xmesh::run_case_loop(setup, cfg);
            print_series(series);
            if (!cfg.out_dir.empty()) {
                std::filesystem::create_directories(cfg.out_dir);
                xmesh::write_series_csv(series, cfg.out_dir + "/series.csv");
            }
            const auto& last = series.samples.back();
            std::cout << "steps=" << series.samples.size() - 1 << " t_end=" << last.time
                      << "s front=" << last.front_pos << "m";
            if (!std::isnan(last.xi)) std::cout << " xi=" << last.xi;
            std::cout << "\n";
            for (const auto& e : series.events) std::cout << "event: " << e << "\n";
        } else if (*sweep) {
            auto cfg = xmesh::parse_case_config(xmesh::Config::load(config_path));
            apply_overrides(cfg, out_dir, vtk_every);
            xmesh::SweepResult res = xmesh::convergence_sweep(cfg, sizes);
            std::cout << "h_e_m,xi_bar\n";
            for (const auto& row : res.rows)
                std::cout << row.element_size << "," << row.xi_bar << "\n";
            if (!std::isnan(res.slope)) std::cout << "slope=" << res.slope << "\n";
        } else if (*relay) {
            xmesh::RelayDemoResult res = xmesh::run_relay_demo(10, 20, anti);
            for (const auto& s : res.samples)
                std::cout << "t=" << s.t << " max_front_residual=" << s.max_front_residual
                          << " compatible=" << s.compatible
                          << " inverted_elements=" << s.inverted_elements << "\n";
            if (anti)
                std::cout << (res.persistent_inversion ? "persistent inversion observed\n"
                                                       : "no persistent inversion\n");
        } else if (*phi) {
            xmesh::MaterialProperties props = xmesh::MaterialProperties::ice_water(latent);
            double value = phi_kind == "planar"
                               ? xmesh::solve_phi_planar(props, T_s, T_l)
                               : xmesh::solve_phi_axisym(props, Q, T_l);
            std::cout << "phi=" << std::setprecision(10) << value << "\n";
        }
    } catch (const xmesh::NonConvergence& e) {
        std::cerr << "non-convergence: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
