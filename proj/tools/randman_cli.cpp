#include "randman/errors.hpp"
#include "randman/gp_model.hpp"
#include "randman/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace randman;

namespace {

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return config_from_json(j);
}

void print_summary_line(const ExperimentResult& res) {
    int excluded = 0;
    for (const auto& r : res.replicates) excluded += r.excluded ? 1 : 0;
    std::cerr << to_string(res.config.kind) << ": " << res.replicates.size() << " replicates ("
              << excluded << " excluded) in " << res.wall_seconds << " s; outputs in "
              << res.config.out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random Gaussian embeddings of Riemannian manifolds"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", version());

    std::string config_path, manifold, spectrum, out_dir, k_list_text, save_model_path;
    int waves = 0, replicates = 0, threads = 0, nodes = 0, grid = 0, zero_grid = 0;
    std::uint64_t seed = 0;
    bool plot = false;

    auto* o_config = app.add_option("--config", config_path, "JSON experiment config");
    auto* o_manifold = app.add_option("--manifold", manifold, "torus:<m>[:<P1,..>] or sphere:<r>");
    auto* o_waves = app.add_option("--waves", waves, "number of waves in the model");
    auto* o_spectrum = app.add_option("--spectrum", spectrum, "uniform-shell | gaussian");
    auto* o_seed = app.add_option("--seed", seed, "root seed");
    auto* o_klist = app.add_option("--k-list", k_list_text, "comma-separated embedding dimensions");
    auto* o_reps = app.add_option("--replicates", replicates, "replicates per k");
    auto* o_threads = app.add_option("--threads", threads, "worker threads");
    auto* o_out = app.add_option("--out-dir", out_dir, "output directory");
    auto* o_plot = app.add_flag("--plot", plot, "also write an SVG plot");
    auto* o_nodes = app.add_option("--nodes", nodes, "quadrature nodes (0 = manifold default)");
    auto* o_grid = app.add_option("--grid", grid, "evaluation grid points per axis");
    auto* o_zgrid = app.add_option("--zero-grid", zero_grid, "sign-grid cells per axis");
    app.add_option("--save-model", save_model_path, "write the wave model to this JSON file");
    (void)o_config;

    auto* c_converge = app.add_subcommand("converge", "C^0/C^1/C^2 deviation of the pullback metric");
    auto* c_lkcconv = app.add_subcommand("lkc-converge", "LKC deviation of pullback metrics versus k");
    auto* c_unbiased = app.add_subcommand("unbiased", "Monte Carlo mean of pullback LKCs");
    auto* c_zero = app.add_subcommand("zero-count", "common zeros of two fields on a surface");

    auto* c_lkc = app.add_subcommand("lkc", "LKCs of one metric, printed as JSON");
    std::string metric = "reference";
    int lkc_k = 64;
    c_lkc->add_option("--metric", metric, "reference | pullback")
        ->check(CLI::IsMember({"reference", "pullback"}));
    c_lkc->add_option("--k", lkc_k, "embedding dimension for --metric pullback");

    auto* c_gmf = app.add_subcommand("gmf", "Gaussian Minkowski functionals of a point");
    int gmf_n = 2, gmf_jmax = 8;
    c_gmf->add_option("--n", gmf_n, "ambient dimension")->required();
    c_gmf->add_option("--jmax", gmf_jmax, "largest index");

    auto* c_gkf = app.add_subcommand("gkf-table", "expected LKCs of a random codimension-n slice");
    int codim = 1;
    c_gkf->add_option("--codim", codim, "codimension of the subspace")->required();

    int order = 2;
    auto* o_order = c_converge->add_option("--order", order, "highest C^i order computed");

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        if (o_manifold->count()) cfg.manifold = manifold;
        if (o_waves->count()) cfg.waves = waves;
        if (o_spectrum->count()) cfg.spectrum = parse_spectral_shape(spectrum);
        if (o_seed->count()) cfg.seed = seed;
        if (o_klist->count()) {
            cfg.k_list.clear();
            std::stringstream ss(k_list_text);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty()) cfg.k_list.push_back(std::stoi(item));
        }
        if (o_reps->count()) cfg.replicates = replicates;
        if (o_threads->count()) cfg.threads = threads;
        if (o_out->count()) cfg.out_dir = out_dir;
        if (o_plot->count()) cfg.plot = plot;
        if (o_nodes->count()) cfg.nodes = nodes;
        if (o_grid->count()) cfg.grid = grid;
        if (o_zgrid->count()) cfg.zero_grid = zero_grid;
        if (o_order->count()) cfg.order = order;

        if (!save_model_path.empty()) {
            auto atlas = parse_manifold(cfg.manifold, cfg.nodes);
            save_model(build_model(atlas, cfg.waves, cfg.spectrum, cfg.seed), save_model_path);
        }

        if (c_lkc->parsed()) {
            auto src = metric == "pullback" ? MetricSource::Pullback : MetricSource::Reference;
            std::cout << lkc_report(cfg.manifold, cfg.nodes, src, lkc_k, cfg.waves, cfg.spectrum,
                                    cfg.seed)
                             .dump(2)
                      << "\n";
            return 0;
        }
        if (c_gmf->parsed()) {
            std::cout << gmf_report(gmf_n, gmf_jmax).dump(2) << "\n";
            return 0;
        }
        if (c_gkf->parsed()) {
            std::cout << gkf_table(cfg.manifold, cfg.nodes, codim).dump(2) << "\n";
            return 0;
        }

        if (c_converge->parsed()) cfg.kind = ExperimentKind::Converge;
        else if (c_lkcconv->parsed()) cfg.kind = ExperimentKind::LkcConverge;
        else if (c_unbiased->parsed()) cfg.kind = ExperimentKind::Unbiased;
        else if (c_zero->parsed()) cfg.kind = ExperimentKind::ZeroCount;
        validate(cfg);
        auto res = run_experiment(cfg);
        emit_outputs(res, cfg);
        print_summary_line(res);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
