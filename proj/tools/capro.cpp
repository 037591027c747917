// Command-line front end: MANET sample generation, capillary route building,
// FEC rate tables, ROR rating and experiment sweeps.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "capro/capillary.hpp"
#include "capro/dot.hpp"
#include "capro/errors.hpp"
#include "capro/experiment.hpp"
#include "capro/fec.hpp"
#include "capro/manet.hpp"
#include "capro/network.hpp"
#include "capro/ror.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw capro::ValidationError("cannot open file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw capro::ValidationError("cannot write file " + path);
    out << content;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"capillary multi-path routing toolkit"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "generate random-walk MANET sample files");
    std::string gen_preset, gen_out = "sample";
    capro::ManetConfig gen_cfg;
    gen_cfg.node_count = 40;
    gen_cfg.coverage_radius = 300.0;
    gen_cfg.step_length = 40.0;
    std::uint64_t gen_seed = 0;
    int gen_nodes = 0, gen_frames = 0;
    double gen_width = 0, gen_height = 0, gen_radius = 0, gen_step = 0;
    gen->add_option("--preset", gen_preset, "named config: desk40, fig15, fig17, fig18");
    gen->add_option("--nodes", gen_nodes, "node count");
    gen->add_option("--frames", gen_frames, "number of timeframes");
    gen->add_option("--width", gen_width, "area width");
    gen->add_option("--height", gen_height, "area height");
    gen->add_option("--radius", gen_radius, "coverage radius");
    gen->add_option("--step", gen_step, "random-walk step length");
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--out", gen_out, "output file prefix");

    // route
    auto* route = app.add_subcommand("route", "build a capillary routing pattern");
    std::string route_net, route_json, route_dot;
    int route_src = 0, route_sink = 0, route_layers = 10;
    route->add_option("--network", route_net, "network JSON file")->required();
    route->add_option("--source", route_src, "source node id")->required();
    route->add_option("--sink", route_sink, "sink node id")->required();
    route->add_option("--layers", route_layers, "maximum number of capillary layers");
    route->add_option("--json", route_json, "write pattern JSON here (default stdout)");
    route->add_option("--dot", route_dot, "also write a Graphviz DOT rendering here");

    // fec-table
    auto* fec = app.add_subcommand("fec-table", "emit the rate-increase factor table as CSV");
    double fec_der = 1e-5;
    int fec_mmax = 10;
    fec->add_option("--der", fec_der, "decoding error rate");
    fec->add_option("--m-max", fec_mmax, "largest source packet count column");

    // ror
    auto* ror = app.add_subcommand("ror", "rate a routing pattern");
    std::string ror_pattern, ror_mode = "short";
    double ror_t = 0.0, ror_der = 1e-5;
    int ror_m = 20;
    ror->add_option("--pattern", ror_pattern, "pattern JSON file")->required();
    ror->add_option("--t", ror_t, "static tolerance")->required();
    ror->add_option("--mode", ror_mode, "short | large");
    ror->add_option("--m", ror_m, "source packets per FEC block (short mode)");
    ror->add_option("--der", ror_der, "decoding error rate (short mode)");

    // experiment
    auto* exp = app.add_subcommand("experiment", "run a layer/tolerance/sample sweep");
    std::string exp_config, exp_prefix = "results";
    exp->add_option("--config", exp_config, "experiment config JSON file")->required();
    exp->add_option("--out-prefix", exp_prefix, "CSV output prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*gen) {
            capro::ManetConfig cfg = gen_cfg;
            if (!gen_preset.empty()) {
                auto p = capro::manet_preset(gen_preset);
                if (!p) throw capro::ValidationError("unknown preset \"" + gen_preset + "\"");
                cfg = *p;
            }
            if (gen_nodes > 0) cfg.node_count = gen_nodes;
            if (gen_frames > 0) cfg.timeframes = gen_frames;
            if (gen_width > 0) cfg.width = gen_width;
            if (gen_height > 0) cfg.height = gen_height;
            if (gen_radius > 0) cfg.coverage_radius = gen_radius;
            if (gen_step > 0) cfg.step_length = gen_step;
            cfg.seed = gen_seed;
            auto frames = capro::generate_samples(cfg);
            for (int f = 0; f < static_cast<int>(frames.size()); ++f)
                write_file(gen_out + "_" + std::to_string(f) + ".json",
                           capro::sample_to_json(frames[f], cfg, f));
            std::cout << "wrote " << frames.size() << " sample files with prefix " << gen_out
                      << "\n";
        } else if (*route) {
            capro::Network net = capro::network_from_document(read_file(route_net));
            auto [pattern, stats] =
                capro::build_capillary(net, {route_src, route_sink}, route_layers);
            std::string doc = capro::pattern_to_json(pattern);
            if (route_json.empty())
                std::cout << doc << "\n";
            else
                write_file(route_json, doc);
            if (!route_dot.empty()) write_file(route_dot, capro::export_dot(pattern));
        } else if (*fec) {
            std::cout << capro::fec_table_csv(fec_der, fec_mmax);
        } else if (*ror) {
            capro::RoutingPattern pat = capro::pattern_from_json(read_file(ror_pattern));
            capro::RorReport rep;
            if (ror_mode == "short")
                rep = capro::ror_short_buffer(pat, {ror_t}, {ror_m, ror_der});
            else if (ror_mode == "large")
                rep = capro::ror_large_blocks(pat, {ror_t});
            else
                throw capro::ValidationError("mode must be short or large");
            std::cout << capro::ror_report_to_json(rep) << "\n";
        } else if (*exp) {
            capro::ExperimentConfig cfg = capro::experiment_config_from_json(read_file(exp_config));
            capro::ExperimentResult res = capro::run_experiment(cfg);
            write_file(exp_prefix + "_ror.csv", res.ror_csv);
            write_file(exp_prefix + "_stats.csv", res.stats_csv);
            std::cout << "wrote " << exp_prefix << "_ror.csv and " << exp_prefix
                      << "_stats.csv (" << res.dropped << " samples dropped)\n";
        }
    } catch (const capro::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
