#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "grapho/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"grapho: kinematic scoring of copied drawings"};
    app.require_subcommand(1);

    grapho::RunConfig run;
    auto* score = app.add_subcommand("score", "Score sessions and write cohort tables");
    score->add_option("--in", run.inputs, "Session files or directories of .gsx files")->required();
    score->add_option("--out", run.out_dir, "Output directory")->required();
    std::string config;
    score->add_option("--config", config, "key=value threshold overrides");

    std::string table, features = "VPR,P", cluster_out = "cluster_report.json";
    std::optional<int> k;
    std::uint64_t seed = 0;
    auto* cluster = app.add_subcommand("cluster", "Cluster subjects by velocity item totals");
    cluster->add_option("--table", table, "Velocity score table (CSV)")->required();
    cluster->add_option("--features", features, "Comma separated features out of VPR,VC,P,T");
    cluster->add_option("--k", k, "Number of clusters (default: best silhouette)");
    cluster->add_option("--seed", seed, "Seed for k-means initialisation")->required();
    cluster->add_option("--out", cluster_out, "Report file");

    std::string plot_in, plot_out;
    auto* plot = app.add_subcommand("plot", "Write trajectory and velocity SVGs for one session");
    plot->add_option("--in", plot_in, "Session file")->required();
    plot->add_option("--out", plot_out, "Output directory")->required();

    std::string spec, synth_out;
    auto* synth = app.add_subcommand("synth", "Generate synthetic sessions from a cohort spec");
    synth->add_option("--spec", spec, "Cohort spec file")->required();
    synth->add_option("--out", synth_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : grapho::kExitUsage;
    }

    if (*score) {
        if (!config.empty()) run.config_file = config;
        return grapho::cmd_score(run, std::cout, std::cerr);
    }
    if (*cluster) return grapho::cmd_cluster(table, features, k, seed, cluster_out, std::cout, std::cerr);
    if (*plot) return grapho::cmd_plot(plot_in, plot_out, std::cout, std::cerr);
    return grapho::cmd_synth(spec, synth_out, std::cout, std::cerr);
}
