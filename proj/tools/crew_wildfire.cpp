#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "wildfire/harness.hpp"

using namespace wildfire;

namespace {

HarnessConfig base_config(const std::string& path)
{
    return path.empty() ? default_harness_config() : load_config(path);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Wildfire multi-agent benchmark"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> levels;
    std::vector<std::uint64_t> seeds;
    std::string framework;
    std::string lm;
    std::string out;
    unsigned jobs = 1;
    std::vector<std::string> inputs;
    std::string baseline = "printed";

    auto* gen = app.add_subcommand("generate", "Build a level (or bare world) and write a snapshot and ASCII dump");
    gen->add_option("--config", config_path, "Config file (JSON)");
    gen->add_option("--level", levels, "Level name; omit for a bare world from the generator config")->expected(0, 1);
    gen->add_option("--seed", seeds, "Seed")->expected(0, 1);
    gen->add_option("--out", out, "Output directory");

    auto* run = app.add_subcommand("run", "Run episodes and write one RunLog per level and seed");
    run->add_option("--config", config_path, "Config file (JSON)");
    run->add_option("--level", levels, "Level name (repeatable)");
    run->add_option("--seed", seeds, "Seed (repeatable); defaults to the level's canonical seeds");
    run->add_option("--framework", framework, "do_nothing | camon | coela | embodied | hmas2");
    run->add_option("--lm", lm, "mock:<script> | http");
    run->add_option("--out", out, "Output directory");
    run->add_option("--jobs", jobs, "Episodes run in parallel")->check(CLI::PositiveNumber);

    auto* score = app.add_subcommand("score", "Mean and standard deviation of final scores per level");
    score->add_option("logs", inputs, "RunLog files or directories")->required();

    auto* bcs = app.add_subcommand("bcs", "Behavior competency table, radar data and telemetry summary");
    bcs->add_option("logs", inputs, "RunLog files or directories")->required();
    bcs->add_option("--out", out, "Directory for bcs.tsv, radar.tsv and telemetry.tsv");
    bcs->add_option("--baseline", baseline, "printed | formula")->check(CLI::IsMember({"printed", "formula"}));

    auto* replay = app.add_subcommand("replay", "Re-simulate RunLogs and verify every step digest");
    replay->add_option("logs", inputs, "RunLog files or directories")->required();

    auto* lv = app.add_subcommand("levels", "List the level catalog");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            auto cfg = base_config(config_path);
            if (!out.empty()) cfg.out = out;
            const std::string level = levels.empty() ? std::string() : levels.front();
            const std::uint64_t seed = seeds.empty() ? (level.empty() ? cfg.gen.seed : find_level(level).seeds.front())
                                                     : seeds.front();
            const auto r = cmd_generate(cfg, level, seed);
            std::cout << "snapshot " << r.snapshot_path << "\nascii " << r.ascii_path << "\ndigest " << hex_digest(r.digest)
                      << "\n";
        } else if (*run) {
            auto cfg = base_config(config_path);
            if (!levels.empty()) {
                cfg.levels.clear();
                for (const auto& l : levels) {
                    const auto& spec = find_level(l);
                    cfg.levels.push_back({spec.name, seeds.empty() ? spec.seeds : seeds});
                }
            } else if (!seeds.empty()) {
                for (auto& sel : cfg.levels) sel.seeds = seeds;
            }
            if (!framework.empty()) cfg.framework_name = framework;
            if (!lm.empty()) cfg.lm = lm;
            if (!out.empty()) cfg.out = out;
            for (const auto& r : cmd_run(cfg, jobs)) {
                std::printf("%s\tseed %llu\tscore %.2f\t%s\t%s\n", r.level.c_str(),
                            static_cast<unsigned long long>(r.seed), r.result.final_score.value,
                            std::string(termination_name(r.result.reason)).c_str(), r.log_path.c_str());
            }
        } else if (*score) {
            std::cout << cmd_score(inputs);
        } else if (*bcs) {
            const auto r = cmd_bcs(inputs, out, baseline == "formula" ? BaselineSource::Formula : BaselineSource::Printed);
            for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
            std::cout << r.table;
        } else if (*replay) {
            int failures = 0;
            std::vector<std::string> files;
            for (const auto& l : load_logs(inputs)) files.push_back(l.path);
            for (const auto& f : files) {
                const auto rep = cmd_replay(f);
                std::printf("%s\t%s\t%lld/%lld steps verified\n", rep.ok() ? "OK" : "MISMATCH", f.c_str(),
                            static_cast<long long>(rep.verified), static_cast<long long>(rep.steps));
                for (const auto& m : rep.mismatches) std::printf("  %s\n", m.c_str());
                if (!rep.ok()) ++failures;
            }
            return failures == 0 ? 0 : 1;
        } else if (*lv) {
            std::cout << cmd_levels();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
