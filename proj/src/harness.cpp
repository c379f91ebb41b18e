#include "wildfire/harness.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "wildfire/parallel.hpp"

namespace wildfire {

namespace fs = std::filesystem;

std::string level_slug(std::string_view name)
{
    std::string out;
    for (char ch : name) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        } else if (!out.empty() && out.back() != '_') {
            out.push_back('_');
        }
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out;
}

LevelOverrides overrides_from(const HarnessConfig& cfg)
{
    LevelOverrides ov;
    ov.gen = cfg.gen;
    ov.fire = cfg.fire;
    ov.agents = cfg.agents;
    ov.max_steps = cfg.max_steps;
    return ov;
}

namespace {

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

} // namespace

GenerateOutput cmd_generate(const HarnessConfig& cfg, const std::string& level, std::uint64_t seed)
{
    fs::create_directories(cfg.out);
    WorldMap world;
    std::string stem;
    if (level.empty()) {
        GenConfig gen = cfg.gen;
        gen.seed = seed;
        world = generate_world(gen);
        stem = "world_s" + std::to_string(seed);
    } else {
        world = build_level(level, seed, overrides_from(cfg)).world;
        stem = level_slug(find_level(level).name) + "_s" + std::to_string(seed);
    }
    GenerateOutput out;
    out.snapshot_path = (fs::path(cfg.out) / (stem + ".snap")).string();
    out.ascii_path = (fs::path(cfg.out) / (stem + ".txt")).string();
    {
        std::ofstream snap(out.snapshot_path, std::ios::binary);
        if (!snap) throw std::runtime_error("cannot write " + out.snapshot_path);
        save_snapshot(world, snap);
    }
    write_file(out.ascii_path, ascii_dump(world));
    out.digest = world_digest(world);
    return out;
}

std::vector<RunSummary> cmd_run(const HarnessConfig& cfg, unsigned jobs)
{
    cfg.validate();
    const auto fw = parse_framework(cfg.framework_name);
    const fs::path dir = fs::path(cfg.out) / std::string(framework_name(fw));
    fs::create_directories(dir);
    std::vector<RunSummary> runs;
    for (const auto& sel : cfg.levels) {
        for (auto seed : sel.seeds) {
            RunSummary r;
            r.level = find_level(sel.name).name;
            r.seed = seed;
            r.log_path = (dir / (level_slug(r.level) + "_s" + std::to_string(seed) + ".jsonl")).string();
            runs.push_back(std::move(r));
        }
    }
    const auto ov = overrides_from(cfg);
    std::vector<std::exception_ptr> errors(runs.size());
    parallel_chunks(runs.size(), jobs, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            try {
                auto& r = runs[i];
                Episode ep = build_level(r.level, r.seed, ov);
                std::unique_ptr<LanguageModel> lm;
                if (fw != FrameworkKind::DoNothing) lm = make_lm(cfg.lm, cfg.http, &ep);
                std::ofstream log(r.log_path, std::ios::binary);
                if (!log) throw std::runtime_error("cannot write " + r.log_path);
                r.result = run_episode(fw, ep, lm.get(), cfg.framework, &log,
                                       fw == FrameworkKind::DoNothing ? "none" : cfg.lm);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    });
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return runs;
}

std::vector<LogSummary> load_logs(const std::vector<std::string>& paths)
{
    std::vector<std::string> files;
    for (const auto& p : paths) {
        if (fs::is_directory(p)) {
            for (const auto& entry : fs::recursive_directory_iterator(p)) {
                if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path().string());
            }
        } else {
            files.push_back(p);
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<LogSummary> out;
    for (const auto& f : files) out.push_back(read_log_summary_file(f));
    if (out.empty()) throw std::invalid_argument("no run logs found");
    return out;
}

std::string cmd_score(const std::vector<std::string>& paths)
{
    return score_table_tsv(load_logs(paths));
}

BcsOutput cmd_bcs(const std::vector<std::string>& paths, const std::string& out_dir, BaselineSource source)
{
    const auto logs = load_logs(paths);
    const auto table = bcs_table(logs, source);
    BcsOutput out;
    out.table = bcs_table_tsv(table);
    out.radar = radar_tsv(table);
    out.telemetry = telemetry_tsv(telemetry_report(logs));
    out.warnings = table.warnings;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "bcs.tsv", out.table);
        write_file(fs::path(out_dir) / "radar.tsv", out.radar);
        write_file(fs::path(out_dir) / "telemetry.tsv", out.telemetry);
    }
    return out;
}

ReplayReport cmd_replay(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open run log: " + path);
    return replay_log(in);
}

std::string cmd_levels()
{
    std::string out = "name\tagents\tmap_size\tmax_score\tmax_steps\tbehaviors\tseeds\n";
    for (const auto& s : level_catalog()) {
        std::string tags;
        for (auto b : s.tags) tags += (tags.empty() ? "" : ",") + std::string(behavior_name(b));
        std::string seeds;
        for (auto v : s.seeds) seeds += (seeds.empty() ? "" : ",") + std::to_string(v);
        out += s.name + "\t" + s.roster.to_string() + "\t" + std::to_string(s.map_size) + "\t" +
               (s.finite() ? std::to_string(s.max_score) : std::string("N/A")) + "\t" + std::to_string(s.max_steps) +
               "\t" + tags + "\t" + seeds + "\n";
    }
    return out;
}

} // namespace wildfire
