#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wildfire/config.hpp"
#include "wildfire/frameworks.hpp"
#include "wildfire/metrics.hpp"

namespace wildfire {

// "Cut Trees: Sparse (small)" -> "cut_trees_sparse_small".
std::string level_slug(std::string_view name);

LevelOverrides overrides_from(const HarnessConfig& cfg);

struct GenerateOutput
{
    std::string snapshot_path;
    std::string ascii_path;
    std::uint64_t digest = 0;
};

// Builds the level (or a bare world from cfg.gen when level is empty) and
// writes a binary snapshot plus an ASCII dump into cfg.out.
GenerateOutput cmd_generate(const HarnessConfig& cfg, const std::string& level, std::uint64_t seed);

struct RunSummary
{
    std::string level;
    std::uint64_t seed = 0;
    std::string log_path;
    EpisodeResult result;
};

// One RunLog per level x seed under <out>/<framework>/<level>_s<seed>.jsonl.
// Episodes run on up to `jobs` threads; each gets its own model instance.
std::vector<RunSummary> cmd_run(const HarnessConfig& cfg, unsigned jobs = 1);

std::vector<LogSummary> load_logs(const std::vector<std::string>& paths); // files or directories

std::string cmd_score(const std::vector<std::string>& paths);

struct BcsOutput
{
    std::string table;
    std::string radar;
    std::string telemetry;
    std::vector<std::string> warnings;
};

// Writes bcs.tsv, radar.tsv and telemetry.tsv into out_dir when non-empty.
BcsOutput cmd_bcs(const std::vector<std::string>& paths, const std::string& out_dir,
                  BaselineSource source = BaselineSource::Printed);

ReplayReport cmd_replay(const std::string& path);

std::string cmd_levels();

} // namespace wildfire
