#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wildfire/levels.hpp"
#include "wildfire/lm.hpp"

namespace wildfire {

struct NormalizationSpec
{
    std::string level;
    ScoringKind kind = ScoringKind::Finite;
    double target = 0.0;
    double baseline = 0.0;
};

// Linear for finite levels, log2(1 + x) for open-ended ones. Raw scores outside
// [min(B,T), max(B,T)] are clamped; `warning` receives a note when that happens.
// Throws std::invalid_argument when T == B.
double normalize_score(double raw, const NormalizationSpec& spec, std::string* warning = nullptr);

// Do-nothing score minus 20 per agent, and minus 100 per civilian on levels
// that score civilians lost. Finite levels return 0.
double compute_baseline(const LevelSpec& level, double do_nothing_score);

// Baselines printed alongside the worked BCS example, keyed by level name.
std::optional<double> printed_baseline(std::string_view level);

enum class BaselineSource : std::uint8_t
{
    Printed, // printed value when one exists, formula otherwise
    Formula,
};

// do_nothing is only consulted for open-ended levels without a printed value
// (or always, with BaselineSource::Formula). Throws when it is needed but missing.
NormalizationSpec normalization_spec(const LevelSpec& level, std::optional<double> do_nothing,
                                     BaselineSource source = BaselineSource::Printed);

using BehaviorMap = std::map<Behavior, std::vector<std::string>>;

// Level names per behavior, from the catalog tags.
BehaviorMap behavior_map(const std::vector<LevelSpec>& levels = level_catalog());

class MissingScores : public std::invalid_argument
{
  public:
    MissingScores(const std::string& what, std::vector<std::string> missing)
        : std::invalid_argument(what), missing_(std::move(missing))
    {
    }
    const std::vector<std::string>& missing() const noexcept { return missing_; }

  private:
    std::vector<std::string> missing_;
};

// Mean NS over the behavior's level set. Throws MissingScores listing gaps.
double bcs(const std::map<std::string, double>& ns, const BehaviorMap& bmap, Behavior goal);

// What the metrics need from one RunLog.
struct LogSummary
{
    std::string path;
    std::string level;
    std::uint64_t seed = 0;
    std::string framework;
    int agents = 0;
    double final_score = 0.0;
    std::string termination;
    bool op_precondition = false;
    bool aborted = false;
    bool complete = false; // footer present
    std::vector<TelemetrySnapshot> steps;
};

LogSummary read_log_summary(std::istream& in, std::string path = {});
LogSummary read_log_summary_file(const std::string& path);

struct TelemetryRow
{
    std::string framework;
    int agents = 0;
    std::int64_t steps = 0;
    double api_calls = 0.0;
    double input_tokens = 0.0;
    double output_tokens = 0.0;
};

// Per-timestep means grouped by (framework, agent count). Throws on empty input.
std::vector<TelemetryRow> telemetry_report(const std::vector<LogSummary>& logs);
std::string telemetry_tsv(const std::vector<TelemetryRow>& rows);

struct MeanSd
{
    double mean = 0.0;
    double sd = 0.0; // sample standard deviation, 0 for a single value
    std::size_t n = 0;
};

MeanSd mean_sd(const std::vector<double>& values);
std::string format_mean_sd(const MeanSd& m); // "18.00±0.00"

// Score table: one row per level (catalog order), one column per framework.
std::string score_table_tsv(const std::vector<LogSummary>& logs);

struct BcsTable
{
    std::vector<std::string> frameworks;
    // [framework][behavior]; nullopt when scores are missing or, for OP, no
    // episode met the precondition.
    std::map<std::string, std::array<std::optional<double>, 7>> values;
    std::map<std::string, std::array<std::string, 7>> reasons;
    std::vector<std::string> warnings;
};

// Uses do_nothing logs, when present, for formula baselines.
BcsTable bcs_table(const std::vector<LogSummary>& logs, BaselineSource source = BaselineSource::Printed);
std::string bcs_table_tsv(const BcsTable& t);
std::string radar_tsv(const BcsTable& t); // goal, algorithm, bcs

} // namespace wildfire
