#include "wildfire/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

namespace wildfire {

using nlohmann::json;

double normalize_score(double raw, const NormalizationSpec& spec, std::string* warning)
{
    const double t = spec.target;
    const double b = spec.baseline;
    if (t == b) throw std::invalid_argument("target equals baseline for level '" + spec.level + "'");
    const double lo = std::min(b, t);
    const double hi = std::max(b, t);
    double s = raw;
    if (s < lo || s > hi) {
        s = std::clamp(s, lo, hi);
        if (warning) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "score %.2f outside [%.2f, %.2f] for '%s'; clamped", raw, lo, hi,
                          spec.level.c_str());
            *warning = buf;
        }
    }
    const double x = (s - b) / (t - b);
    if (spec.kind == ScoringKind::Finite) return x;
    return std::log1p(x) / std::log(2.0);
}

double compute_baseline(const LevelSpec& level, double do_nothing_score)
{
    if (level.finite()) return 0.0;
    double b = do_nothing_score - 20.0 * level.roster.total();
    if (level.scores_civilians_lost()) b -= 100.0 * level.civilians;
    return b;
}

std::optional<double> printed_baseline(std::string_view level)
{
    const auto& name = find_level(level).name;
    if (name == "Suppress Fire: Locate + Deploy + Suppress") return -1382.67;
    if (name == "Full Environment") return -5722.67;
    return std::nullopt;
}

NormalizationSpec normalization_spec(const LevelSpec& level, std::optional<double> do_nothing, BaselineSource source)
{
    NormalizationSpec spec;
    spec.level = level.name;
    spec.kind = level.scoring;
    if (level.finite()) {
        spec.target = level.max_score;
        spec.baseline = 0.0;
        return spec;
    }
    spec.target = 0.0;
    if (source == BaselineSource::Printed) {
        if (auto p = printed_baseline(level.name)) {
            spec.baseline = *p;
            return spec;
        }
    }
    if (!do_nothing) {
        throw std::invalid_argument("baseline for '" + level.name + "' needs a do_nothing score");
    }
    spec.baseline = compute_baseline(level, *do_nothing);
    return spec;
}

BehaviorMap behavior_map(const std::vector<LevelSpec>& levels)
{
    BehaviorMap m;
    for (auto b : kAllBehaviors) m[b];
    for (const auto& l : levels) {
        for (auto b : l.tags) m[b].push_back(l.name);
    }
    return m;
}

double bcs(const std::map<std::string, double>& ns, const BehaviorMap& bmap, Behavior goal)
{
    const auto it = bmap.find(goal);
    if (it == bmap.end() || it->second.empty()) {
        throw MissingScores("no levels carry behavior " + std::string(behavior_name(goal)), {});
    }
    std::vector<std::string> missing;
    double sum = 0.0;
    for (const auto& level : it->second) {
        const auto f = ns.find(level);
        if (f == ns.end()) {
            missing.push_back(level);
            continue;
        }
        sum += f->second;
    }
    if (!missing.empty()) {
        std::string what = "missing normalized scores for " + std::string(behavior_name(goal)) + ":";
        for (const auto& m : missing) what += " '" + m + "'";
        throw MissingScores(what, missing);
    }
    return sum / static_cast<double>(it->second.size());
}

LogSummary read_log_summary(std::istream& in, std::string path)
{
    LogSummary s;
    s.path = std::move(path);
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = json::parse(line);
        const auto type = j.value("type", "");
        if (type == "header") {
            header = true;
            s.level = j.at("level").get<std::string>();
            s.seed = j.at("seed").get<std::uint64_t>();
            s.framework = j.at("framework").get<std::string>();
            const auto& r = j.at("roster");
            s.agents = r.value("firefighters", 0) + r.value("bulldozers", 0) + r.value("drones", 0) +
                       r.value("helicopters", 0);
        } else if (type == "step") {
            const auto& t = j.at("telemetry");
            TelemetrySnapshot snap;
            snap.api_calls = t.value("api_calls", std::int64_t{0});
            snap.input_tokens = t.value("input_tokens", std::int64_t{0});
            snap.output_tokens = t.value("output_tokens", std::int64_t{0});
            if (t.contains("by_purpose")) {
                for (std::size_t i = 0; i < kPurposeCount; ++i) {
                    const std::string key(purpose_name(static_cast<CallPurpose>(i)));
                    snap.calls_by_purpose[i] = t.at("by_purpose").value(key, std::int64_t{0});
                }
            }
            s.steps.push_back(snap);
        } else if (type == "footer") {
            s.complete = true;
            s.final_score = j.at("final_score").get<double>();
            s.termination = j.value("termination", "");
            s.op_precondition = j.value("op_precondition", false);
            s.aborted = j.value("aborted", false);
        }
    }
    if (!header) throw std::runtime_error("run log " + s.path + " has no header");
    return s;
}

LogSummary read_log_summary_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open run log: " + path);
    return read_log_summary(in, path);
}

std::vector<TelemetryRow> telemetry_report(const std::vector<LogSummary>& logs)
{
    if (logs.empty()) throw std::invalid_argument("telemetry report needs at least one run log");
    std::map<std::pair<std::string, int>, TelemetryRow> groups;
    for (const auto& l : logs) {
        auto& row = groups[{l.framework, l.agents}];
        row.framework = l.framework;
        row.agents = l.agents;
        for (const auto& s : l.steps) {
            ++row.steps;
            row.api_calls += static_cast<double>(s.api_calls);
            row.input_tokens += static_cast<double>(s.input_tokens);
            row.output_tokens += static_cast<double>(s.output_tokens);
        }
    }
    std::vector<TelemetryRow> out;
    for (auto& [key, row] : groups) {
        if (row.steps > 0) {
            const auto n = static_cast<double>(row.steps);
            row.api_calls /= n;
            row.input_tokens /= n;
            row.output_tokens /= n;
        }
        out.push_back(row);
    }
    return out;
}

std::string telemetry_tsv(const std::vector<TelemetryRow>& rows)
{
    std::string out = "framework\tagents\tsteps\tapi_calls_per_step\tinput_tokens_per_step\toutput_tokens_per_step\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%s\t%d\t%lld\t%.3f\t%.3f\t%.3f\n", r.framework.c_str(), r.agents,
                      static_cast<long long>(r.steps), r.api_calls, r.input_tokens, r.output_tokens);
        out += buf;
    }
    return out;
}

MeanSd mean_sd(const std::vector<double>& values)
{
    MeanSd m;
    m.n = values.size();
    if (values.empty()) return m;
    double sum = 0.0;
    for (double v : values) sum += v;
    m.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - m.mean) * (v - m.mean);
        m.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return m;
}

std::string format_mean_sd(const MeanSd& m)
{
    char buf[96];
    // Avoid "-0.00" for tiny negative means.
    const double mean = std::abs(m.mean) < 0.005 ? 0.0 : m.mean;
    std::snprintf(buf, sizeof buf, "%.2f±%.2f", mean, m.sd);
    return buf;
}

namespace {

// (framework, level) -> final scores of complete, non-aborted logs.
std::map<std::string, std::map<std::string, std::vector<double>>> group_scores(const std::vector<LogSummary>& logs,
                                                                                std::vector<std::string>* warnings)
{
    std::map<std::string, std::map<std::string, std::vector<double>>> out;
    for (const auto& l : logs) {
        if (!l.complete || l.aborted) {
            if (warnings) warnings->push_back("skipping incomplete or aborted log " + l.path);
            continue;
        }
        out[l.framework][find_level(l.level).name].push_back(l.final_score);
    }
    return out;
}

std::vector<std::string> framework_order(const std::map<std::string, std::map<std::string, std::vector<double>>>& g)
{
    std::vector<std::string> order;
    for (auto k : {"camon", "coela", "embodied", "hmas2", "do_nothing"}) {
        if (g.count(k)) order.emplace_back(k);
    }
    for (const auto& [k, v] : g) {
        if (std::find(order.begin(), order.end(), k) == order.end()) order.push_back(k);
    }
    return order;
}

} // namespace

std::string score_table_tsv(const std::vector<LogSummary>& logs)
{
    const auto g = group_scores(logs, nullptr);
    const auto frameworks = framework_order(g);
    std::string out = "level";
    for (const auto& f : frameworks) out += "\t" + f;
    out += "\n";
    for (const auto& spec : level_catalog()) {
        bool any = false;
        for (const auto& f : frameworks) any = any || g.at(f).count(spec.name);
        if (!any) continue;
        out += spec.name;
        for (const auto& f : frameworks) {
            const auto& per = g.at(f);
            const auto it = per.find(spec.name);
            out += "\t" + (it == per.end() ? std::string("-") : format_mean_sd(mean_sd(it->second)));
        }
        out += "\n";
    }
    return out;
}

BcsTable bcs_table(const std::vector<LogSummary>& logs, BaselineSource source)
{
    BcsTable t;
    const auto g = group_scores(logs, &t.warnings);
    t.frameworks = framework_order(g);
    std::map<std::string, double> do_nothing;
    if (const auto it = g.find("do_nothing"); it != g.end()) {
        for (const auto& [level, scores] : it->second) do_nothing[level] = mean_sd(scores).mean;
    }
    std::set<std::string> op_seen;
    for (const auto& l : logs) {
        if (l.op_precondition) op_seen.insert(l.framework);
    }
    const auto bmap = behavior_map();
    for (const auto& f : t.frameworks) {
        std::map<std::string, double> ns;
        for (const auto& [level, scores] : g.at(f)) {
            const auto& spec = find_level(level);
            const auto dn = do_nothing.find(level);
            try {
                const auto norm = normalization_spec(
                    spec, dn == do_nothing.end() ? std::nullopt : std::optional<double>(dn->second), source);
                std::string warning;
                ns[level] = normalize_score(mean_sd(scores).mean, norm, &warning);
                if (!warning.empty()) t.warnings.push_back(f + ": " + warning);
            } catch (const std::invalid_argument& e) {
                t.warnings.push_back(f + ": " + e.what());
            }
        }
        auto& values = t.values[f];
        auto& reasons = t.reasons[f];
        for (std::size_t i = 0; i < kAllBehaviors.size(); ++i) {
            const auto goal = kAllBehaviors[i];
            if (goal == Behavior::OP && !op_seen.count(f)) {
                reasons[i] = "insufficient data";
                continue;
            }
            try {
                values[i] = bcs(ns, bmap, goal);
            } catch (const MissingScores& e) {
                reasons[i] = "missing " + std::to_string(e.missing().size()) + " level(s)";
                t.warnings.push_back(f + ": " + e.what());
            }
        }
    }
    return t;
}

std::string bcs_table_tsv(const BcsTable& t)
{
    std::string out = "behavior";
    for (const auto& f : t.frameworks) out += "\t" + f;
    out += "\n";
    char buf[32];
    for (std::size_t i = 0; i < kAllBehaviors.size(); ++i) {
        out += std::string(behavior_long_name(kAllBehaviors[i])) + " (" + std::string(behavior_name(kAllBehaviors[i])) + ")";
        for (const auto& f : t.frameworks) {
            const auto& v = t.values.at(f)[i];
            if (v) {
                std::snprintf(buf, sizeof buf, "%.3f", *v);
                out += "\t" + std::string(buf);
            } else {
                out += "\t" + t.reasons.at(f)[i];
            }
        }
        out += "\n";
    }
    return out;
}

std::string radar_tsv(const BcsTable& t)
{
    std::string out = "goal\talgorithm\tbcs\n";
    char buf[32];
    for (std::size_t i = 0; i < kAllBehaviors.size(); ++i) {
        for (const auto& f : t.frameworks) {
            const auto& v = t.values.at(f)[i];
            if (!v) continue;
            std::snprintf(buf, sizeof buf, "%.6f", *v);
            out += std::string(behavior_name(kAllBehaviors[i])) + "\t" + f + "\t" + buf + "\n";
        }
    }
    return out;
}

} // namespace wildfire
