#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fixtures.hpp"
#include "wildfire/frameworks.hpp"
#include "wildfire/harness.hpp"
#include "wildfire/metrics.hpp"
#include "wildfire/parallel.hpp"

using namespace wildfire;
using namespace wildfire::testing;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned tolerances.
constexpr double kFormulaTol = 1e-12;
constexpr double kFormulaSeconds = 1.0;
constexpr double kNsTol = 0.001;
constexpr double kBcsTol = 0.001;
constexpr double kStepBudgetMs = 100.0;
constexpr double kSuperlinearRatio = 2.0;
constexpr double kLinearRatioSlack = 2.2;

struct Outcome
{
    bool pass = false;
    std::string detail;
};

struct Context
{
    fs::path work;
    unsigned jobs = 1;
    std::mutex mu;
    std::vector<std::string> logs; // written by criteria 3-5
};

double ms_since(Clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Runs an episode and writes its log under work/<group>/.
EpisodeResult logged_run(Context& ctx, const std::string& group, FrameworkKind fw, Episode& ep, LanguageModel* lm,
                         const std::string& lm_spec)
{
    const auto dir = ctx.work / group / std::string(framework_name(fw));
    fs::create_directories(dir);
    const auto path = dir / (level_slug(ep.level.spec.name) + "_s" + std::to_string(ep.level.seed) + ".jsonl");
    std::ofstream out(path, std::ios::binary);
    const auto r = run_episode(fw, ep, lm, {}, &out, lm_spec);
    std::lock_guard lock(ctx.mu);
    ctx.logs.push_back(path.string());
    return r;
}

Outcome formula_oracle()
{
    const auto t0 = Clock::now();
    CounterRng rng(0xacce55);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        FireConfig cfg;
        cfg.moisture_term_mode = k % 2 ? MoistureTermMode::Attenuating : MoistureTermMode::Literal;
        auto w = flat_world(3, 3);
        int dx = static_cast<int>(rng.next_below(3)) - 1;
        const int dy = static_cast<int>(rng.next_below(3)) - 1;
        if (dx == 0 && dy == 0) dx = -1;
        const Cell s{1, 1};
        const Cell d{1 + dx, 1 + dy};
        const auto si = w.index(s);
        const auto di = w.index(d);
        w.elevation[si] = static_cast<float>(rng.next_unit());
        w.elevation[di] = static_cast<float>(rng.next_unit());
        w.moisture[di] = static_cast<float>(rng.next_unit());
        w.wind_x[si] = static_cast<float>(rng.next_unit() * 2 - 1);
        w.wind_y[si] = static_cast<float>(rng.next_unit() * 2 - 1);
        if (rng.next_below(5) == 0) w.wind_x[si] = w.wind_y[si] = 0.0F;
        w.wet[di] = rng.next_below(4) == 0 ? 2 : 0;
        const double ref = reference_spread(w.elevation[si], w.elevation[di], w.moisture[di], w.wind_x[si], w.wind_y[si],
                                            dx, dy, w.wet[di] > 0, cfg);
        worst = std::max(worst, std::abs(spread_probability(s, d, w, cfg) - ref));
    }
    const double secs = ms_since(t0) / 1000.0;
    return {worst <= kFormulaTol && secs < kFormulaSeconds,
            "max abs error " + fmt("%.3g", worst) + " over 1000 inputs in " + fmt("%.3f", secs) + " s"};
}

Outcome bcs_example()
{
    struct Row
    {
        const char* level;
        double score;
        double expect;
    };
    const Row rows[] = {
        {"Transport Firefighters (small)", 6.00, 1.000},
        {"Transport Firefighters (large)", 10.00, 0.833},
        {"Rescue Civilians: Search + Rescue + Transport", 0.00, 0.000},
        {"Suppress Fire: Locate + Deploy + Suppress", -729.67, 0.558},
        {"Full Environment", -5571.67, 0.038},
    };
    std::map<std::string, double> ns;
    bool ok = true;
    std::string detail = "NS";
    for (const auto& r : rows) {
        const double v = normalize_score(r.score, normalization_spec(find_level(r.level), std::nullopt));
        ns[r.level] = v;
        ok = ok && std::abs(v - r.expect) <= kNsTol;
        detail += " " + fmt("%.3f", v);
    }
    BehaviorMap m{{Behavior::RC, {}}};
    for (const auto& r : rows) m[Behavior::RC].push_back(r.level);
    const double rc = bcs(ns, m, Behavior::RC);
    ok = ok && std::abs(rc - 0.486) <= kBcsTol && std::round(rc * 100) / 100 == 0.49;
    return {ok, detail + ", BCS(RC) " + fmt("%.3f", rc)};
}

std::vector<std::uint64_t> five_seeds(const LevelSpec& spec)
{
    std::vector<std::uint64_t> seeds = spec.seeds;
    for (std::uint64_t extra = 1; seeds.size() < 5; ++extra) {
        if (std::find(seeds.begin(), seeds.end(), extra) == seeds.end()) seeds.push_back(extra);
    }
    seeds.resize(5);
    return seeds;
}

Outcome scoring_fidelity(Context& ctx)
{
    std::vector<std::string> problems;
    for (std::size_t k = 0; k < std::size(kLevelTable); ++k) {
        const auto& spec = level_catalog()[k];
        if (spec.name != kLevelTable[k].name || !matches_table(build_level(spec.name, spec.seeds.front()), kLevelTable[k])) {
            problems.push_back("table mismatch: " + spec.name);
        }
    }
    struct Job
    {
        std::string level;
        std::uint64_t seed;
        int max_score;
    };
    std::vector<Job> jobs;
    for (const auto& spec : level_catalog()) {
        if (!spec.finite()) continue;
        for (auto seed : five_seeds(spec)) jobs.push_back({spec.name, seed, spec.max_score});
    }
    std::vector<std::string> fails(jobs.size());
    parallel_chunks(jobs.size(), ctx.jobs, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const auto& j = jobs[i];
            auto direct = build_level(j.level, j.seed);
            const double solved = solve_episode(direct).value;
            auto ep = build_level(j.level, j.seed);
            auto lm = make_mock_lm("omniscient", &ep);
            const double via_lm = logged_run(ctx, "scoring", FrameworkKind::Camon, ep, lm.get(), "mock:omniscient")
                                      .final_score.value;
            if (solved != j.max_score || via_lm != j.max_score) {
                fails[i] = j.level + " seed " + std::to_string(j.seed) + ": solver " + fmt("%g", solved) + ", mock " +
                           fmt("%g", via_lm) + " of " + std::to_string(j.max_score);
            }
        }
    });
    for (auto& f : fails) {
        if (!f.empty()) problems.push_back(f);
    }
    if (!problems.empty()) return {false, problems.front() + (problems.size() > 1 ? " (+more)" : "")};
    return {true, "17 rows match; " + std::to_string(jobs.size()) + " finite episodes at max score"};
}

Outcome do_nothing_signs(Context& ctx)
{
    struct Job
    {
        const LevelSpec* spec;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& spec : level_catalog()) {
        for (auto seed : spec.seeds) jobs.push_back({&spec, seed});
    }
    std::vector<std::string> fails(jobs.size());
    parallel_chunks(jobs.size(), ctx.jobs, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            auto ep = build_level(jobs[i].spec->name, jobs[i].seed);
            const double s = logged_run(ctx, "do_nothing", FrameworkKind::DoNothing, ep, nullptr, "none").final_score.value;
            const bool ok = jobs[i].spec->finite() ? s == 0.0 : s < 0.0;
            if (!ok) fails[i] = jobs[i].spec->name + " seed " + std::to_string(jobs[i].seed) + " scored " + fmt("%g", s);
        }
    });
    for (const auto& f : fails) {
        if (!f.empty()) return {false, f};
    }
    return {true, std::to_string(jobs.size()) + " episodes: finite rows 0, open-ended rows negative"};
}

Outcome determinism(Context& ctx)
{
    for (const char* level : {"Suppress Fire: Extinguish", "Scout Fire (small)", "Full Environment"}) {
        const auto seed = find_level(level).seeds.front();
        auto a = build_level(level, seed);
        auto b = build_level(level, seed);
        std::stringstream la;
        const auto ra = run_episode(FrameworkKind::DoNothing, a, nullptr, {}, &la);
        const auto rb = logged_run(ctx, "determinism", FrameworkKind::DoNothing, b, nullptr, "none");
        if (ra.log_digest != rb.log_digest || world_digest(a.world) != world_digest(b.world)) {
            return {false, std::string("repeat run differs on ") + level};
        }
    }
    FireConfig cfg;
    cfg.base_spread_rate = 0.6;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto seq = burning_world(seed * 7919, 20, 5);
        auto par = seq;
        for (int t = 0; t < 50; ++t) {
            const auto expect = reference_ignitions(seq, t, cfg);
            const auto ds = fire_step(seq, t, cfg, {1});
            const auto dp = fire_step(par, t, cfg, {8});
            if (ds.ignitions != dp.ignitions || ds.ignitions != expect) {
                return {false, "ignition sets differ on world " + std::to_string(seed) + " step " + std::to_string(t)};
            }
        }
    }
    return {true, "3 repeated episodes identical; 20 worlds x 50 steps identical ignitions"};
}

Outcome scale()
{
    GenConfig g;
    g.seed = 2000;
    g.width = 1000;
    g.height = 1000;
    auto w = generate_world(g);
    AgentParams params;
    FireConfig fire;
    std::vector<Agent> agents;
    CounterRng rng(2000);
    while (agents.size() < 2000) {
        const Cell c{static_cast<int>(rng.next_below(1000)), static_cast<int>(rng.next_below(1000))};
        if (!ground_passable(w, c)) continue;
        agents.push_back(make_agent(static_cast<int>(agents.size()) + 1, AgentKind::Firefighter, c, params));
    }
    for (int lit = 0; lit < 50;) {
        const auto i = static_cast<std::size_t>(rng.next_below(w.size()));
        if (w.trees[i] > 0 && w.fire[i] == FireState::None) {
            w.fire[i] = FireState::Burning;
            ++lit;
        }
    }
    StepOptions opts;
    opts.fire_exec.threads = default_threads();
    for (int t = 0; t < 5; ++t) world_step(w, agents, fire, params, opts);
    const auto t0 = Clock::now();
    for (int t = 0; t < 100; ++t) world_step(w, agents, fire, params, opts);
    const double mean = ms_since(t0) / 100.0;
    const bool burning = w.any_active_fire();
    return {mean <= kStepBudgetMs && burning,
            "mean step " + fmt("%.2f", mean) + " ms over 100 steps, 2000 agents, 10^6 cells, fire " +
                (burning ? "active" : "out")};
}

struct ScalingPoint
{
    double hmas_input = 0;
    double camon_calls = 0;
    double coela_calls = 0;
    double embodied_calls = 0;
};

double per_step(const EpisodeResult& r, bool tokens)
{
    double sum = 0;
    for (const auto& s : r.per_step) sum += static_cast<double>(tokens ? s.input_tokens : s.api_calls);
    return sum / static_cast<double>(r.per_step.size());
}

Outcome token_scaling()
{
    std::vector<ScalingPoint> pts;
    for (int n : {4, 8, 16}) {
        ScalingPoint p;
        for (auto fw : {FrameworkKind::Hmas2, FrameworkKind::Camon, FrameworkKind::Coela, FrameworkKind::Embodied}) {
            LevelOverrides ov;
            ov.roster = Roster{n, 0, 0, 0};
            ov.max_steps = 5;
            auto ep = build_level("Cut Trees: Sparse (small)", 375, ov);
            auto lm = make_mock_lm("idle");
            const auto r = run_episode(fw, ep, lm.get(), {});
            switch (fw) {
            case FrameworkKind::Hmas2: p.hmas_input = per_step(r, true); break;
            case FrameworkKind::Camon: p.camon_calls = per_step(r, false); break;
            case FrameworkKind::Coela: p.coela_calls = per_step(r, false); break;
            default: p.embodied_calls = per_step(r, false); break;
            }
        }
        pts.push_back(p);
    }
    bool ok = true;
    std::string detail = "HMAS-2 input ratios";
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double r = pts[i].hmas_input / pts[i - 1].hmas_input;
        ok = ok && r > kSuperlinearRatio;
        detail += " " + fmt("%.2f", r);
    }
    detail += "; call ratios";
    for (auto field : {&ScalingPoint::camon_calls, &ScalingPoint::coela_calls, &ScalingPoint::embodied_calls}) {
        for (std::size_t i = 1; i < pts.size(); ++i) {
            const double r = pts[i].*field / pts[i - 1].*field;
            ok = ok && r <= kLinearRatioSlack;
            detail += " " + fmt("%.2f", r);
        }
    }
    return {ok, detail};
}

Outcome translator_loop()
{
    auto scripted = [](std::vector<std::string> replies) {
        return MockLm("script", [replies](const std::string&, PromptKind, std::int64_t i) {
            return replies[std::min<std::size_t>(static_cast<std::size_t>(i), replies.size() - 1)];
        });
    };
    const Bounds b{50, 50};
    std::vector<std::int64_t> calls;
    {
        auto lm = scripted({"[1, 10, 10, \"go\"]"});
        translate(lm, "move to (10, 10)", AgentKind::Firefighter, b, 2);
        calls.push_back(lm.telemetry().snapshot().api_calls);
    }
    {
        auto lm = scripted({"[7, 1]", "[1, 10, 10, \"go\"]"});
        translate(lm, "move to (10, 10)", AgentKind::Firefighter, b, 2);
        calls.push_back(lm.telemetry().snapshot().api_calls);
    }
    bool failed = false;
    {
        auto lm = scripted({"no idea"});
        try {
            translate(lm, "move to (10, 10)", AgentKind::Firefighter, b, 2);
        } catch (const TranslationFailed&) {
            failed = true;
        }
        calls.push_back(lm.telemetry().snapshot().api_calls);
    }
    const bool ok = calls == std::vector<std::int64_t>{1, 2, 3} && failed;
    return {ok, "calls " + std::to_string(calls[0]) + "/" + std::to_string(calls[1]) + "/" + std::to_string(calls[2]) +
                    (failed ? ", third raised translation failure" : ", third did not fail")};
}

Outcome golden_prompts()
{
    int matched = 0;
    int total = 0;
    for (const auto& c : golden_cases()) {
        total += 2;
        matched += golden_matches(WILDFIRE_GOLDEN_DIR, c.name + "_perception.txt", golden_perception(c));
        matched += golden_matches(WILDFIRE_GOLDEN_DIR, c.name + "_translate.txt", golden_translation(c));
    }
    return {matched == total, std::to_string(matched) + "/" + std::to_string(total) + " fixtures byte-identical"};
}

Outcome firebreak()
{
    constexpr int kSize = 15;
    constexpr int kRing = 4;
    const Cell center{7, 7};
    std::int64_t outside = 0;
    std::int64_t inside = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        GenConfig g;
        g.seed = seed;
        g.width = kSize;
        g.height = kSize;
        g.base_frequency = 1.0 / 8.0;
        auto w = generate_world(g);
        CounterRng rng(seed);
        for (std::size_t i = 0; i < w.size(); ++i) {
            const Cell c = w.cell_at(i);
            const int d = chebyshev(c, center);
            if (d == kRing) {
                w.set_land(c, LandType::Brush);
                w.flags[i] |= cell_flag::kCleared;
            } else {
                w.set_land(c, rng.next_below(2) ? LandType::DenseForest : LandType::MediumForest);
            }
        }
        w.fire[w.index(center)] = FireState::Burning;
        FireConfig cfg;
        cfg.base_spread_rate = 1.0;
        cfg.moisture_term_mode = MoistureTermMode::Attenuating;
        for (int t = 0; t < 200; ++t) {
            for (auto d : fire_step(w, t, cfg).ignitions) {
                (chebyshev(w.cell_at(d), center) > kRing ? outside : inside) += 1;
            }
        }
    }
    return {outside == 0 && inside > 0,
            std::to_string(outside) + " ignitions outside the ring, " + std::to_string(inside) + " inside, 10 worlds"};
}

Outcome replay_integrity(Context& ctx)
{
    if (ctx.logs.empty()) return {false, "no logs from criteria 3-5"};
    std::vector<std::string> bad(ctx.logs.size());
    std::vector<std::int64_t> verified(ctx.logs.size());
    std::vector<std::int64_t> steps(ctx.logs.size());
    parallel_chunks(ctx.logs.size(), ctx.jobs, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const auto rep = cmd_replay(ctx.logs[i]);
            verified[i] = rep.verified;
            steps[i] = rep.steps;
            if (!rep.ok()) bad[i] = ctx.logs[i];
        }
    });
    std::int64_t v = 0;
    std::int64_t s = 0;
    for (std::size_t i = 0; i < ctx.logs.size(); ++i) {
        v += verified[i];
        s += steps[i];
        if (!bad[i].empty()) return {false, "replay mismatch in " + bad[i]};
    }
    return {v == s, std::to_string(ctx.logs.size()) + " logs, " + std::to_string(v) + "/" + std::to_string(s) +
                        " step digests verified"};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance checks"};
    Context ctx;
    std::string work = (fs::temp_directory_path() / "wildfire_acceptance").string();
    ctx.jobs = default_threads();
    app.add_option("--work", work, "Directory for run logs");
    app.add_option("--jobs", ctx.jobs, "Worker threads");
    CLI11_PARSE(app, argc, argv);
    ctx.work = work;
    fs::remove_all(ctx.work);
    fs::create_directories(ctx.work);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"formula oracle", formula_oracle},
        {"BCS worked example", bcs_example},
        {"scoring fidelity", [&] { return scoring_fidelity(ctx); }},
        {"do-nothing behavior", [&] { return do_nothing_signs(ctx); }},
        {"determinism", [&] { return determinism(ctx); }},
        {"scale", scale},
        {"token scaling", token_scaling},
        {"translator loop", translator_loop},
        {"prompt golden files", golden_prompts},
        {"firebreak containment", firebreak},
        {"replay integrity", [&] { return replay_integrity(ctx); }},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), ms_since(t0) / 1000.0);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
