// Copyright (C) 2026 The vtprune Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "vtprune/analysis.hpp"
#include "vtprune/cli.hpp"
#include "vtprune/cost_model.hpp"
#include "vtprune/pruning.hpp"
#include "vtprune/report.hpp"
#include "vtprune/significance.hpp"

namespace vtprune::acceptance {
namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool condition, const std::string& what) {
        if (!condition && pass) {
            pass = false;
            detail = what;
        }
    }
};

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "vtprune");
    std::ostringstream out;
    std::ostringstream err;
    return cli::run(std::move(args), out, err);
}

// Fixture files shared by several criteria.
class Workspace {
public:
    Workspace() : m_dir("acceptance") {
        save_attention(llava_path(), testing::llava_sized_maps());
    }
    std::filesystem::path llava_path() const {
        return m_dir / "llava_16x576.npy";
    }
    std::filesystem::path operator/(const std::string& name) const {
        return m_dir / name;
    }

private:
    testing::TempDir m_dir;
};

Outcome significance_oracle() {
    Outcome o;
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> heads(1, 4);
    std::uniform_int_distribution<std::size_t> tokens(1, 16);
    long double worst = 0;
    auto track = [&](long double got, long double ref) {
        long double diff = std::fabs(got - ref);
        long double scale = std::max(std::fabs(got), std::fabs(ref));
        if (scale > 0) {
            worst = std::max(worst, diff / scale);
        }
        return testing::close_rel(got, ref, 1e-6L, 1e-15L);
    };
    for (int trial = 0; trial < 200; ++trial) {
        AttentionMaps maps = testing::random_maps(rng, heads(rng), tokens(rng));
        SignificanceScores sig = compute_significance(maps);
        auto ref = testing::oracle_significance(maps);
        for (std::size_t k = 0; k < maps.tokens(); ++k) {
            o.require(track(sig.s1[k], ref.s1[k]), "s1 mismatch in trial " + std::to_string(trial));
            o.require(track(sig.s2[k], ref.s2[k]), "s2 mismatch in trial " + std::to_string(trial));
            const auto& ref_scores = ref.columns_chosen ? ref.s1 : ref.s2;
            o.require(track(sig.scores[k], ref_scores[k]), "scores mismatch in trial " + std::to_string(trial));
        }
        o.require(track(sig.var1, ref.var1), "var1 mismatch in trial " + std::to_string(trial));
        o.require(track(sig.var2, ref.var2), "var2 mismatch in trial " + std::to_string(trial));
        o.require((sig.chosen_axis == Axis::Columns) == ref.columns_chosen,
                  "chosen axis mismatch in trial " + std::to_string(trial));
    }
    if (o.pass) {
        std::ostringstream d;
        d << "200 maps, worst relative error " << static_cast<double>(worst);
        o.detail = d.str();
    }
    return o;
}

Outcome end_to_end_determinism(const Workspace& ws) {
    Outcome o;
    const double ratios[] = {0.25, 0.5, 0.75};
    const std::size_t rank_counts[] = {144, 288, 432};
    const std::size_t row_counts[] = {6 * 24, 12 * 24, 18 * 24};
    for (const char* strategy : {"rank", "row"}) {
        for (std::size_t i = 0; i < 3; ++i) {
            std::ostringstream r;
            r << ratios[i];
            std::string tag = std::string(strategy) + "_" + r.str();
            auto first = ws / (tag + "_a.json");
            auto second = ws / (tag + "_b.json");
            for (const auto& out : {first, second}) {
                int code = run_cli({"prune", "--attn", ws.llava_path().string(), "--ratio", r.str(), "--strategy",
                                    strategy, "--out", out.string()});
                o.require(code == 0, tag + ": prune exited " + std::to_string(code));
            }
            std::string a = slurp(first);
            o.require(!a.empty() && a == slurp(second), tag + ": outputs differ between runs");
            if (!o.pass) {
                return o;
            }
            auto kept = Json::parse(a)["kept"].get<std::vector<std::size_t>>();
            std::size_t want = std::string(strategy) == "rank" ? rank_counts[i] : row_counts[i];
            o.require(kept.size() == want, tag + ": kept " + std::to_string(kept.size()) + ", want " +
                                               std::to_string(want));
            o.require(std::is_sorted(kept.begin(), kept.end()), tag + ": kept not ascending");
        }
    }
    if (o.pass) {
        o.detail = "rank {144,288,432}, row {144,288,432}, byte-identical reruns";
    }
    return o;
}

Outcome retention_sweep(const Workspace& ws) {
    Outcome o;
    const std::size_t expected[] = {1, 15, 36, 63, 97, 144, 288, 432, 576};
    int code = run_cli({"sweep", "--attn", ws.llava_path().string(), "--out", (ws / "sweep").string()});
    o.require(code == 0, "sweep exited " + std::to_string(code));
    if (!o.pass) {
        return o;
    }
    Json summary = Json::parse(slurp(ws / "sweep" / "summary.json"));
    o.require(summary.size() == 9, "summary has " + std::to_string(summary.size()) + " rows");
    std::ostringstream got;
    for (std::size_t i = 0; i < 9 && o.pass; ++i) {
        auto kept = summary[i]["kept"].get<std::size_t>();
        got << (i ? "," : "") << kept;
        o.require(kept == expected[i], "ratio " + std::to_string(cli::kSweepRatios[i]) + " kept " +
                                           std::to_string(kept));
        o.require(keep_count(576, cli::kSweepRatios[i]) == expected[i], "keep_count disagrees with sweep");
    }
    o.require(expected[0] >= 1 && expected[0] <= 5, "0.2% retention outside the few-token regime");
    if (o.pass) {
        o.detail = "kept [" + got.str() + "]";
    }
    return o;
}

Outcome mode_collapse() {
    Outcome o;
    const std::size_t n = 576;
    SignificanceScores collapsed = compute_significance(testing::collapsed_maps(4, n, 200, 0.9f));
    ConcentrationReport c = concentration(collapsed.scores, 0.8);
    SignificanceScores uniform = compute_significance(testing::uniform_maps(4, n));
    ConcentrationReport u = concentration(uniform.scores, 0.8);
    o.require(c.token_fraction <= 0.25, "collapsed token_fraction " + std::to_string(c.token_fraction));
    o.require(std::abs(u.token_fraction - 0.8) <= 1.0 / n, "uniform token_fraction " + std::to_string(u.token_fraction));
    if (o.pass) {
        std::ostringstream d;
        d << "collapsed " << c.tokens_needed << "/" << n << " tokens hold 80% (gini " << c.gini << "), uniform "
          << u.token_fraction;
        o.detail = d.str();
    }
    return o;
}

Outcome pruning_invariants() {
    Outcome o;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> levels(0, 3);
    std::uniform_int_distribution<std::size_t> side_dist(1, 24);
    const int instances = 200;
    for (int t = 0; t < instances && o.pass; ++t) {
        std::size_t side = side_dist(rng);
        std::size_t n = side * side;
        std::vector<double> scores(n);
        bool tied = t % 2 == 0;
        for (double& s : scores) {
            s = tied ? levels(rng) * 0.25 : unit(rng);
        }
        PruneConfig config;
        config.ratio = std::max(1e-3, unit(rng));
        std::string tag = "instance " + std::to_string(t) + ": ";

        // Rank dominance.
        PrunedSelection rank = rank_select(scores, config);
        std::set<std::size_t> kept(rank.kept.begin(), rank.kept.end());
        double min_kept = 2.0;
        double max_dropped = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (kept.count(i)) {
                min_kept = std::min(min_kept, scores[i]);
            } else {
                max_dropped = std::max(max_dropped, scores[i]);
            }
        }
        o.require(min_kept >= max_dropped, tag + "rank dominance violated");
        o.require(rank.kept.size() == keep_count(n, config.ratio), tag + "rank count");

        // Argmax invariance under positive scaling.
        std::vector<double> scaled(scores);
        double c = 0.1 + 10.0 * unit(rng);
        for (double& s : scaled) {
            s *= c;
        }
        o.require(rank_select(scaled, config).kept == rank.kept, tag + "rank changed under scaling");

        // Row completeness.
        config.strategy = Strategy::Row;
        PrunedSelection rows = row_select(scores, config);
        std::set<std::size_t> row_set(rows.kept.begin(), rows.kept.end());
        for (std::size_t i : rows.kept) {
            for (std::size_t col = 0; col < side; ++col) {
                o.require(row_set.count(i / side * side + col) == 1, tag + "partial row kept");
            }
        }
        o.require(rows.kept.size() == side * keep_count(side, config.ratio), tag + "row count");
        // Row sums of tied scores only stay tied under exact scaling, so the
        // row check uses a power of two.
        std::vector<double> doubled(scores);
        double exact = std::ldexp(1.0, static_cast<int>(t % 7) - 3);
        for (double& s : doubled) {
            s *= exact;
        }
        o.require(row_select(doubled, config).kept == rows.kept, tag + "row changed under scaling");

        // Reorder yields the ascending version of the unordered selection.
        config.strategy = Strategy::Rank;
        config.reorder = false;
        auto unordered = rank_select(scores, config).kept;
        auto ordered = reorder(unordered);
        o.require(std::is_sorted(ordered.begin(), ordered.end()), tag + "reorder not ascending");
        o.require(ordered == rank.kept, tag + "reorder changed the index set");

        // Pool count on even grids.
        if (side % 2 == 0) {
            PruneConfig pool;
            pool.ratio = 0.25;
            pool.significance_mode = SignificanceMode::Pool4;
            o.require(pool_select(n, pool).kept.size() == n / 4, tag + "pool count");
        }
    }
    if (o.pass) {
        o.detail = std::to_string(instances) + " random instances per property";
    }
    return o;
}

// Speedup columns for 75% / 50% / 25% retention, per model, as published.
struct PublishedColumn {
    const char* name;
    double at75;
    double at50;
    double at25;
};
constexpr PublishedColumn kPublishedSpeedups[] = {
    {"rank 8B TTFT", 1.18, 1.66, 1.83},  {"rank 8B TPOT", 1.01, 1.03, 1.07},  {"rank 7B TTFT", 1.09, 1.47, 1.78},
    {"rank 7B TPOT", 1.01, 1.03, 1.08},  {"rank 13B TTFT", 1.29, 1.70, 2.52}, {"rank 13B TPOT", 1.06, 1.15, 1.24},
    {"row 8B TTFT", 1.28, 1.52, 1.78},   {"row 8B TPOT", 1.04, 1.04, 1.08},   {"row 7B TTFT", 1.17, 1.67, 1.71},
    {"row 7B TPOT", 1.01, 1.03, 1.04},   {"row 13B TTFT", 1.29, 1.80, 2.61},  {"row 13B TPOT", 1.07, 1.15, 1.24},
};

Outcome cost_monotonicity() {
    Outcome o;
    for (std::size_t textual : {0u, 64u, 256u}) {
        CostEstimate q = estimate(576, textual, 0.25);
        CostEstimate h = estimate(576, textual, 0.5);
        CostEstimate t = estimate(576, textual, 0.75);
        std::string tag = "textual=" + std::to_string(textual) + ": ";
        o.require(q.prefill_speedup > h.prefill_speedup && h.prefill_speedup > t.prefill_speedup,
                  tag + "prefill speedups not strictly decreasing");
        o.require(q.decode_speedup > h.decode_speedup && h.decode_speedup > t.decode_speedup,
                  tag + "decode speedups not strictly decreasing");
        o.require(q.prefill_speedup >= kReferenceMeasuredTtftSpeedup && q.decode_speedup >= kReferenceMeasuredTpotSpeedup,
                  tag + "model fell below the measured maxima");
    }
    // The published columns never increase with retention, so a strictly
    // decreasing model orders every column the same way.
    for (const auto& col : kPublishedSpeedups) {
        o.require(col.at25 >= col.at50 && col.at50 >= col.at75,
                  std::string(col.name) + " column is not ordered by retention");
    }
    std::string text = format_cost_report(estimate(576, 64, 0.25), 0.25);
    o.require(text.find("upper bound") != std::string::npos, "report does not state the upper-bound caveat");
    o.require(text.find("2.52x") != std::string::npos && text.find("1.24x") != std::string::npos,
              "report does not cite the measured maxima");
    o.require(cost_to_json(estimate(576, 64, 0.25))["model"] == "quadratic-upper-bound", "json model label");
    if (o.pass) {
        CostEstimate q = estimate(576, 64, 0.25);
        std::ostringstream d;
        d << std::fixed << std::setprecision(2) << "r=0.25: prefill " << q.prefill_speedup << "x, decode "
          << q.decode_speedup << "x; ordering matches all " << std::size(kPublishedSpeedups) << " published columns";
        o.detail = d.str();
    }
    return o;
}

Outcome ablation_toggles(const Workspace& ws) {
    Outcome o;
    AttentionMaps skewed = testing::repeated_row_maps(1, {0.7f, 0.1f, 0.1f, 0.1f});
    SignificanceScores variance = score_tokens(skewed, SignificanceMode::Variance);
    SignificanceScores anti = score_tokens(skewed, SignificanceMode::AntiVariance);
    o.require(variance.chosen_axis == Axis::Columns, "variance mode did not pick columns");
    o.require(anti.chosen_axis == Axis::Rows, "anti-variance mode did not pick rows");

    AttentionMaps maps = load_attention(ws.llava_path());
    for (Strategy strategy : {Strategy::Rank, Strategy::Row}) {
        PruneConfig config;
        config.ratio = 0.25;
        config.strategy = strategy;
        auto on = prune(maps, config).selection.kept;
        config.reorder = false;
        auto off = prune(maps, config).selection.kept;
        o.require(std::is_permutation(on.begin(), on.end(), off.begin(), off.end()),
                  std::string(to_string(strategy)) + ": reorder toggle changed the index set");
        o.require(std::is_sorted(on.begin(), on.end()), "reordered selection not ascending");
    }
    PruneConfig pooled;
    pooled.ratio = 0.25;
    pooled.significance_mode = SignificanceMode::Pool4;
    o.require(prune(maps, pooled).selection.kept.size() == 144, "pool4 ablation count");
    if (o.pass) {
        o.detail = "variance->columns, anti-variance->rows; reorder on/off permute the same set";
    }
    return o;
}

struct Criterion {
    const char* name;
    double budget_seconds;  // 0 = no runtime bound
    std::function<Outcome()> check;
};

}  // namespace
}  // namespace vtprune::acceptance

int main() {
    using namespace vtprune::acceptance;
    Workspace ws;
    const Criterion criteria[] = {
        {"significance-oracle-equivalence", 5.0, significance_oracle},
        {"end-to-end-determinism", 0.0, [&] { return end_to_end_determinism(ws); }},
        {"retention-sweep-counts", 0.0, [&] { return retention_sweep(ws); }},
        {"mode-collapse-in-kind", 1.0, mode_collapse},
        {"pruning-invariants", 10.0, pruning_invariants},
        {"cost-model-monotonicity", 0.0, cost_monotonicity},
        {"ablation-toggles", 0.0, [&] { return ablation_toggles(ws); }},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.check();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_seconds > 0.0 && seconds >= c.budget_seconds && outcome.pass) {
            outcome.pass = false;
            outcome.detail = "exceeded " + std::to_string(c.budget_seconds) + " s budget";
        }
        failures += outcome.pass ? 0 : 1;
        std::cout << (outcome.pass ? "PASS " : "FAIL ") << c.name << " (" << std::fixed << std::setprecision(3)
                  << seconds << " s): " << outcome.detail << std::endl;
    }
    std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
