#include "tsched/oracle/brute_force.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace tsched::oracle {

namespace {

struct Search {
    std::vector<std::vector<Cluster>> lists;
    std::vector<std::vector<double>> feedback;
    const DelayParams* params = nullptr;
    double horizon = 0.0;
    BruteForceResult best{std::numeric_limits<double>::infinity(), 0.0, 0};

    // `last` is -1 before any service, -2 for a green phase outside the input.
    void walk(std::vector<std::size_t>& next, int last, double finish, double run_start, double aug, double local) {
        bool done = true;
        for (std::size_t p = 0; p < lists.size(); ++p) {
            if (next[p] == lists[p].size()) continue;
            done = false;
            const std::size_t k = next[p];
            const Cluster& c = lists[p][k];
            const double dur = c.dep - c.arr;
            double start;
            double rs = run_start;
            if (last == static_cast<int>(p) && std::max(c.arr, finish) + dur - run_start <= params->max_green + 1e-9) {
                start = std::max(c.arr, finish);
            } else {
                start = std::max(c.arr, last == -1 ? finish : finish + params->changeover);
                rs = start;
            }
            const double wait = c.count * (start - c.arr);
            ++next[p];
            walk(next, static_cast<int>(p), start + dur, rs, aug + wait + c.count * feedback[p][k], local + wait);
            --next[p];

            if (std::isfinite(horizon)) {
                double cost = 0.0;
                for (std::size_t m = k; m < lists[p].size(); ++m)
                    cost += lists[p][m].count * std::max(0.0, horizon - lists[p][m].arr);
                next[p] = lists[p].size();
                walk(next, last, finish, run_start, aug + cost, local + cost);
                next[p] = k;
            }
        }
        if (done) {
            ++best.schedules;
            if (aug < best.total_augmented_delay) {
                best.total_augmented_delay = aug;
                best.total_local_delay = local;
            }
        }
    }
};

}  // namespace

BruteForceResult brute_force(const InputClusterSequence& input, const DelayParams& params) {
    Search s;
    s.params = &params;
    s.horizon = input.horizon;
    int last = -1;
    double finish = 0.0, run_start = 0.0;
    if (params.initial.phase) {
        last = -2;
        if (params.initial.changeover_remaining > 0.0) {
            finish = run_start = params.initial.changeover_remaining;
        } else {
            run_start = -params.initial.green_elapsed;
        }
    }
    for (const auto& [pid, list] : input.phases) {
        if (params.initial.phase && *params.initial.phase == pid) last = static_cast<int>(s.lists.size());
        s.lists.push_back(list);
        auto& fb = s.feedback.emplace_back();
        for (const Cluster& c : list) {
            double d = 0.0;
            if (params.mode == DelayMode::augmented) {
                auto it = params.feedback.find(c.origin);
                if (it != params.feedback.end()) d = it->second;
            }
            fb.push_back(d);
        }
    }
    std::vector<std::size_t> next(s.lists.size(), 0);
    s.walk(next, last, finish, run_start, 0.0, 0.0);
    return s.best;
}

}  // namespace tsched::oracle

namespace tsched::oracle {

OracleCase random_case(std::mt19937_64& rng) {
    auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    OracleCase c;
    const int phases = uniform(1, 2);
    for (int p = 1; p <= phases; ++p) {
        auto& list = c.input.phases[PhaseId{p}];
        const int n = uniform(0, 4);
        std::vector<int> arrs;
        for (int k = 0; k < n; ++k) arrs.push_back(uniform(0, 60));
        std::sort(arrs.begin(), arrs.end());
        for (int k = 0; k < n; ++k) {
            const double count = uniform(1, 8);
            const RoadId road{10 * p + uniform(1, 2)};
            list.push_back(Cluster{count, static_cast<double>(arrs[k]), arrs[k] + count / 0.5, road,
                                   Provenance::local_sensed, {}});
        }
    }
    c.input.horizon = uniform(0, 1) ? std::numeric_limits<double>::infinity() : uniform(60, 120);
    c.params.changeover = 5.0;
    if (uniform(0, 1)) {
        c.params.mode = DelayMode::augmented;
        for (int p = 1; p <= phases; ++p)
            for (int r = 1; r <= 2; ++r) c.params.feedback[RoadId{10 * p + r}] = 0.25 * uniform(0, 40);
    }
    switch (uniform(0, 3)) {
        case 0: break;
        case 1:
            c.params.initial.phase = PhaseId{1};
            c.params.initial.green_elapsed = uniform(0, 30);
            break;
        case 2:
            c.params.initial.phase = PhaseId{phases};
            c.params.initial.changeover_remaining = uniform(1, 5);
            break;
        default:
            c.params.max_green = uniform(15, 40);
            c.params.initial.phase = PhaseId{1};
            c.params.initial.green_elapsed = uniform(0, 20);
            break;
    }
    return c;
}

SuiteResult run_oracle_suite(std::size_t cases, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SuiteResult r;
    for (std::size_t k = 0; k < cases; ++k) {
        const OracleCase c = random_case(rng);
        const double dp = optimize(c.input, c.params).total_augmented_delay;
        const double bf = brute_force(c.input, c.params).total_augmented_delay;
        ++r.cases;
        if (dp != bf) {
            ++r.mismatches;
            if (r.failures.size() < 10)
                r.failures.push_back("case " + std::to_string(k) + ": dp " + std::to_string(dp) + " vs oracle " +
                                     std::to_string(bf));
        }
    }
    return r;
}

}  // namespace tsched::oracle
