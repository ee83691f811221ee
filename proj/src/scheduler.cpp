#include "tsched/scheduler.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace tsched {

namespace {

constexpr double kEps = 1e-9;

double snap(double x, double step) { return std::round(x / step) * step; }
double floor_to(double x, double step) { return std::floor(x / step + kEps) * step; }
bool integral(double x) { return std::abs(x - std::round(x)) < 1e-9; }

struct Job {
    double count;
    double arr;
    double dur;
    double feedback;
};

struct Label {
    double finish;
    double run_start;
    double aug;
    double local;
    double start;  // service start of the cluster this transition scheduled
    int last;      // phase index; P = no phase yet, P + 1 = a phase outside the input
    int prev_state;
    int prev_label;
    int phase;     // phase index acted on
    bool defer;
    bool new_run;
};

ScheduledCluster make_scheduled(const Cluster& c, PhaseId phase, double ast, double fb, std::size_t index) {
    ScheduledCluster sc;
    sc.cluster = c;
    sc.phase = phase;
    sc.ast = ast;
    sc.local_delay = cluster_delay(c, ast);
    sc.augmented_delay = sc.local_delay + c.count * fb;
    sc.index = index;
    return sc;
}

void retotal(ControlFlow& cf) {
    cf.phase_sequence.clear();
    cf.total_local_delay = 0.0;
    cf.total_augmented_delay = 0.0;
    for (const auto& sc : cf.scheduled) {
        cf.phase_sequence.push_back(sc.phase);
        cf.total_local_delay += sc.local_delay;
        cf.total_augmented_delay += sc.augmented_delay;
    }
    for (const auto& sc : cf.deferred) {
        cf.total_local_delay += sc.local_delay;
        cf.total_augmented_delay += sc.augmented_delay;
    }
}

ScheduledCluster defer_cluster(const Cluster& c, PhaseId phase, double horizon, std::size_t index) {
    ScheduledCluster sc = make_scheduled(c, phase, std::max(horizon, c.arr), 0.0, index);
    sc.new_run = false;
    sc.green_start = sc.ast;
    return sc;
}

}  // namespace

double cluster_delay(const Cluster& c, double ast) {
    if (ast < c.arr) throw std::invalid_argument("cluster served before its arrival");
    return c.count * (ast - c.arr);
}

double augmented_delay(const Cluster& c, double ast, double feedback) {
    if (feedback < 0.0) throw std::invalid_argument("negative congestion feedback");
    if (ast < c.arr) throw std::invalid_argument("cluster served before its arrival");
    return c.count * ((ast - c.arr) + feedback);
}

InputClusterSequence quantize(const InputClusterSequence& input, double step) {
    InputClusterSequence out;
    out.horizon = std::isfinite(input.horizon) ? snap(input.horizon, step) : input.horizon;
    for (const auto& [pid, list] : input.phases) {
        auto& dst = out.phases[pid];
        dst.reserve(list.size());
        for (Cluster c : list) {
            const double dur = std::max(0.0, snap(c.duration(), step));
            c.arr = std::max(0.0, snap(c.arr, step));
            c.dep = c.arr + dur;
            dst.push_back(c);
        }
    }
    return out;
}

ControlFlow optimize(const InputClusterSequence& input, const DelayParams& params) {
    const double step = params.time_step;
    const InputClusterSequence q = quantize(input, step);
    const bool augmented = params.mode == DelayMode::augmented;
    const bool bounded_green = std::isfinite(params.max_green);
    const double H = q.horizon;
    const bool can_defer = std::isfinite(H);

    std::vector<PhaseId> pids;
    std::vector<std::vector<Job>> jobs;
    for (const auto& [pid, list] : q.phases) {
        pids.push_back(pid);
        auto& js = jobs.emplace_back();
        for (const Cluster& c : list) {
            double fb = 0.0;
            if (augmented) {
                auto it = params.feedback.find(c.origin);
                if (it != params.feedback.end()) fb = it->second;
                if (fb < 0.0) throw std::invalid_argument("negative congestion feedback");
            }
            js.push_back({c.count, c.arr, c.duration(), fb});
        }
    }
    const int P = static_cast<int>(pids.size());

    // Cost of leaving clusters k.. of a phase unserved.
    std::vector<std::vector<double>> tail(P);
    for (int p = 0; p < P; ++p) {
        const auto& js = jobs[p];
        tail[p].assign(js.size() + 1, 0.0);
        if (!can_defer) continue;
        for (int k = static_cast<int>(js.size()) - 1; k >= 0; --k)
            tail[p][k] = tail[p][k + 1] + js[k].count * std::max(0.0, H - js[k].arr);
    }

    std::vector<std::size_t> radix(P), stride(P);
    std::size_t n_states = 1;
    for (int p = 0; p < P; ++p) {
        radix[p] = jobs[p].size() + 1;
        stride[p] = n_states;
        if (n_states > params.max_states / radix[p])
            throw StateSpaceOverflow("schedule state space exceeds " + std::to_string(params.max_states) +
                                     " states; horizon too long");
        n_states *= radix[p];
    }

    // Label lists are reused across calls to avoid reallocating per state.
    thread_local std::vector<std::vector<Label>> labels;
    if (labels.size() < n_states) labels.resize(n_states);
    for (std::size_t t = 0; t < n_states; ++t) labels[t].clear();
    {
        Label init{};
        init.last = P;
        if (params.initial.phase) {
            auto it = std::find(pids.begin(), pids.end(), *params.initial.phase);
            init.last = it == pids.end() ? P + 1 : static_cast<int>(it - pids.begin());
            if (params.initial.changeover_remaining > 0.0) {
                init.finish = snap(params.initial.changeover_remaining, step);
                init.run_start = init.finish;
            } else {
                init.finish = 0.0;
                init.run_start = -snap(params.initial.green_elapsed, step);
            }
        }
        init.prev_state = -1;
        init.prev_label = -1;
        init.phase = -1;
        labels[0].push_back(init);
    }

    // Suffix sums per phase: vehicles and service time still to come.
    std::vector<std::vector<double>> rest_count(P), rest_dur(P);
    for (int p = 0; p < P; ++p) {
        const auto& js = jobs[p];
        rest_count[p].assign(js.size() + 1, 0.0);
        rest_dur[p].assign(js.size() + 1, 0.0);
        for (int k = static_cast<int>(js.size()) - 1; k >= 0; --k) {
            rest_count[p][k] = rest_count[p][k + 1] + js[k].count;
            rest_dur[p][k] = rest_dur[p][k + 1] + js[k].dur;
        }
    }

    // a dominates b when a can replay any continuation of b for at most the
    // extra finish time per remaining vehicle. With bounded green runs a's run
    // must also be no older than b's, or able to absorb its whole phase.
    std::vector<double> remaining_at(n_states, 0.0);
    for (std::size_t t = 0; t < n_states; ++t)
        for (int p = 0; p < P; ++p) remaining_at[t] += rest_count[p][(t / stride[p]) % radix[p]];

    auto dominates = [&](const Label& a, const Label& b, std::size_t state, double remaining) {
        if (a.last != b.last) return false;
        const double lag = std::max(0.0, a.finish - b.finish);
        if (a.aug + lag * remaining > b.aug) return false;
        if (!bounded_green || a.last >= P) return true;
        if (a.finish - a.run_start <= b.finish - b.run_start) return true;
        const auto& js = jobs[a.last];
        const std::size_t k = (state / stride[a.last]) % radix[a.last];
        if (k >= js.size()) return true;
        return std::max(a.finish, js.back().arr) + rest_dur[a.last][k] - a.run_start <= params.max_green + kEps;
    };
    auto insert = [&](std::size_t target, const Label& L) {
        const double remaining = remaining_at[target];
        auto& ls = labels[target];
        for (const Label& e : ls)
            if (dominates(e, L, target, remaining)) return;
        std::erase_if(ls, [&](const Label& e) { return dominates(L, e, target, remaining); });
        ls.push_back(L);
    };

    std::vector<std::size_t> consumed(P);
    for (std::size_t s = 0; s < n_states; ++s) {
        if (labels[s].empty()) continue;
        for (int p = 0; p < P; ++p) consumed[p] = (s / stride[p]) % radix[p];
        for (std::size_t li = 0; li < labels[s].size(); ++li) {
            const Label cur = labels[s][li];
            for (int p = 0; p < P; ++p) {
                const std::size_t k = consumed[p];
                if (k >= jobs[p].size()) continue;
                const Job& j = jobs[p][k];
                Label nx = cur;
                nx.prev_state = static_cast<int>(s);
                nx.prev_label = static_cast<int>(li);
                nx.phase = p;
                nx.defer = false;
                nx.last = p;
                bool appended = false;
                if (cur.last == p) {
                    const double start = std::max(j.arr, cur.finish);
                    if (start + j.dur - cur.run_start <= params.max_green + kEps) {
                        nx.start = start;
                        appended = true;
                    }
                }
                if (!appended) {
                    const double ready = cur.last == P ? cur.finish : cur.finish + params.changeover;
                    nx.start = std::max(j.arr, ready);
                    nx.run_start = nx.start;
                }
                nx.new_run = !appended;
                nx.finish = nx.start + j.dur;
                const double wait = nx.start - j.arr;
                nx.local = cur.local + j.count * wait;
                nx.aug = cur.aug + j.count * (wait + j.feedback);
                insert(s + stride[p], nx);
            }
            if (!can_defer) continue;
            for (int p = 0; p < P; ++p) {
                const std::size_t k = consumed[p];
                if (k >= jobs[p].size()) continue;
                Label nx = cur;
                nx.prev_state = static_cast<int>(s);
                nx.prev_label = static_cast<int>(li);
                nx.phase = p;
                nx.defer = true;
                nx.new_run = false;
                nx.local = cur.local + tail[p][k];
                nx.aug = cur.aug + tail[p][k];
                insert(s + (jobs[p].size() - k) * stride[p], nx);
            }
        }
    }

    ControlFlow cf;
    cf.horizon = H;
    const auto& finals = labels[n_states - 1];
    if (finals.empty()) return cf;
    std::size_t best = 0;
    for (std::size_t i = 1; i < finals.size(); ++i) {
        const Label& a = finals[i];
        const Label& b = finals[best];
        if (a.aug < b.aug || (a.aug == b.aug && (a.last < b.last || (a.last == b.last && a.finish < b.finish))))
            best = i;
    }

    // Walk back-pointers from the chosen terminal label.
    std::vector<std::pair<std::size_t, std::size_t>> path;
    for (int s = static_cast<int>(n_states - 1), l = static_cast<int>(best); s >= 0;) {
        const Label& L = labels[s][l];
        if (L.prev_state < 0) break;
        path.emplace_back(static_cast<std::size_t>(s), static_cast<std::size_t>(l));
        const int ps = L.prev_state;
        l = L.prev_label;
        s = ps;
    }
    std::reverse(path.begin(), path.end());
    for (const auto& [s, l] : path) {
        const Label& L = labels[s][l];
        const std::size_t ps = static_cast<std::size_t>(L.prev_state);
        const int p = L.phase;
        const std::size_t k = (ps / stride[p]) % radix[p];
        const auto& list = q.phases.at(pids[p]);
        if (L.defer) {
            for (std::size_t m = k; m < list.size(); ++m) cf.deferred.push_back(defer_cluster(list[m], pids[p], H, m));
        } else {
            ScheduledCluster sc = make_scheduled(list[k], pids[p], L.start, jobs[p][k].feedback, k);
            sc.new_run = L.new_run;
            sc.green_start = L.run_start;
            cf.scheduled.push_back(sc);
        }
    }
    retotal(cf);
    return cf;
}

namespace {

std::optional<std::size_t> first_offender(const ControlFlow& cf, double max_green) {
    for (std::size_t i = 0; i < cf.scheduled.size(); ++i)
        if (cf.scheduled[i].finish() - cf.scheduled[i].green_start > max_green + kEps) return i;
    return std::nullopt;
}

// Prefix served within `allowed` seconds and the remainder.
std::optional<std::pair<Cluster, Cluster>> split_cluster(const Cluster& c, double allowed, double step) {
    const double dur = c.duration();
    double head_dur = floor_to(allowed, step);
    if (head_dur <= 0.0 || head_dur >= dur) return std::nullopt;
    double head_count = c.count * head_dur / dur;
    if (integral(c.count)) {
        head_count = std::floor(head_count + kEps);
        if (head_count < 1.0) return std::nullopt;
        head_dur = snap(dur * head_count / c.count, step);
        if (head_dur <= 0.0 || head_dur >= dur) return std::nullopt;
    }
    Cluster head = c, rest = c;
    head.count = head_count;
    head.dep = c.arr + head_dur;
    rest.count = c.count - head_count;
    rest.arr = c.arr + head_dur;
    if (rest.count <= kEps) return std::nullopt;
    return std::pair{head, rest};
}

// A cluster that restarts the phase that was already green because it did not
// fit in the rest of that run: (position, green time left in the run).
std::optional<std::pair<std::size_t, double>> forced_restart(const ControlFlow& cf, const DelayParams& params) {
    std::optional<PhaseId> prev_phase = params.initial.phase;
    double prev_finish = 0.0, prev_start = 0.0;
    if (params.initial.changeover_remaining > 0.0) {
        prev_finish = prev_start = snap(params.initial.changeover_remaining, params.time_step);
    } else {
        prev_start = -snap(params.initial.green_elapsed, params.time_step);
    }
    for (std::size_t k = 0; k < cf.scheduled.size(); ++k) {
        const ScheduledCluster& sc = cf.scheduled[k];
        if (sc.new_run && prev_phase == sc.phase) {
            const double start = std::max(sc.cluster.arr, prev_finish);
            const double allowed = params.max_green - (start - prev_start);
            if (allowed > 0.0 && start + sc.cluster.duration() > prev_start + params.max_green + kEps)
                return std::pair{k, allowed};
        }
        prev_phase = sc.phase;
        prev_finish = sc.finish();
        prev_start = sc.green_start;
    }
    return std::nullopt;
}

ControlFlow hard_cut(ControlFlow cf, const DelayParams& params) {
    cf.max_green_forced = true;
    while (auto off = first_offender(cf, params.max_green)) {
        const std::size_t o = *off;
        ScheduledCluster sc = cf.scheduled[o];
        std::vector<ScheduledCluster> moved;
        auto parts = split_cluster(sc.cluster, params.max_green - (sc.ast - sc.green_start), params.time_step);
        std::size_t erase_from = o;
        if (parts) {
            ScheduledCluster head = make_scheduled(parts->first, sc.phase, sc.ast,
                                                   (sc.augmented_delay - sc.local_delay) / sc.cluster.count,
                                                   sc.index);
            head.new_run = sc.new_run;
            head.green_start = sc.green_start;
            cf.scheduled[o] = head;
            moved.push_back(defer_cluster(parts->second, sc.phase, cf.horizon, sc.index));
            erase_from = o + 1;
        } else {
            moved.push_back(defer_cluster(sc.cluster, sc.phase, cf.horizon, sc.index));
        }
        std::size_t end = o + 1;
        while (end < cf.scheduled.size() && !cf.scheduled[end].new_run) {
            const auto& later = cf.scheduled[end];
            moved.push_back(defer_cluster(later.cluster, later.phase, cf.horizon, later.index));
            ++end;
        }
        cf.scheduled.erase(cf.scheduled.begin() + static_cast<std::ptrdiff_t>(erase_from),
                           cf.scheduled.begin() + static_cast<std::ptrdiff_t>(end));
        cf.deferred.insert(cf.deferred.end(), moved.begin(), moved.end());
    }
    retotal(cf);
    return cf;
}

}  // namespace

ControlFlow enforce_max_green(const ControlFlow& cf0, const InputClusterSequence& input, const DelayParams& params) {
    if (!std::isfinite(params.max_green)) return cf0;
    InputClusterSequence work = quantize(input, params.time_step);
    ControlFlow cf = cf0;
    for (int iter = 0;; ++iter) {
        std::optional<std::size_t> at;
        std::optional<std::pair<Cluster, Cluster>> parts;
        if (auto r = forced_restart(cf, params)) {
            parts = split_cluster(cf.scheduled[r->first].cluster, r->second, params.time_step);
            if (parts) at = r->first;
        }
        bool overrun = false;
        if (!at) {
            auto off = first_offender(cf, params.max_green);
            if (!off) return cf;
            const ScheduledCluster& sc = cf.scheduled[*off];
            parts = split_cluster(sc.cluster, params.max_green - (sc.ast - sc.green_start), params.time_step);
            if (!parts) return hard_cut(std::move(cf), params);
            at = off;
            overrun = true;
        }
        if (iter == kMaxGreenSplitIterations) return overrun ? hard_cut(std::move(cf), params) : cf;
        const ScheduledCluster& sc = cf.scheduled[*at];
        auto& list = work.phases.at(sc.phase);
        const auto pos = list.begin() + static_cast<std::ptrdiff_t>(sc.index);
        *pos = parts->first;
        list.insert(pos + 1, parts->second);
        cf = optimize(work, params);
    }
}

double longest_green_run(const ControlFlow& cf, const DelayParams&) {
    double longest = 0.0;
    for (const auto& sc : cf.scheduled) longest = std::max(longest, sc.finish() - sc.green_start);
    return longest;
}

SignalCommand first_action(const ControlFlow& cf, std::optional<PhaseId> current_phase, double green_elapsed,
                           const DelayParams& params) {
    if (current_phase && green_elapsed >= params.max_green) {
        // Maxed out: hand the green to a phase with vehicles already waiting.
        for (const auto* list : {&cf.scheduled, &cf.deferred})
            for (const ScheduledCluster& sc : *list)
                if (sc.phase != *current_phase && sc.cluster.arr <= kEps) return SignalCommand::switch_to(sc.phase);
    }
    if (cf.scheduled.empty()) return SignalCommand::hold();
    const ScheduledCluster& head = cf.scheduled.front();
    if (current_phase && head.phase == *current_phase && !head.new_run) return SignalCommand::hold();
    if (current_phase && green_elapsed < params.min_green) return SignalCommand::hold();
    return SignalCommand::switch_to(head.phase);
}

}  // namespace tsched
