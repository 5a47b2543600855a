#include "lca/world.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace lca {

namespace {

constexpr std::uint64_t kResetTag = 0x52455345u;   // reset stream
constexpr std::uint64_t kTrialTag = 0x54524941u;   // sparseness trial stream

bool in_workspace(Vec2 p) {
    return p.x >= 0.0 && p.x < geom::kWorkspace && p.y >= 0.0 && p.y < geom::kWorkspace;
}

int idx(ObjectId o) { return static_cast<int>(o); }

}  // namespace

std::string_view color_name(ObjectId id) {
    switch (id) {
        case ObjectId::Red: return "red";
        case ObjectId::Green: return "green";
        case ObjectId::Blue: return "blue";
    }
    return "?";
}

std::optional<ObjectId> color_from_name(std::string_view name) {
    std::string low(name);
    std::transform(low.begin(), low.end(), low.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (low == "red") return ObjectId::Red;
    if (low == "green") return ObjectId::Green;
    if (low == "blue") return ObjectId::Blue;
    return std::nullopt;
}

Vec2 cell_center(int cell) {
    if (cell < 0 || cell >= geom::kActionCells)
        throw std::domain_error("action cell out of range: " + std::to_string(cell));
    int row = cell / geom::kGridSide;
    int col = cell % geom::kGridSide;
    return {(col + 0.5) * geom::kCell, (row + 0.5) * geom::kCell};
}

int nearest_cell(Vec2 p) {
    auto clamp_idx = [](double v) {
        int i = static_cast<int>(v / geom::kCell);
        return std::clamp(i, 0, geom::kGridSide - 1);
    };
    return clamp_idx(p.y) * geom::kGridSide + clamp_idx(p.x);
}

std::optional<ObjectId> WorldState::object_above(ObjectId o) const {
    for (ObjectId other : kObjects) {
        if (other != o && resting_on[idx(other)] == o) return other;
    }
    return std::nullopt;
}

int WorldState::height_below(ObjectId o) const {
    int h = 0;
    std::optional<ObjectId> cur = resting_on[idx(o)];
    while (cur) {
        ++h;
        cur = resting_on[idx(*cur)];
    }
    return h;
}

bool WorldState::is_exposed(ObjectId o) const {
    return !is_held(o) && !object_above(o).has_value();
}

bool WorldState::is_base(ObjectId o) const {
    return !is_held(o) && !resting_on[idx(o)].has_value();
}

void validate_state(const WorldState& s) {
    auto fail = [](const char* what) { throw std::logic_error(std::string("world invariant: ") + what); };
    int held = 0;
    for (ObjectId o : kObjects) {
        if (s.is_held(o)) {
            ++held;
            if (s.support(o)) fail("held object has a support");
            if (s.object_above(o)) fail("held object has an object above");
        }
        if (s.height_below(o) >= geom::kMaxTowerHeight) fail("support chain too tall / cyclic");
        if (auto sup = s.support(o)) {
            if (s.pos(o) != s.pos(*sup)) fail("stacked object not aligned with support");
            if (s.is_held(*sup)) fail("object stacked on a held object");
        }
    }
    if (held > 1) fail("more than one held object");
    for (ObjectId a : kObjects) {
        if (!s.is_base(a)) continue;
        if (!in_workspace(s.pos(a))) fail("object outside workspace");
        for (ObjectId b : kObjects) {
            if (idx(b) <= idx(a) || !s.is_base(b)) continue;
            if (chebyshev(s.pos(a), s.pos(b)) < geom::kBaseSeparation)
                fail("base objects closer than the separation limit");
        }
    }
}

WorldState reset(std::uint64_t seed) {
    Rng rng(derive_seed(seed, kResetTag));
    WorldState s;
    // Spawn on grid-cell centers so freshly spawned objects are exact targets
    // for grid-quantized policies; rejection-sample until separated.
    while (true) {
        std::array<Vec2, 3> pos;
        for (auto& p : pos) p = cell_center(static_cast<int>(rng.next_below(geom::kActionCells)));
        bool ok = true;
        for (int a = 0; a < 3 && ok; ++a)
            for (int b = a + 1; b < 3; ++b)
                if (chebyshev(pos[a], pos[b]) < geom::kBaseSeparation) { ok = false; break; }
        if (ok) { s.positions = pos; break; }
    }
    s.resting_on = {std::nullopt, std::nullopt, std::nullopt};
    s.holding = std::nullopt;
    s.effector = {geom::kWorkspace / 2.0, geom::kWorkspace / 2.0};
    s.step_count = 0;
    return s;
}

WorldState step(const WorldState& state, const Action& action) {
    if (!in_workspace(action.target))
        throw std::domain_error("action target outside the workspace");

    WorldState next = state;
    next.effector = action.target;
    next.step_count = state.step_count + 1;

    if (!state.holding) {
        // Pick: nearest exposed stack-top within tolerance; id order breaks ties.
        std::optional<ObjectId> best;
        double best_d = geom::kPickTolerance;
        for (ObjectId o : kObjects) {
            if (!state.is_exposed(o)) continue;
            double d = chebyshev(state.pos(o), action.target);
            if (d <= best_d && (!best || d < best_d)) {
                best = o;
                best_d = d;
            }
        }
        if (best) {
            next.resting_on[idx(*best)] = std::nullopt;
            next.holding = *best;
            next.positions[idx(*best)] = action.target;  // rides the gripper
        }
        return next;
    }

    ObjectId held = *state.holding;
    // Place: snap onto the nearest eligible stack-top, else floor placement,
    // else keep holding.
    std::optional<ObjectId> top;
    double best_d = geom::kSnapTolerance;
    for (ObjectId o : kObjects) {
        if (o == held || !state.is_exposed(o)) continue;
        if (state.height_below(o) + 1 >= geom::kMaxTowerHeight) continue;
        double d = chebyshev(state.pos(o), action.target);
        if (d <= best_d && (!top || d < best_d)) {
            top = o;
            best_d = d;
        }
    }
    if (top) {
        next.resting_on[idx(held)] = *top;
        next.positions[idx(held)] = state.pos(*top);
        next.holding = std::nullopt;
        return next;
    }
    bool clear = true;
    for (ObjectId o : kObjects) {
        if (o == held || !state.is_base(o)) continue;
        if (chebyshev(state.pos(o), action.target) < geom::kBaseSeparation) {
            clear = false;
            break;
        }
    }
    if (clear) {
        next.positions[idx(held)] = action.target;
        next.holding = std::nullopt;
    } else {
        next.positions[idx(held)] = action.target;  // still held at the gripper
    }
    return next;
}

SceneSnapshot snapshot(const WorldState& state) {
    SceneSnapshot snap;
    snap.grasping = state.holding;
    for (ObjectId o : kObjects) {
        if (auto sup = state.support(o)) snap.on_top.emplace_back(o, *sup);
    }
    std::sort(snap.on_top.begin(), snap.on_top.end());
    return snap;
}

std::uint64_t SceneSnapshot::canonical_key() const {
    std::uint64_t key = grasping ? static_cast<std::uint64_t>(idx(*grasping)) + 1 : 0;
    for (const auto& [top, bottom] : on_top) {
        int pair_id = idx(top) * 3 + idx(bottom);  // 0..8, diagonal unused
        key |= 1ull << (4 + pair_id);
    }
    return key;
}

Task Task::grasp(ObjectId o) { return Task{Kind::Grasp, o, o}; }

Task Task::pair_stack(ObjectId top, ObjectId bottom) {
    if (top == bottom) throw std::domain_error("pair stack needs two distinct objects");
    return Task{Kind::PairStack, top, bottom};
}

Task Task::triple_stack() { return Task{Kind::TripleStack, ObjectId::Red, ObjectId::Blue}; }

std::string Task::text() const {
    switch (kind) {
        case Kind::Grasp:
            return std::string("Grasp the ") + std::string(color_name(first)) + " object";
        case Kind::PairStack:
            return std::string("Stack the ") + std::string(color_name(first)) +
                   " object on top of the " + std::string(color_name(second)) + " object";
        case Kind::TripleStack:
            return "Stack all three objects";
    }
    return {};
}

std::string Task::short_name() const {
    switch (kind) {
        case Kind::Grasp:
            return std::string("grasp_") + std::string(color_name(first));
        case Kind::PairStack:
            return std::string("stack_") + std::string(color_name(first)) + "_on_" +
                   std::string(color_name(second));
        case Kind::TripleStack:
            return "triple_stack";
    }
    return {};
}

bool task_success(const WorldState& state, const Task& task) {
    switch (task.kind) {
        case Task::Kind::Grasp:
            return state.is_held(task.first);
        case Task::Kind::PairStack:
            return state.support(task.first) == std::optional<ObjectId>(task.second);
        case Task::Kind::TripleStack:
            for (ObjectId o : kObjects)
                if (state.height_below(o) == 2) return true;
            return false;
    }
    return false;
}

Action random_action(Rng& rng) {
    return Action{{rng.uniform(0.0, geom::kWorkspace), rng.uniform(0.0, geom::kWorkspace)}};
}

SparsenessEstimate estimate_hitting_time(int trials, std::int64_t max_steps,
                                         std::uint64_t seed, const SparsenessTrialFn& trial,
                                         int threads) {
    if (trials < 1) throw std::domain_error("trials must be >= 1");
    if (max_steps < 1) throw std::domain_error("max_steps must be >= 1");

    std::vector<std::int64_t> outcomes(static_cast<std::size_t>(trials));
    unsigned n_threads = threads > 0 ? static_cast<unsigned>(threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(trials));
    auto worker = [&](unsigned t0) {
        for (int i = static_cast<int>(t0); i < trials; i += static_cast<int>(n_threads))
            outcomes[static_cast<std::size_t>(i)] =
                trial(derive_seed(seed, kTrialTag, static_cast<std::uint64_t>(i)), max_steps);
    };
    if (n_threads <= 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }

    SparsenessEstimate est;
    est.trials = trials;
    double sum = 0.0;
    for (std::int64_t out : outcomes) {
        if (out < 0) continue;
        sum += static_cast<double>(out);
        ++est.uncensored;
    }
    est.censored_fraction = static_cast<double>(trials - est.uncensored) / trials;
    if (est.uncensored == 0) {
        est.all_censored = true;
        est.mean = static_cast<double>(max_steps);  // lower bound
    } else {
        est.mean = sum / est.uncensored;
    }
    return est;
}

SparsenessEstimate estimate_sparseness(const Task& task, std::int64_t max_steps, int trials,
                                       std::uint64_t seed, int threads) {
    auto trial = [&task](std::uint64_t trial_seed, std::int64_t cap) -> std::int64_t {
        WorldState s = reset(trial_seed);
        Rng rng(derive_seed(trial_seed, 0x414354u));
        for (std::int64_t t = 1; t <= cap; ++t) {
            s = step(s, random_action(rng));
            if (task_success(s, task)) return t;
        }
        return -1;
    };
    return estimate_hitting_time(trials, max_steps, seed, trial, threads);
}

namespace {

// First grid center at least the separation limit away from every base object
// other than `skip`; used by the scripted expert for intermediate placements.
Vec2 find_floor_spot(const WorldState& s, std::optional<ObjectId> skip) {
    for (int cell = 0; cell < geom::kActionCells; ++cell) {
        Vec2 p = cell_center(cell);
        bool ok = true;
        for (ObjectId o : kObjects) {
            if (skip && *skip == o) continue;
            if (!s.is_base(o)) continue;
            if (chebyshev(s.pos(o), p) < geom::kBaseSeparation) { ok = false; break; }
        }
        if (ok) return p;
    }
    throw std::logic_error("no free floor spot");  // unreachable: 3 objects, 100 cells
}

ObjectId stack_top_of(const WorldState& s, ObjectId member) {
    ObjectId cur = member;
    while (auto above = s.object_above(cur)) cur = *above;
    return cur;
}

void push_action(std::vector<Action>& seq, WorldState& s, Vec2 target) {
    seq.push_back(Action{target});
    s = step(s, Action{target});
}

// Unstack everything above `o`, parking it on the floor. Gripper must be empty.
void expose(std::vector<Action>& seq, WorldState& s, ObjectId o) {
    while (auto above = s.object_above(o)) {
        ObjectId top = stack_top_of(s, *above);
        push_action(seq, s, s.pos(top));
        push_action(seq, s, find_floor_spot(s, std::nullopt));
    }
}

void expert_grasp(std::vector<Action>& seq, WorldState& s, ObjectId target) {
    if (s.is_held(target)) return;
    if (s.holding) push_action(seq, s, find_floor_spot(s, *s.holding));
    expose(seq, s, target);
    push_action(seq, s, s.pos(target));
}

void expert_pair(std::vector<Action>& seq, WorldState& s, ObjectId top, ObjectId bottom) {
    if (s.support(top) == std::optional<ObjectId>(bottom)) return;
    if (s.holding && *s.holding != top) push_action(seq, s, find_floor_spot(s, *s.holding));
    if (!s.is_held(top)) {
        if (s.object_above(bottom) && stack_top_of(s, bottom) == top) {
            // top sits somewhere above bottom already; clearing bottom frees both
            expose(seq, s, bottom);
        } else {
            expose(seq, s, top);
        }
        if (s.object_above(bottom)) expose(seq, s, bottom);
        push_action(seq, s, s.pos(top));
    } else if (s.object_above(bottom)) {
        push_action(seq, s, find_floor_spot(s, top));
        expose(seq, s, bottom);
        push_action(seq, s, s.pos(top));
    }
    push_action(seq, s, s.pos(bottom));
}

void expert_triple(std::vector<Action>& seq, WorldState& s) {
    if (task_success(s, Task::triple_stack())) return;
    // If a two-tower stands, cap it with the remaining object.
    for (ObjectId o : kObjects) {
        if (s.height_below(o) != 1) continue;
        ObjectId third = ObjectId::Red;
        for (ObjectId c : kObjects)
            if (c != o && c != *s.support(o)) third = c;
        if (!s.is_held(third)) {
            if (s.holding) push_action(seq, s, find_floor_spot(s, *s.holding));
            push_action(seq, s, s.pos(third));
        }
        push_action(seq, s, s.pos(o));
        return;
    }
    if (s.holding) {
        // Start a tower under the held object, then cap with the remaining one.
        ObjectId held = *s.holding;
        ObjectId base = ObjectId::Red, third = ObjectId::Red;
        for (ObjectId c : kObjects)
            if (c != held) { third = base; base = c; }
        push_action(seq, s, s.pos(base));
        push_action(seq, s, s.pos(third));
        push_action(seq, s, s.pos(base));
        return;
    }
    // Three floor objects: red onto blue, then green onto red.
    expert_pair(seq, s, ObjectId::Red, ObjectId::Blue);
    expert_pair(seq, s, ObjectId::Green, ObjectId::Red);
}

}  // namespace

std::vector<Action> scripted_expert(const Task& task, const WorldState& state) {
    std::vector<Action> seq;
    WorldState s = state;
    switch (task.kind) {
        case Task::Kind::Grasp: expert_grasp(seq, s, task.first); break;
        case Task::Kind::PairStack: expert_pair(seq, s, task.first, task.second); break;
        case Task::Kind::TripleStack: expert_triple(seq, s); break;
    }
    if (!task_success(s, task))
        throw std::logic_error("scripted expert failed to solve the task");
    return seq;
}

}  // namespace lca
