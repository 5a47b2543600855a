#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lca/rng.hpp"

namespace lca {

enum class ObjectId : int { Red = 0, Green = 1, Blue = 2 };

inline constexpr std::array<ObjectId, 3> kObjects = {ObjectId::Red, ObjectId::Green,
                                                     ObjectId::Blue};

std::string_view color_name(ObjectId id);
std::optional<ObjectId> color_from_name(std::string_view name);  // case-insensitive

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Vec2&) const = default;
};

inline double chebyshev(Vec2 a, Vec2 b) {
    double dx = a.x > b.x ? a.x - b.x : b.x - a.x;
    double dy = a.y > b.y ? a.y - b.y : b.y - a.y;
    return dx > dy ? dx : dy;
}

// Workspace geometry. The action grid is 10x10 over the full workspace; the
// pick tolerance equals half a grid cell so a grid-quantized policy can pick
// an object anywhere. Stacking demands more precision than picking, so the
// snap tolerance is tighter; objects spawn on grid centers, which keeps every
// policy-reachable stack target exactly on the grid.
namespace geom {
inline constexpr double kWorkspace = 20.0;       // cm, square
inline constexpr double kBaseSeparation = 4.0;   // cm, Chebyshev, floor objects
inline constexpr double kPickTolerance = 2.0;    // cm, Chebyshev
inline constexpr double kSnapTolerance = 0.4;    // cm, Chebyshev
inline constexpr int kGridSide = 10;
inline constexpr int kActionCells = kGridSide * kGridSide;
inline constexpr double kCell = kWorkspace / kGridSide;
inline constexpr int kMaxTowerHeight = 3;
}  // namespace geom

Vec2 cell_center(int cell);
int nearest_cell(Vec2 p);

struct Action {
    Vec2 target;
};

// Full symbolic simulator state. Immutable value; `step` returns a successor.
struct WorldState {
    std::array<Vec2, 3> positions;
    // resting_on[o] = object directly underneath o; empty for floor or held
    std::array<std::optional<ObjectId>, 3> resting_on;
    std::optional<ObjectId> holding;
    Vec2 effector;
    std::int64_t step_count = 0;

    bool operator==(const WorldState&) const = default;

    const Vec2& pos(ObjectId o) const { return positions[static_cast<int>(o)]; }
    const std::optional<ObjectId>& support(ObjectId o) const {
        return resting_on[static_cast<int>(o)];
    }
    std::optional<ObjectId> object_above(ObjectId o) const;
    int height_below(ObjectId o) const;  // number of objects underneath
    bool is_held(ObjectId o) const { return holding && *holding == o; }
    bool is_exposed(ObjectId o) const;  // not held, nothing on top
    bool is_base(ObjectId o) const;     // floor level, not held
};

// Thrown only for malformed inputs (out-of-workspace actions etc.).
void validate_state(const WorldState& s);  // asserts all invariants; throws on breach

struct SceneSnapshot {
    std::optional<ObjectId> grasping;
    std::vector<std::pair<ObjectId, ObjectId>> on_top;  // (top, bottom), sorted

    bool operator==(const SceneSnapshot&) const = default;
    std::uint64_t canonical_key() const;
};

struct Task {
    enum class Kind { Grasp, PairStack, TripleStack };
    Kind kind = Kind::Grasp;
    ObjectId first = ObjectId::Red;   // grasp target / stack top
    ObjectId second = ObjectId::Blue; // stack bottom (PairStack only)

    static Task grasp(ObjectId o);
    static Task pair_stack(ObjectId top, ObjectId bottom);
    static Task triple_stack();

    std::string text() const;
    std::string short_name() const;  // e.g. "grasp_red", "stack_red_on_blue"
    bool operator==(const Task&) const = default;
};

WorldState reset(std::uint64_t seed);
WorldState step(const WorldState& state, const Action& action);
SceneSnapshot snapshot(const WorldState& state);
bool task_success(const WorldState& state, const Task& task);
Action random_action(Rng& rng);

struct SparsenessEstimate {
    double mean = 0.0;              // over uncensored trials; >= max_steps if all censored
    double censored_fraction = 0.0;
    int trials = 0;
    int uncensored = 0;
    bool all_censored = false;
};

// One trial: steps until first success, or -1 when the cap was hit.
using SparsenessTrialFn =
    std::function<std::int64_t(std::uint64_t trial_seed, std::int64_t max_steps)>;

SparsenessEstimate estimate_hitting_time(int trials, std::int64_t max_steps,
                                         std::uint64_t seed, const SparsenessTrialFn& trial,
                                         int threads = 0);

SparsenessEstimate estimate_sparseness(const Task& task, std::int64_t max_steps, int trials,
                                       std::uint64_t seed, int threads = 0);

// Shortest action sequence solving `task` from `state` under step semantics.
std::vector<Action> scripted_expert(const Task& task, const WorldState& state);

}  // namespace lca
