#include "emsim/agent.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace emsim {

std::string to_string(ActionType a) {
    switch (a) {
        case ActionType::TurnLeft: return "turn_left";
        case ActionType::TurnRight: return "turn_right";
        case ActionType::Forward: return "forward";
        case ActionType::Listen: return "listen";
        case ActionType::Declare: return "declare";
        case ActionType::Stop: return "stop";
    }
    return "?";
}

ActionType action_type_from_string(const std::string& s) {
    for (ActionType a : {ActionType::TurnLeft, ActionType::TurnRight, ActionType::Forward, ActionType::Listen,
                         ActionType::Declare, ActionType::Stop})
        if (to_string(a) == s) return a;
    throw ConfigError("unknown action: " + s);
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::Declared: return "declared";
        case Termination::Cleared: return "cleared";
        case Termination::BudgetExhausted: return "budget-exhausted";
        case Termination::CollisionAbort: return "collision-abort";
    }
    return "?";
}

Termination termination_from_string(const std::string& s) {
    for (Termination t :
         {Termination::Declared, Termination::Cleared, Termination::BudgetExhausted, Termination::CollisionAbort})
        if (to_string(t) == s) return t;
    throw ConfigError("unknown termination: " + s);
}

StepOutcome step(const Floorplan& plan, const Pose& pose, const Action& action) {
    StepOutcome out{pose, false};
    switch (action.type) {
        case ActionType::TurnLeft: out.pose.heading = wrap_degrees(pose.heading + kTurnStep); break;
        case ActionType::TurnRight: out.pose.heading = wrap_degrees(pose.heading - kTurnStep); break;
        case ActionType::Forward: {
            const double rad = pose.heading * kPi / 180.0;
            const Point from = pose.position();
            const Point to{from.x + kForwardStep * std::cos(rad), from.y + kForwardStep * std::sin(rad)};
            const OccupancyGrid& g = plan.grid();
            if (!g.contains(to) || g.occupied(g.cell_of(to)) || !line_of_sight(g, from, to)) {
                out.collision = true;
            } else {
                out.pose.x = to.x;
                out.pose.y = to.y;
            }
            break;
        }
        default: break;
    }
    return out;
}

SceneContext::SceneContext(Scene s, int nav_inflation_cells)
    : scene(std::move(s)),
      nav_grid(scene.plan.grid().inflated(nav_inflation_cells)),
      routes(scene.plan, scene.plan.grid()),
      nav_routes(scene.plan, nav_grid) {}

std::shared_ptr<const SceneContext> SceneCache::get(std::uint64_t seed, const GenerationParams& p,
                                                    int nav_inflation_cells) {
    std::ostringstream key;
    key.precision(17);
    key << seed << '|' << p.min_rooms << '|' << p.max_rooms << '|' << p.min_area << '|' << p.max_area << '|'
        << p.resolution << '|' << p.min_room_side << '|' << p.max_room_diagonal << '|' << p.door_width << '|'
        << p.extra_door_probability << '|' << p.max_attempts << '|' << nav_inflation_cells;
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(key.str());
        if (it != cache_.end()) return it->second;
    }
    // Built outside the lock; a concurrent duplicate build is harmless since both are identical.
    auto ctx = std::make_shared<const SceneContext>(generate_scene(seed, p), nav_inflation_cells);
    std::lock_guard<std::mutex> lock(mu_);
    return cache_.emplace(key.str(), ctx).first->second;
}

SceneCache& SceneCache::global() {
    static SceneCache cache;
    return cache;
}

SceneGraph episode_graph(const EpisodeSpec& episode, const SceneContext& ctx, const TraitTable& traits) {
    return build_pdsg(ctx.plan(), ctx.scene.objects, episode.heatmap, traits);
}

namespace {

// Executes actions against the simulated world and records the trace. The detector runs after
// every action that leaves the episode running.
class Runner {
public:
    Runner(const EpisodeSpec& ep, const SceneContext& ctx, const AgentConfig& cfg, std::string policy)
        : ep_(ep),
          ctx_(ctx),
          cfg_(cfg),
          labeler_(Labeler::uniform_noise(cfg.label_error, mix_seed(ep.seed, 0x1abe1))),
          detector_(cfg.detector, mix_seed(ep.seed, 0xde7ec7)),
          source_field_(ctx.plan().grid(), ctx.plan().grid().cell_of(ep.truth.source)),
          pose_(ep.spawn) {
        trace_.episode_id = ep.id;
        trace_.policy = std::move(policy);
        trace_.spawn = ep.spawn;
        budget_ = (cfg.unlimited_budget || cfg.step_budget <= 0) ? cfg.safety_cap : cfg.step_budget;
    }

    bool done() const { return terminated_ || steps_used_ >= budget_; }
    const Pose& pose() const { return pose_; }
    int steps_used() const { return steps_used_; }
    const DetectorVerdict& last_verdict() const { return last_verdict_; }
    const Floorplan& plan() const { return ctx_.plan(); }

    const StepRecord& act(const Action& a) {
        if (done()) throw std::logic_error("action after episode end");
        StepRecord rec;
        rec.step = steps_used_;
        rec.action = a;
        switch (a.type) {
            case ActionType::Listen:
                rec.observation = observe_audio(ep_.audio, pose_, plan(), labeler_, steps_used_, cfg_.acoustics,
                                                &source_field_);
                break;
            case ActionType::Declare:
                trace_.outcome = a.kind;
                trace_.termination = Termination::Declared;
                terminated_ = true;
                rec.verdict = last_verdict_;
                break;
            case ActionType::Stop:
                trace_.termination = Termination::Cleared;
                terminated_ = true;
                break;
            default: {
                StepOutcome o = step(plan(), pose_, a);
                pose_ = o.pose;
                rec.collision = o.collision;
                if (o.collision) {
                    ++trace_.collisions;
                    if (cfg_.collision_policy == CollisionPolicy::Abort) {
                        trace_.termination = Termination::CollisionAbort;
                        terminated_ = true;
                    }
                } else if (a.type == ActionType::Forward) {
                    ++trace_.forward_moves;
                }
            }
        }
        rec.pose = pose_;
        ++steps_used_;
        if (!terminated_) {
            last_verdict_ = detector_.detect(ep_, pose_, plan());
            rec.verdict = last_verdict_;
        }
        trace_.steps.push_back(std::move(rec));
        return trace_.steps.back();
    }

    void note_posterior(const RoomPosterior& p) {
        if (cfg_.record_posteriors && !trace_.steps.empty()) trace_.steps.back().posterior = p.distribution().vec();
    }

    Trace finish() {
        trace_.steps_used = steps_used_;
        trace_.path_length = kForwardStep * trace_.forward_moves;
        if (!terminated_) trace_.termination = Termination::BudgetExhausted;
        return std::move(trace_);
    }

private:
    const EpisodeSpec& ep_;
    const SceneContext& ctx_;
    const AgentConfig& cfg_;
    Labeler labeler_;
    SimulatedDetector detector_;
    DistanceField source_field_;
    Pose pose_;
    Trace trace_;
    DetectorVerdict last_verdict_;
    int steps_used_ = 0;
    int budget_ = 0;
    bool terminated_ = false;
};

// Nearest cell (8-connected BFS over raw free space) that is free on the navigation grid.
std::optional<Cell> nearest_nav_free(const SceneContext& ctx, Cell start) {
    const OccupancyGrid& raw = ctx.plan().grid();
    const OccupancyGrid& nav = ctx.nav_grid;
    if (nav.is_free(start)) return start;
    if (raw.occupied(start)) return std::nullopt;
    std::vector<std::uint8_t> seen(raw.cell_count(), 0);
    std::deque<Cell> q{start};
    seen[raw.index(start)] = 1;
    while (!q.empty()) {
        Cell c = q.front();
        q.pop_front();
        if (nav.is_free(c)) return c;
        for (int dr = -1; dr <= 1; ++dr)
            for (int dc = -1; dc <= 1; ++dc) {
                Cell n{c.col + dc, c.row + dr};
                if ((dr == 0 && dc == 0) || raw.occupied(n) || seen[raw.index(n)]) continue;
                seen[raw.index(n)] = 1;
                q.push_back(n);
            }
    }
    return std::nullopt;
}

// Waypoint follower: plans on the inflated grid, string-pulls the path and steers in closed
// loop with turn-in-place corrections.
class Navigator {
public:
    Navigator(const SceneContext& ctx, const AgentConfig& cfg) : ctx_(ctx), cfg_(cfg) {}

    bool active() const { return active_; }
    void clear() { active_ = false; }

    bool plan_to_room(const Pose& pose, RoomId room) {
        goal_room_ = room;
        return plan(pose, ctx_.plan().anchor_point(room));
    }

    bool plan_to_point(const Pose& pose, Point goal) {
        goal_room_.reset();
        return plan(pose, goal);
    }

    bool replan(const Pose& pose) { return plan(pose, goal_); }

    // Next steering action, or nullopt once the final waypoint is reached.
    std::optional<Action> next(const Pose& pose) {
        if (!active_) return std::nullopt;
        const Point here = pose.position();
        while (idx_ < waypoints_.size() && distance(here, waypoints_[idx_]) <= cfg_.waypoint_tolerance) ++idx_;
        if (idx_ >= waypoints_.size()) {
            active_ = false;
            return std::nullopt;
        }
        const double err = angle_diff(bearing_between(here, waypoints_[idx_]), pose.heading);
        if (std::abs(err) > cfg_.heading_tolerance) return err > 0 ? Action::turn_left() : Action::turn_right();
        return Action::forward();
    }

private:
    bool plan(const Pose& pose, Point goal) {
        goal_ = goal;
        active_ = false;
        waypoints_.clear();
        idx_ = 0;
        const OccupancyGrid& raw = ctx_.plan().grid();
        const OccupancyGrid& nav = ctx_.nav_grid;
        const Point here = pose.position();
        if (!raw.contains(here) || !raw.contains(goal)) return false;
        auto s = nearest_nav_free(ctx_, raw.cell_of(here));
        auto g = nearest_nav_free(ctx_, raw.cell_of(goal));
        if (!s || !g) return false;

        std::vector<Cell> path;
        if (goal_room_ && ctx_.plan().anchor(*goal_room_) == *g) {
            path = ctx_.nav_routes.to_room(*goal_room_).path_to_source(*s);
        } else {
            DistanceField f(nav, *g);
            path = f.path_to_source(*s);
        }
        if (path.empty()) return false;

        Point cur = here;
        std::vector<Point> pts;
        if (!(*s == raw.cell_of(here))) {
            cur = nav.center(*s);
            pts.push_back(cur);
        }
        std::size_t i = 0;
        while (i + 1 < path.size()) {
            std::size_t j = i + 1;
            while (j + 1 < path.size() && line_of_sight(nav, cur, nav.center(path[j + 1]))) ++j;
            cur = nav.center(path[j]);
            pts.push_back(cur);
            i = j;
        }
        if (nav.is_free(raw.cell_of(goal)) && (pts.empty() || line_of_sight(nav, pts.back(), goal)))
            pts.push_back(goal);
        if (pts.empty()) pts.push_back(nav.center(*g));

        Point prev = here;
        for (const Point& p : pts) {
            const double d = distance(prev, p);
            const int pieces = std::max(1, static_cast<int>(std::ceil(d / cfg_.max_segment)));
            for (int k = 1; k <= pieces; ++k) {
                const double t = static_cast<double>(k) / pieces;
                waypoints_.push_back({prev.x + (p.x - prev.x) * t, prev.y + (p.y - prev.y) * t});
            }
            prev = p;
        }
        active_ = true;
        return true;
    }

    const SceneContext& ctx_;
    const AgentConfig& cfg_;
    std::vector<Point> waypoints_;
    std::size_t idx_ = 0;
    Point goal_;
    std::optional<RoomId> goal_room_;
    bool active_ = false;
};

std::optional<EmergencyKind> positive_kind(const DetectorVerdict& v) {
    return v.emergency ? v.kind : std::nullopt;
}

// Listens until an emergency trigger is heard, declaring if the detector fires meanwhile.
// Returns the trigger observation and its kind, or nullopt when the episode ended.
std::optional<std::pair<AudioObservation, EmergencyKind>> wait_for_trigger(Runner& run, const AgentConfig& cfg) {
    while (!run.done()) {
        if (auto k = positive_kind(run.last_verdict())) {
            run.act(Action::declare(*k));
            return std::nullopt;
        }
        const StepRecord& rec = run.act(Action::listen());
        if (rec.observation) {
            if (auto kind = is_emergency_trigger(rec.observation->label, cfg.inference.triggers))
                return std::make_pair(*rec.observation, *kind);
        }
    }
    return std::nullopt;
}

// Guards the policy loops against iterations that take no action.
struct ProgressGuard {
    int idle = 0;
    void acted() { idle = 0; }
    void idle_iteration() {
        if (++idle > 64) throw std::logic_error("policy made no progress");
    }
};

}  // namespace

Trace ours_policy(const EpisodeSpec& episode, const SceneContext& ctx, const SceneGraph& graph_in,
                  const AgentConfig& cfg) {
    Runner run(episode, ctx, cfg, "ours");
    const Floorplan& plan = ctx.plan();
    const std::size_t n = plan.room_count();
    SceneGraph graph = graph_in;
    InferenceConfig icfg = cfg.inference;

    auto trig = wait_for_trigger(run, cfg);
    if (!trig) return run.finish();
    const EmergencyKind kind = trig->second;
    EmergencyBelief belief(n);
    belief.on_trigger(kind);

    RoomPosterior posterior = reobserve(init_prior(n), trig->first, graph, plan, run.pose(), icfg, &ctx.routes);
    run.note_posterior(posterior);

    std::set<RoomId> cleared;
    Navigator nav(ctx, cfg);
    RoomId target = select_target(posterior, run.pose(), plan, cleared, &ctx.routes);
    nav.plan_to_room(run.pose(), target);
    int since_listen = 0;
    bool sound_active = true;
    int scan_left = 0;
    ProgressGuard guard;

    auto retarget = [&]() {
        target = select_target(posterior, run.pose(), plan, cleared, &ctx.routes);
        nav.plan_to_room(run.pose(), target);
    };
    auto finish_room = [&]() {
        posterior = clear_room(posterior, target, icfg.clear_factor);
        run.note_posterior(posterior);
        cleared.insert(target);
        if (grounding_of(kind, icfg.triggers) == Grounding::AgentGrounded)
            apply_agent_observation(graph.agent(kHumanAgent), target, false, icfg.clear_factor);
        return belief.on_room_cleared(target);
    };

    while (!run.done()) {
        if (auto k = positive_kind(run.last_verdict())) {
            run.act(Action::declare(*k));
            break;
        }
        if (scan_left > 0) {
            run.act(Action::turn_left());
            ++since_listen;
            if (--scan_left == 0) {
                if (finish_room()) {
                    if (!run.done() && !positive_kind(run.last_verdict())) run.act(Action::stop());
                    continue;
                }
                retarget();
            }
            guard.acted();
            continue;
        }
        if (sound_active && since_listen >= cfg.relisten_interval) {
            const StepRecord& rec = run.act(Action::listen());
            since_listen = 0;
            guard.acted();
            if (rec.observation) {
                if (is_emergency_trigger(rec.observation->label, icfg.triggers)) {
                    posterior = reobserve(posterior, *rec.observation, graph, plan, run.pose(), icfg, &ctx.routes);
                    run.note_posterior(posterior);
                    RoomId best = select_target(posterior, run.pose(), plan, cleared, &ctx.routes);
                    if (!(best == target)) retarget();
                }
            } else if (!cfg.relisten_after_silence) {
                sound_active = false;
            }
            continue;
        }
        std::optional<Action> a = nav.next(run.pose());
        if (!a) {
            if (!nav.active() && room_of(plan.rooms(), run.pose().position()) == target) {
                scan_left = cfg.scan_turns;
            } else if (!nav.plan_to_room(run.pose(), target)) {
                // Unreachable on the inflated grid: give up on the room.
                if (finish_room()) {
                    run.act(Action::stop());
                    break;
                }
                retarget();
            }
            guard.idle_iteration();
            continue;
        }
        const StepRecord& rec = run.act(*a);
        ++since_listen;
        guard.acted();
        if (rec.collision) nav.replan(run.pose());
    }
    return run.finish();
}

Trace ours_policy(const EpisodeSpec& episode, const SceneGraph& graph, const AgentConfig& config) {
    auto ctx = SceneCache::global().get(episode.scene_seed, episode.floorplan_params, config.nav_inflation_cells);
    return ours_policy(episode, *ctx, graph, config);
}

namespace {

// Point `overshoot` meters past the portal midpoint on the side of room `into`.
std::optional<Point> beyond_portal(const Floorplan& plan, const Portal& p, RoomId into, double overshoot) {
    const bool vertical = p.cells.size() < 2 || p.cells.front().col == p.cells.back().col;
    const Point m = p.midpoint;
    for (double sgn : {1.0, -1.0}) {
        Point q = vertical ? Point{m.x + sgn * overshoot, m.y} : Point{m.x, m.y + sgn * overshoot};
        const OccupancyGrid& g = plan.grid();
        if (!g.contains(q) || g.occupied(g.cell_of(q))) continue;
        if (plan.rooms().at(g.cell_of(q)) == into) return q;
    }
    return std::nullopt;
}

}  // namespace

Trace df_policy(const EpisodeSpec& episode, const SceneContext& ctx, const AgentConfig& cfg) {
    Runner run(episode, ctx, cfg, "df");
    const Floorplan& plan = ctx.plan();
    const OccupancyGrid& grid = plan.grid();
    const std::size_t n = plan.room_count();

    auto trig = wait_for_trigger(run, cfg);
    if (!trig) return run.finish();
    double bearing = trig->first.bearing;

    enum class Mode { Follow, Cross, Explore };
    Mode mode = Mode::Follow;
    Navigator nav(ctx, cfg);
    std::set<RoomId> visited;
    std::optional<RoomId> explore_target;
    int since_listen = 0;
    bool sound_active = true;
    int scan_left = 0;
    ProgressGuard guard;

    auto begin_explore = [&]() {
        mode = Mode::Explore;
        explore_target.reset();
        nav.clear();
    };

    while (!run.done()) {
        if (auto k = positive_kind(run.last_verdict())) {
            run.act(Action::declare(*k));
            break;
        }
        if (scan_left > 0) {
            run.act(Action::turn_left());
            ++since_listen;
            guard.acted();
            if (--scan_left == 0 && explore_target) {
                visited.insert(*explore_target);
                explore_target.reset();
            }
            continue;
        }
        if (sound_active && since_listen >= cfg.relisten_interval) {
            const StepRecord& rec = run.act(Action::listen());
            since_listen = 0;
            guard.acted();
            if (rec.observation) {
                if (is_emergency_trigger(rec.observation->label, cfg.inference.triggers)) {
                    bearing = rec.observation->bearing;
                    mode = Mode::Follow;
                    nav.clear();
                }
            } else if (!cfg.relisten_after_silence) {
                sound_active = false;
            }
            continue;
        }

        if (mode == Mode::Follow) {
            const Pose& pose = run.pose();
            const double err = angle_diff(bearing, pose.heading);
            if (std::abs(err) > cfg.heading_tolerance) {
                run.act(err > 0 ? Action::turn_left() : Action::turn_right());
                ++since_listen;
                guard.acted();
                continue;
            }
            StepOutcome probe = step(plan, pose, Action::forward());
            const bool near_wall = probe.collision || ctx.nav_grid.occupied(grid.cell_of(probe.pose.position()));
            if (!near_wall) {
                run.act(Action::forward());
                ++since_listen;
                guard.acted();
                continue;
            }
            // Blocked: take the doorway of this room that best matches the bearing.
            const Point here = pose.position();
            const RoomId room = room_of(plan.rooms(), here);
            std::optional<Point> goal;
            double best_dev = std::numeric_limits<double>::infinity();
            double best_dist = std::numeric_limits<double>::infinity();
            for (int pid : plan.portals_of(room)) {
                const Portal& p = plan.portals()[pid];
                auto q = beyond_portal(plan, p, p.other(room), cfg.portal_overshoot);
                if (!q) continue;
                const double dev = std::abs(angle_diff(bearing_between(here, p.midpoint), bearing));
                const double d = distance(here, p.midpoint);
                if (dev < best_dev - 1e-9 || (std::abs(dev - best_dev) <= 1e-9 && d < best_dist)) {
                    best_dev = dev;
                    best_dist = d;
                    goal = q;
                }
            }
            if (goal && nav.plan_to_point(pose, *goal)) {
                mode = Mode::Cross;
            } else {
                begin_explore();
            }
            guard.idle_iteration();
            continue;
        }

        if (mode == Mode::Cross) {
            std::optional<Action> a = nav.next(run.pose());
            if (!a) {
                if (sound_active) {
                    since_listen = cfg.relisten_interval;
                    mode = Mode::Follow;
                } else {
                    begin_explore();
                }
                guard.idle_iteration();
                continue;
            }
            const StepRecord& rec = run.act(*a);
            ++since_listen;
            guard.acted();
            if (rec.collision) nav.replan(run.pose());
            continue;
        }

        // Explore: nearest room not yet scanned.
        if (!explore_target) {
            if (visited.size() >= n) {
                run.act(Action::stop());
                break;
            }
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                RoomId r{static_cast<int>(i)};
                if (visited.count(r)) continue;
                const double d = ctx.routes.distance(run.pose().position(), r);
                if (!explore_target || d < best) {
                    best = d;
                    explore_target = r;
                }
            }
            if (!nav.plan_to_room(run.pose(), *explore_target)) {
                visited.insert(*explore_target);
                explore_target.reset();
            }
            guard.idle_iteration();
            continue;
        }
        std::optional<Action> a = nav.next(run.pose());
        if (!a) {
            if (room_of(plan.rooms(), run.pose().position()) == *explore_target) {
                scan_left = cfg.scan_turns;
            } else if (!nav.plan_to_room(run.pose(), *explore_target)) {
                visited.insert(*explore_target);
                explore_target.reset();
            }
            guard.idle_iteration();
            continue;
        }
        const StepRecord& rec = run.act(*a);
        ++since_listen;
        guard.acted();
        if (rec.collision) nav.replan(run.pose());
    }
    return run.finish();
}

Trace df_policy(const EpisodeSpec& episode, const AgentConfig& config) {
    auto ctx = SceneCache::global().get(episode.scene_seed, episode.floorplan_params, config.nav_inflation_cells);
    return df_policy(episode, *ctx, config);
}

}  // namespace emsim
