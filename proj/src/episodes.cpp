#include "emsim/episodes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace emsim {

namespace {

constexpr double kHourTolerance = 1e-9;

double uniform01(std::mt19937_64& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

std::size_t pick_index(std::mt19937_64& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::size_t sample_categorical(std::span<const double> p, std::mt19937_64& rng) {
    double u = uniform01(rng);
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        acc += p[i];
        last = i;
        if (u < acc) return i;
    }
    return last;
}

double random_heading(std::mt19937_64& rng) { return 15.0 * static_cast<double>(pick_index(rng, 24)); }

struct FurnitureSpec {
    std::vector<std::string> always;
    std::vector<std::string> optional;
    int optional_min;
    int optional_max;
};

const std::map<RoomLabel, FurnitureSpec>& furniture() {
    static const std::map<RoomLabel, FurnitureSpec> table = {
        {RoomLabel::Kitchen, {{"stove"}, {"toaster", "skillet", "microwave", "refrigerator", "sink"}, 2, 4}},
        {RoomLabel::LivingRoom, {{"sofa"}, {"television", "lamp", "fireplace", "candle", "rug"}, 1, 3}},
        {RoomLabel::Bedroom, {{"bed"}, {"dresser", "lamp", "space_heater", "rug"}, 1, 2}},
        {RoomLabel::Office, {{"desk"}, {"computer", "power_strip", "lamp", "bookshelf"}, 1, 3}},
        {RoomLabel::Bathroom, {{"toilet"}, {"bathtub", "hair_dryer", "sink"}, 1, 2}},
        {RoomLabel::Hallway, {{"coat_rack"}, {"rug", "bookshelf", "lamp"}, 0, 2}},
        {RoomLabel::DiningRoom, {{"dining_table"}, {"chair", "candle"}, 1, 2}},
    };
    return table;
}

// Interior, non-portal cells of `room` that are free in `clear`.
std::vector<Cell> clear_cells(const Floorplan& plan, const OccupancyGrid& clear, std::optional<RoomId> room) {
    std::vector<Cell> out;
    const OccupancyGrid& grid = plan.grid();
    for (std::size_t i = 0; i < grid.cell_count(); ++i) {
        Cell c = grid.cell_at(i);
        if (clear.occupied(c) || plan.portal_at(c) >= 0) continue;
        RoomId r = plan.rooms().at(c);
        if (!r.valid() || (room && r != *room)) continue;
        out.push_back(c);
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Schedule
// ---------------------------------------------------------------------------

ActivitySchedule::ActivitySchedule(std::vector<ScheduleEntry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw ConfigError("schedule has no entries");
    std::sort(entries_.begin(), entries_.end(),
              [](const ScheduleEntry& a, const ScheduleEntry& b) { return a.start_hour < b.start_hour; });
    double cursor = 0.0;
    for (const ScheduleEntry& e : entries_) {
        if (std::abs(e.start_hour - cursor) > kHourTolerance) throw ConfigError("schedule entries must tile 0-24h");
        if (!(e.end_hour > e.start_hour)) throw ConfigError("schedule entry with empty time range");
        double s = 0.0;
        for (const auto& [label, p] : e.rooms) {
            if (p < 0.0) throw ConfigError("negative room probability in schedule");
            s += p;
        }
        if (std::abs(s - 1.0) > kNormTolerance) throw ConfigError("schedule room distribution must sum to 1");
        cursor = e.end_hour;
    }
    if (std::abs(cursor - 24.0) > kHourTolerance) throw ConfigError("schedule entries must tile 0-24h");
}

const ActivitySchedule& ActivitySchedule::default_schedule() {
    using L = RoomLabel;
    static const ActivitySchedule schedule({
        {0, 7, "sleeping", {{L::Bedroom, 1.0}}},
        {7, 8, "morning_routine", {{L::Bathroom, 0.7}, {L::Bedroom, 0.3}}},
        {8, 9, "breakfast", {{L::Kitchen, 0.6}, {L::DiningRoom, 0.4}}},
        {9, 12, "working", {{L::Office, 0.8}, {L::LivingRoom, 0.2}}},
        {12, 13, "lunch", {{L::Kitchen, 0.5}, {L::DiningRoom, 0.5}}},
        {13, 17, "leisure", {{L::LivingRoom, 0.6}, {L::Office, 0.2}, {L::Bedroom, 0.2}}},
        {17, 19, "cooking_dinner", {{L::Kitchen, 1.0}}},
        {19, 20, "eating_dinner", {{L::DiningRoom, 0.7}, {L::Kitchen, 0.3}}},
        {20, 22, "watching_tv", {{L::LivingRoom, 0.9}, {L::Bathroom, 0.1}}},
        {22, 24, "bedtime", {{L::Bedroom, 0.8}, {L::Bathroom, 0.2}}},
    });
    return schedule;
}

const ScheduleEntry& ActivitySchedule::at(double hour) const {
    for (const ScheduleEntry& e : entries_)
        if (hour >= e.start_hour && hour < e.end_hour) return e;
    throw ConfigError("no schedule entry covers the requested time");
}

RoomLabel sample_human_room(const ActivitySchedule& schedule, double hour, std::mt19937_64& rng) {
    const ScheduleEntry& e = schedule.at(hour);
    std::vector<RoomLabel> labels;
    std::vector<double> p;
    for (const auto& [label, prob] : e.rooms) {
        labels.push_back(label);
        p.push_back(prob);
    }
    return labels[sample_categorical(p, rng)];
}

RoomDistribution entry_room_distribution(const ScheduleEntry& entry, const Floorplan& plan) {
    const std::size_t n = plan.room_count();
    std::map<RoomLabel, std::vector<RoomId>> by_label;
    for (const RoomInfo& info : plan.rooms().rooms()) by_label[info.label].push_back(info.id);
    std::vector<double> mass(n, 0.0);
    double total = 0.0;
    for (const auto& [label, p] : entry.rooms) {
        auto it = by_label.find(label);
        if (it == by_label.end() || p <= 0.0) continue;
        for (RoomId r : it->second) mass[r.index()] += p / static_cast<double>(it->second.size());
        total += p;
    }
    if (!(total > 0.0)) return RoomDistribution::uniform(n);
    return RoomDistribution::normalized(std::move(mass));
}

RoomDistribution schedule_occupancy(const ActivitySchedule& schedule, const Floorplan& plan) {
    std::vector<double> mass(plan.room_count(), 0.0);
    for (const ScheduleEntry& e : schedule.entries()) {
        RoomDistribution d = entry_room_distribution(e, plan);
        const double hours = e.end_hour - e.start_hour;
        for (std::size_t i = 0; i < mass.size(); ++i) mass[i] += hours * d.vec()[i];
    }
    return RoomDistribution::normalized(std::move(mass));
}

Heatmap add_heatmap_noise(const RoomDistribution& base, double sigma, std::mt19937_64& rng) {
    if (!(sigma >= 0.0)) throw ConfigError("heatmap sigma must be >= 0");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v = base.vec();
    double total = 0.0;
    for (double& x : v) {
        x = std::max(0.0, x + sigma * normal(rng));
        total += x;
    }
    Heatmap h;
    h.sigma_applied = sigma;
    h.values = total > 0.0 ? RoomDistribution::normalized(std::move(v)) : RoomDistribution::uniform(v.size());
    return h;
}

Heatmap make_heatmap(const ActivitySchedule& schedule, const Floorplan& plan, double sigma, std::mt19937_64& rng) {
    return add_heatmap_noise(schedule_occupancy(schedule, plan), sigma, rng);
}

// ---------------------------------------------------------------------------
// Scenes
// ---------------------------------------------------------------------------

Scene generate_scene(std::uint64_t seed, const GenerationParams& params) {
    Scene scene;
    scene.seed = seed;
    scene.plan = generate_floorplan(seed, params);
    std::mt19937_64 rng(mix_seed(seed, 1));
    const OccupancyGrid clear = scene.plan.grid().inflated(3);
    for (const RoomInfo& info : scene.plan.rooms().rooms()) {
        const FurnitureSpec& spec = furniture().at(info.label);
        std::vector<std::string> labels = spec.always;
        std::vector<std::string> optional = spec.optional;
        std::shuffle(optional.begin(), optional.end(), rng);
        const int k = std::uniform_int_distribution<int>(spec.optional_min, spec.optional_max)(rng);
        for (int i = 0; i < k && i < static_cast<int>(optional.size()); ++i) labels.push_back(optional[i]);

        std::vector<Cell> cells = clear_cells(scene.plan, clear, info.id);
        if (cells.empty()) cells = clear_cells(scene.plan, scene.plan.grid(), info.id);
        std::vector<Point> placed;
        for (const std::string& label : labels) {
            Point pos = scene.plan.grid().center(cells[pick_index(rng, cells.size())]);
            for (int tries = 0; tries < 32; ++tries) {
                bool crowded = false;
                for (Point q : placed) crowded |= distance(pos, q) < 0.6;
                if (!crowded) break;
                pos = scene.plan.grid().center(cells[pick_index(rng, cells.size())]);
            }
            placed.push_back(pos);
            scene.objects.push_back({static_cast<int>(scene.objects.size()), label, pos});
        }
    }
    return scene;
}

// ---------------------------------------------------------------------------
// Episodes
// ---------------------------------------------------------------------------

std::string to_string(Polarity p) { return p == Polarity::Positive ? "positive" : "negative"; }

Polarity polarity_from_string(const std::string& s) {
    if (s == "positive") return Polarity::Positive;
    if (s == "negative") return Polarity::Negative;
    throw ConfigError("unknown polarity: " + s);
}

EpisodeSpec generate_episode_in(const Scene& scene, std::uint64_t seed, EmergencyKind cls, Polarity polarity,
                                const EpisodeParams& params, const std::string& id) {
    std::mt19937_64 rng(mix_seed(seed, 2));
    const Floorplan& plan = scene.plan;
    const OccupancyGrid& grid = plan.grid();
    const OccupancyGrid clear = grid.inflated(params.clearance_cells);

    EpisodeSpec ep;
    ep.id = id.empty() ? "episode-" + std::to_string(seed) : id;
    ep.seed = seed;
    ep.scene_seed = scene.seed;
    ep.floorplan_params = params.floorplan;
    ep.cls = cls;
    ep.polarity = polarity;
    ep.step_budget = params.step_budget;
    ep.time_of_day = std::uniform_real_distribution<double>(0.0, 24.0)(rng);
    ep.activity = params.schedule.at(ep.time_of_day).activity;

    GroundTruth& truth = ep.truth;
    truth.emergency = polarity == Polarity::Positive;
    if (cls == EmergencyKind::Fall && polarity == Polarity::Positive) {
        RoomDistribution where = entry_room_distribution(params.schedule.at(ep.time_of_day), plan);
        RoomId room{static_cast<int>(sample_categorical(where.values(), rng))};
        std::vector<Cell> cells = clear_cells(plan, clear, room);
        if (cells.empty()) throw GenerationError("no free cell for the human");
        truth.source = grid.center(cells[pick_index(rng, cells.size())]);
        truth.human = Pose{truth.source.x, truth.source.y, random_heading(rng)};
        truth.source_entity = "fallen_human";
    } else if (cls == EmergencyKind::Fire && polarity == Polarity::Positive) {
        std::vector<const PlacedObject*> sources;
        const TraitTable& traits = default_trait_table();
        for (const PlacedObject& o : scene.objects) {
            auto it = traits.find(o.label);
            if (it == traits.end()) continue;
            auto f = it->second.find(kFireCause);
            if (f != it->second.end() && f->second > params.fire_source_threshold) sources.push_back(&o);
        }
        if (sources.empty()) throw GenerationError("scene has no plausible fire source");
        const PlacedObject& src = *sources[pick_index(rng, sources.size())];
        truth.source = src.position;
        truth.source_entity = src.label;
        truth.source_object = src.id;
    } else {
        std::vector<Cell> cells = clear_cells(plan, clear, std::nullopt);
        if (cells.empty()) throw GenerationError("no free cell for the distractor");
        truth.source = grid.center(cells[pick_index(rng, cells.size())]);
        if (cls == EmergencyKind::Fall)
            truth.source_entity = pick_index(rng, 2) == 0 ? "box" : "suitcase";
        else
            truth.source_entity = "alarm";
    }
    truth.source_room = room_of(plan.rooms(), truth.source);

    // Audio.
    if (cls == EmergencyKind::Fall) {
        Periodicity per = params.periodic_falls ? Periodicity::Periodic : Periodicity::Aperiodic;
        ep.audio = make_audio_event(truth.source, AudioClass::Thud, per, params.step_budget, params.emission_interval);
    } else {
        static constexpr Periodicity kFirePeriodicity[] = {Periodicity::Periodic, Periodicity::Aperiodic,
                                                           Periodicity::Semiperiodic};
        Periodicity per = kFirePeriodicity[pick_index(rng, 3)];
        const int quarter = params.step_budget / 4;
        const int cutoff = std::uniform_int_distribution<int>(quarter, params.step_budget - quarter)(rng);
        ep.audio = make_audio_event(truth.source, AudioClass::SmokeAlarm, per, params.step_budget,
                                    params.emission_interval, per == Periodicity::Semiperiodic ? cutoff : -1);
    }

    // Spawn: clear of walls, outside the source room, and not already seeing the source.
    std::vector<Cell> spawn_cells;
    for (Cell c : clear_cells(plan, clear, std::nullopt)) {
        Point p = grid.center(c);
        if (params.exclude_source_room_spawn && plan.rooms().at(c) == truth.source_room) continue;
        if (distance(p, truth.source) <= params.spawn_hidden_range && line_of_sight(grid, p, truth.source)) continue;
        spawn_cells.push_back(c);
    }
    if (spawn_cells.empty()) throw GenerationError("no valid spawn cell");
    Point spawn = grid.center(spawn_cells[pick_index(rng, spawn_cells.size())]);
    ep.spawn = Pose{spawn.x, spawn.y, random_heading(rng)};

    ep.heatmap = make_heatmap(params.schedule, plan, params.heatmap_sigma, rng);
    return ep;
}

EpisodeSpec generate_episode(std::uint64_t seed, EmergencyKind cls, Polarity polarity, const EpisodeParams& params,
                             const std::string& id) {
    if (params.scene_count < 1) throw ConfigError("scene_count must be >= 1");
    std::mt19937_64 rng(mix_seed(seed, 0));
    const std::uint64_t scene_seed =
        params.scene_base_seed + std::uniform_int_distribution<int>(0, params.scene_count - 1)(rng);
    Scene scene = generate_scene(scene_seed, params.floorplan);
    return generate_episode_in(scene, seed, cls, polarity, params, id);
}

std::vector<EpisodeSpec> generate_batch(const BatchRequest& request, const EpisodeParams& params) {
    if (request.count < 0) throw ConfigError("count must be >= 0");
    if (!(request.positive_fraction >= 0.0 && request.positive_fraction <= 1.0))
        throw ConfigError("positive fraction outside [0,1]");
    std::vector<EpisodeSpec> out;
    out.reserve(request.count);
    int per_class[2] = {0, 0};
    for (int i = 0; i < request.count; ++i) {
        EmergencyKind cls = request.cls ? *request.cls : (i % 2 == 0 ? EmergencyKind::Fall : EmergencyKind::Fire);
        int& k = per_class[cls == EmergencyKind::Fall ? 0 : 1];
        // Spread positives evenly through each class's sequence.
        const double f = request.positive_fraction;
        bool positive = std::floor((k + 1) * f + 1e-9) > std::floor(k * f + 1e-9);
        ++k;
        char id[64];
        std::snprintf(id, sizeof id, "s%llu-e%05d", static_cast<unsigned long long>(request.seed), i);
        out.push_back(generate_episode(mix_seed(request.seed, static_cast<std::uint64_t>(i)), cls,
                                       positive ? Polarity::Positive : Polarity::Negative, params, id));
    }
    return out;
}

}  // namespace emsim
