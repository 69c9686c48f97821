#include "emsim/io.hpp"

#include <fstream>
#include <sstream>

namespace emsim {

namespace {

constexpr const char* kRoomChars = "0123456789abcdefghijklmnopqrstuvwxyz";

char room_char(int id) {
    if (id < 0 || id >= 36) throw ConfigError("floorplan text format supports at most 36 rooms");
    return kRoomChars[id];
}

int room_from_char(char c) {
    if (c == '#') return -1;
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'z') return 10 + (c - 'a');
    throw ConfigError(std::string("bad floorplan cell character '") + c + "'");
}

Json point_json(Point p) { return Json::array({p.x, p.y}); }
Point point_from(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

Json pose_json(const Pose& p) { return {{"x", p.x}, {"y", p.y}, {"heading", p.heading}}; }
Pose pose_from(const Json& j) { return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("heading").get<double>()}; }

Json dist_json(const RoomDistribution& d) { return Json(d.vec()); }
RoomDistribution dist_from(const Json& j) { return RoomDistribution::normalized(j.get<std::vector<double>>()); }

// Runs a reader and maps JSON access errors onto ConfigError.
template <class F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("malformed ") + what + " document: " + e.what());
    }
}

}  // namespace

Json to_json(const GenerationParams& p) {
    return {{"min_rooms", p.min_rooms},
            {"max_rooms", p.max_rooms},
            {"min_area", p.min_area},
            {"max_area", p.max_area},
            {"resolution", p.resolution},
            {"min_room_side", p.min_room_side},
            {"max_room_diagonal", p.max_room_diagonal},
            {"door_width", p.door_width},
            {"extra_door_probability", p.extra_door_probability},
            {"max_attempts", p.max_attempts}};
}

GenerationParams generation_params_from_json(const Json& j) {
    return guarded("generation params", [&] {
        GenerationParams p;
        p.min_rooms = j.value("min_rooms", p.min_rooms);
        p.max_rooms = j.value("max_rooms", p.max_rooms);
        p.min_area = j.value("min_area", p.min_area);
        p.max_area = j.value("max_area", p.max_area);
        p.resolution = j.value("resolution", p.resolution);
        p.min_room_side = j.value("min_room_side", p.min_room_side);
        p.max_room_diagonal = j.value("max_room_diagonal", p.max_room_diagonal);
        p.door_width = j.value("door_width", p.door_width);
        p.extra_door_probability = j.value("extra_door_probability", p.extra_door_probability);
        p.max_attempts = j.value("max_attempts", p.max_attempts);
        return p;
    });
}

Json to_json(const Floorplan& plan) {
    const OccupancyGrid& g = plan.grid();
    Json rows = Json::array();
    for (int r = 0; r < g.height(); ++r) {
        std::string row(static_cast<std::size_t>(g.width()), '#');
        for (int c = 0; c < g.width(); ++c) {
            RoomId id = plan.rooms().at({c, r});
            if (id.valid()) row[static_cast<std::size_t>(c)] = room_char(id.value);
        }
        rows.push_back(row);
    }
    Json rooms = Json::array();
    for (const RoomInfo& info : plan.rooms().rooms())
        rooms.push_back({{"id", info.id.value}, {"label", to_string(info.label)}});
    Json portals = Json::array();
    for (const Portal& p : plan.portals()) {
        Json cells = Json::array();
        for (Cell c : p.cells) cells.push_back(Json::array({c.col, c.row}));
        portals.push_back({{"id", p.id}, {"a", p.a.value}, {"b", p.b.value}, {"midpoint", point_json(p.midpoint)},
                           {"cells", cells}});
    }
    return {{"width", g.width()}, {"height", g.height()}, {"resolution", g.resolution()},
            {"rows", rows},       {"rooms", rooms},       {"portals", portals}};
}

Floorplan floorplan_from_json(const Json& j) {
    return guarded("floorplan", [&] {
        const int w = j.at("width").get<int>();
        const int h = j.at("height").get<int>();
        const double res = j.at("resolution").get<double>();
        const auto& rows = j.at("rows");
        if (w <= 0 || h <= 0 || static_cast<int>(rows.size()) != h) throw ConfigError("floorplan row count mismatch");
        std::vector<std::uint8_t> occ(static_cast<std::size_t>(w) * h);
        std::vector<int> cells(occ.size());
        for (int r = 0; r < h; ++r) {
            const std::string row = rows[static_cast<std::size_t>(r)].get<std::string>();
            if (static_cast<int>(row.size()) != w) throw ConfigError("floorplan row width mismatch");
            for (int c = 0; c < w; ++c) {
                const int id = room_from_char(row[static_cast<std::size_t>(c)]);
                const std::size_t idx = static_cast<std::size_t>(r) * w + c;
                cells[idx] = id;
                occ[idx] = id < 0 ? 1 : 0;
            }
        }
        std::vector<RoomInfo> rooms;
        for (const Json& rj : j.at("rooms"))
            rooms.push_back({RoomId{rj.at("id").get<int>()}, room_label_from_string(rj.at("label").get<std::string>())});
        std::vector<Portal> portals;
        for (const Json& pj : j.at("portals")) {
            Portal p;
            p.id = pj.at("id").get<int>();
            p.a = RoomId{pj.at("a").get<int>()};
            p.b = RoomId{pj.at("b").get<int>()};
            p.midpoint = point_from(pj.at("midpoint"));
            for (const Json& cj : pj.at("cells")) p.cells.push_back({cj.at(0).get<int>(), cj.at(1).get<int>()});
            portals.push_back(std::move(p));
        }
        OccupancyGrid grid(w, h, res, std::move(occ));
        RoomMap map(w, h, res, std::move(cells), std::move(rooms));
        return Floorplan(std::move(grid), std::move(map), std::move(portals));
    });
}

Json to_json(const SceneGraph& graph) {
    Json rooms = Json::array();
    for (const RoomNode& r : graph.rooms())
        rooms.push_back({{"id", r.id.value}, {"label", to_string(r.label)}, {"centroid", point_json(r.centroid)}});
    Json places = Json::array();
    for (const PlaceNode& p : graph.places())
        places.push_back({{"id", p.id}, {"position", point_json(p.position)}, {"room", p.parent_room.value}});
    Json objects = Json::array();
    for (const StaticObjectNode& o : graph.objects()) {
        Json traits = Json::object();
        for (const auto& [k, v] : o.traits) traits[k] = v;
        objects.push_back({{"id", o.id},
                           {"label", o.label},
                           {"position", point_json(o.position)},
                           {"room", o.parent_room.value},
                           {"place", o.parent_place},
                           {"traits", traits}});
    }
    Json agents = Json::array();
    for (const AgentNode& a : graph.agents()) agents.push_back({{"id", a.id}, {"room_belief", dist_json(a.room_belief)}});
    return {{"rooms", rooms}, {"places", places}, {"objects", objects}, {"agents", agents}};
}

SceneGraph scene_graph_from_json(const Json& j) {
    return guarded("scene graph", [&] {
        std::vector<RoomNode> rooms;
        for (const Json& r : j.at("rooms"))
            rooms.push_back({RoomId{r.at("id").get<int>()}, room_label_from_string(r.at("label").get<std::string>()),
                             point_from(r.at("centroid"))});
        std::vector<PlaceNode> places;
        for (const Json& p : j.at("places"))
            places.push_back({p.at("id").get<int>(), point_from(p.at("position")), RoomId{p.at("room").get<int>()}});
        std::vector<StaticObjectNode> objects;
        for (const Json& o : j.at("objects")) {
            StaticObjectNode n;
            n.id = o.at("id").get<int>();
            n.label = o.at("label").get<std::string>();
            n.position = point_from(o.at("position"));
            n.parent_room = RoomId{o.at("room").get<int>()};
            n.parent_place = o.at("place").get<int>();
            for (const auto& [k, v] : o.at("traits").items()) n.traits[k] = v.get<double>();
            objects.push_back(std::move(n));
        }
        std::vector<AgentNode> agents;
        for (const Json& a : j.at("agents"))
            agents.push_back({a.at("id").get<std::string>(), dist_from(a.at("room_belief"))});
        return SceneGraph(std::move(rooms), std::move(places), std::move(objects), std::move(agents));
    });
}

Json to_json(const Heatmap& h) { return {{"values", dist_json(h.values)}, {"sigma_applied", h.sigma_applied}}; }

Heatmap heatmap_from_json(const Json& j) {
    return guarded("heatmap", [&] {
        return Heatmap{dist_from(j.at("values")), j.at("sigma_applied").get<double>()};
    });
}

Json to_json(const AudioEvent& e) {
    return {{"source", point_json(e.source)},       {"class", to_string(e.true_class)},
            {"periodicity", to_string(e.periodicity)}, {"emission_schedule", e.emission_schedule},
            {"interval", e.interval},               {"cutoff_step", e.cutoff_step}};
}

AudioEvent audio_event_from_json(const Json& j) {
    return guarded("audio event", [&] {
        AudioEvent e;
        e.source = point_from(j.at("source"));
        e.true_class = audio_class_from_string(j.at("class").get<std::string>());
        e.periodicity = periodicity_from_string(j.at("periodicity").get<std::string>());
        e.emission_schedule = j.at("emission_schedule").get<std::vector<int>>();
        e.interval = j.at("interval").get<int>();
        e.cutoff_step = j.at("cutoff_step").get<int>();
        if (e.interval < 1) throw ConfigError("audio interval must be >= 1");
        return e;
    });
}

Json to_json(const EpisodeSpec& ep, const Scene* scene) {
    Json truth = {{"source", point_json(ep.truth.source)},
                  {"source_room", ep.truth.source_room.value},
                  {"emergency", ep.truth.emergency},
                  {"source_entity", ep.truth.source_entity},
                  {"source_object", ep.truth.source_object}};
    truth["human"] = ep.truth.human ? pose_json(*ep.truth.human) : Json(nullptr);
    Json j = {{"id", ep.id},
              {"seed", ep.seed},
              {"scene_seed", ep.scene_seed},
              {"floorplan_params", to_json(ep.floorplan_params)},
              {"class", to_string(ep.cls)},
              {"polarity", to_string(ep.polarity)},
              {"time_of_day", ep.time_of_day},
              {"activity", ep.activity},
              {"audio", to_json(ep.audio)},
              {"truth", truth},
              {"spawn", pose_json(ep.spawn)},
              {"heatmap", to_json(ep.heatmap)},
              {"step_budget", ep.step_budget}};
    if (scene != nullptr) {
        j["floorplan"] = to_json(scene->plan);
        Json objects = Json::array();
        for (const PlacedObject& o : scene->objects)
            objects.push_back({{"id", o.id}, {"label", o.label}, {"position", point_json(o.position)}});
        j["objects"] = objects;
    }
    return j;
}

EpisodeSpec episode_from_json(const Json& j) {
    return guarded("episode", [&] {
        EpisodeSpec ep;
        ep.id = j.at("id").get<std::string>();
        ep.seed = j.at("seed").get<std::uint64_t>();
        ep.scene_seed = j.at("scene_seed").get<std::uint64_t>();
        ep.floorplan_params = generation_params_from_json(j.at("floorplan_params"));
        ep.cls = emergency_kind_from_string(j.at("class").get<std::string>());
        ep.polarity = polarity_from_string(j.at("polarity").get<std::string>());
        ep.time_of_day = j.at("time_of_day").get<double>();
        ep.activity = j.at("activity").get<std::string>();
        ep.audio = audio_event_from_json(j.at("audio"));
        const Json& t = j.at("truth");
        ep.truth.source = point_from(t.at("source"));
        ep.truth.source_room = RoomId{t.at("source_room").get<int>()};
        ep.truth.emergency = t.at("emergency").get<bool>();
        ep.truth.source_entity = t.at("source_entity").get<std::string>();
        ep.truth.source_object = t.at("source_object").get<int>();
        if (!t.at("human").is_null()) ep.truth.human = pose_from(t.at("human"));
        ep.spawn = pose_from(j.at("spawn"));
        ep.heatmap = heatmap_from_json(j.at("heatmap"));
        ep.step_budget = j.at("step_budget").get<int>();
        return ep;
    });
}

Json to_json(const Trace& t) {
    Json steps = Json::array();
    for (const StepRecord& s : t.steps) {
        Json a = {{"type", to_string(s.action.type)}};
        if (s.action.kind) a["kind"] = to_string(*s.action.kind);
        Json rec = {{"step", s.step}, {"action", a}, {"pose", pose_json(s.pose)}, {"collision", s.collision}};
        if (s.observation)
            rec["observation"] = {{"label", to_string(s.observation->label)},
                                  {"bearing", s.observation->bearing},
                                  {"step", s.observation->step}};
        if (s.posterior) rec["posterior"] = *s.posterior;
        if (s.verdict) {
            Json v = {{"emergency", s.verdict->emergency}, {"reason", to_string(s.verdict->reason)}};
            v["kind"] = s.verdict->kind ? Json(to_string(*s.verdict->kind)) : Json("none");
            rec["verdict"] = v;
        }
        steps.push_back(std::move(rec));
    }
    return {{"episode_id", t.episode_id},
            {"policy", t.policy},
            {"spawn", pose_json(t.spawn)},
            {"path_length", t.path_length},
            {"forward_moves", t.forward_moves},
            {"collisions", t.collisions},
            {"steps_used", t.steps_used},
            {"outcome", t.outcome ? to_string(*t.outcome) : std::string("none")},
            {"termination", to_string(t.termination)},
            {"steps", steps}};
}

Trace trace_from_json(const Json& j) {
    return guarded("trace", [&] {
        Trace t;
        t.episode_id = j.at("episode_id").get<std::string>();
        t.policy = j.at("policy").get<std::string>();
        t.spawn = pose_from(j.at("spawn"));
        t.path_length = j.at("path_length").get<double>();
        t.forward_moves = j.at("forward_moves").get<int>();
        t.collisions = j.at("collisions").get<int>();
        t.steps_used = j.at("steps_used").get<int>();
        const std::string outcome = j.at("outcome").get<std::string>();
        if (outcome != "none") t.outcome = emergency_kind_from_string(outcome);
        t.termination = termination_from_string(j.at("termination").get<std::string>());
        for (const Json& s : j.at("steps")) {
            StepRecord r;
            r.step = s.at("step").get<int>();
            r.action.type = action_type_from_string(s.at("action").at("type").get<std::string>());
            if (s.at("action").contains("kind"))
                r.action.kind = emergency_kind_from_string(s.at("action").at("kind").get<std::string>());
            r.pose = pose_from(s.at("pose"));
            r.collision = s.at("collision").get<bool>();
            if (s.contains("observation")) {
                const Json& o = s.at("observation");
                r.observation = AudioObservation{audio_class_from_string(o.at("label").get<std::string>()),
                                                 o.at("bearing").get<double>(), o.at("step").get<int>()};
            }
            if (s.contains("posterior")) r.posterior = s.at("posterior").get<std::vector<double>>();
            if (s.contains("verdict")) {
                const Json& v = s.at("verdict");
                DetectorVerdict d;
                d.emergency = v.at("emergency").get<bool>();
                d.reason = verdict_reason_from_string(v.at("reason").get<std::string>());
                const std::string k = v.at("kind").get<std::string>();
                if (k != "none") d.kind = emergency_kind_from_string(k);
                r.verdict = d;
            }
            t.steps.push_back(std::move(r));
        }
        return t;
    });
}

AgentConfig agent_config_from_json(const Json& j, AgentConfig c) {
    return guarded("agent config", [&] {
        if (j.contains("detector")) c.detector = parse_detector_profile(j.at("detector").get<std::string>());
        c.step_budget = j.value("step_budget", c.step_budget);
        c.unlimited_budget = j.value("unlimited_budget", c.unlimited_budget);
        c.relisten_interval = j.value("relisten_interval", c.relisten_interval);
        c.scan_turns = j.value("scan_turns", c.scan_turns);
        if (j.contains("collision_policy")) {
            const std::string p = j.at("collision_policy").get<std::string>();
            if (p == "continue") {
                c.collision_policy = CollisionPolicy::Continue;
            } else if (p == "abort") {
                c.collision_policy = CollisionPolicy::Abort;
            } else {
                throw ConfigError("collision_policy must be continue or abort");
            }
        }
        c.inference.direction_threshold_deg = j.value("direction_threshold", c.inference.direction_threshold_deg);
        c.label_error = j.value("label_error", c.label_error);
        c.acoustics.bearing_noise_deg = j.value("bearing_noise_deg", c.acoustics.bearing_noise_deg);
        c.nav_inflation_cells = j.value("nav_inflation_cells", c.nav_inflation_cells);
        if (c.relisten_interval < 1) throw ConfigError("relisten_interval must be >= 1");
        if (c.scan_turns < 0) throw ConfigError("scan_turns must be >= 0");
        return c;
    });
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw IoError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_text_file(path, j.dump(1) + "\n"); }

Manifest read_manifest(const std::filesystem::path& path) {
    Json j = read_json_file(path);
    Manifest m;
    m.base_dir = path.parent_path();
    try {
        m.episodes = j.at("episodes").get<std::vector<std::string>>();
    } catch (const Json::exception& e) {
        throw IoError("manifest " + path.string() + " lacks an episode list");
    }
    return m;
}

void write_manifest(const std::filesystem::path& path, const std::vector<std::string>& episode_files) {
    write_json_file(path, Json{{"episodes", episode_files}});
}

}  // namespace emsim
