#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "emsim/agent.hpp"
#include "emsim/episodes.hpp"
#include "emsim/scenegraph.hpp"
#include "emsim/world.hpp"

namespace emsim {

using Json = nlohmann::json;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Field layouts are documented in docs/formats.md. All readers throw ConfigError on
// structurally invalid documents.

Json to_json(const GenerationParams& p);
GenerationParams generation_params_from_json(const Json& j);

// Rows are strings, row 0 first; '#' marks a wall, '0'-'9' then 'a'-'z' a room id.
Json to_json(const Floorplan& plan);
Floorplan floorplan_from_json(const Json& j);

Json to_json(const SceneGraph& graph);
SceneGraph scene_graph_from_json(const Json& j);

Json to_json(const Heatmap& h);
Heatmap heatmap_from_json(const Json& j);

Json to_json(const AudioEvent& e);
AudioEvent audio_event_from_json(const Json& j);

// `plan` and `objects`, when given, are embedded so the document is self-contained.
Json to_json(const EpisodeSpec& ep, const Scene* scene = nullptr);
EpisodeSpec episode_from_json(const Json& j);

Json to_json(const Trace& t);
Trace trace_from_json(const Json& j);

// Overrides fields of `base` present in `j`: detector, step_budget, unlimited_budget,
// relisten_interval, scan_turns, collision_policy, direction_threshold, label_error,
// bearing_noise_deg, nav_inflation_cells.
AgentConfig agent_config_from_json(const Json& j, AgentConfig base = {});

// Manifest: {"episodes": [relative paths]}. Paths resolve against the manifest's directory.
struct Manifest {
    std::filesystem::path base_dir;
    std::vector<std::string> episodes;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<std::string>& episode_files);

// Throws IoError when the file cannot be read/written or is not valid JSON.
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace emsim
