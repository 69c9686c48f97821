// emsim command line: generate episode batches, run policies, ablate, render traces.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"

#include "emsim/eval.hpp"
#include "emsim/io.hpp"

namespace fs = std::filesystem;
using namespace emsim;

namespace {

// Defaults come from the file named by --config, else $EMSIM_CONFIG, else built-ins.
struct Settings {
    std::string config_path;
    std::string detector;
    std::string policy = "ours";
    int jobs = 1;
    bool save_traces = false;
};

AgentConfig load_agent_config(const Settings& s, int& jobs) {
    AgentConfig cfg;
    std::string path = s.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("EMSIM_CONFIG")) path = env;
    }
    if (!path.empty()) {
        Json j = read_json_file(path);
        cfg = agent_config_from_json(j, cfg);
        if (jobs <= 0) jobs = j.value("jobs", 1);
    }
    if (!s.detector.empty()) cfg.detector = parse_detector_profile(s.detector);
    if (jobs <= 0) jobs = 1;
    return cfg;
}

void write_outputs(const fs::path& out, const BatchResult& r, const std::vector<EpisodeSpec>* episodes) {
    fs::create_directories(out);
    write_text_file(out / "results.csv", results_csv(r.records));
    write_text_file(out / "metrics.json", metrics_summary(r.metrics));
    std::string lines;
    for (const EpisodeResult& rec : r.records) {
        Json j = {{"episode_id", rec.episode_id}, {"policy", rec.policy}};
        if (!rec.ok()) {
            j["error"] = rec.error;
        } else {
            j["class"] = to_string(rec.cls);
            j["polarity"] = to_string(rec.polarity);
            j["ag_success"] = rec.ag_success;
            j["pl"] = rec.pl;
            j["opl"] = rec.opl;
            j["spl"] = rec.spl;
            j["outcome"] = rec.outcome ? to_string(*rec.outcome) : "none";
            j["steps"] = rec.steps;
            j["collisions"] = rec.collisions;
            j["termination"] = to_string(rec.termination);
        }
        lines += j.dump() + "\n";
    }
    write_text_file(out / "records.jsonl", lines);
    if (episodes != nullptr && !r.traces.empty()) {
        fs::create_directories(out / "traces");
        std::map<std::string, const EpisodeSpec*> by_id;
        for (const EpisodeSpec& e : *episodes) by_id[e.id] = &e;
        for (std::size_t i = 0; i < r.records.size(); ++i) {
            if (!r.records[i].ok()) continue;
            auto it = by_id.find(r.records[i].episode_id);
            if (it == by_id.end()) continue;
            write_json_file(out / "traces" / (r.records[i].episode_id + ".json"),
                            Json{{"episode", to_json(*it->second)}, {"trace", to_json(r.traces[i])}});
        }
    }
}

std::vector<EpisodeSpec> load_manifest_episodes(const fs::path& manifest) {
    Manifest m = read_manifest(manifest);
    std::vector<EpisodeSpec> eps;
    for (const std::string& f : m.episodes) {
        try {
            eps.push_back(episode_from_json(read_json_file(m.base_dir / f)));
        } catch (const std::exception&) {
            // Reported by run_batch as an error record.
        }
    }
    return eps;
}

int report(const BatchResult& r) {
    std::printf("episodes=%d errors=%d ag_sr=%.4f ag_spl=%.4f edfnr=%.4f edfpr=%.4f\n", r.metrics.n_episodes,
                r.metrics.n_errors, r.metrics.ag_sr, r.metrics.ag_spl, r.metrics.edfnr, r.metrics.edfpr);
    for (const EpisodeResult& rec : r.records)
        if (!rec.ok()) std::fprintf(stderr, "error: %s: %s\n", rec.episode_id.c_str(), rec.error.c_str());
    return r.metrics.n_episodes == 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Household emergency search simulator"};
    app.require_subcommand(1);
    Settings settings;
    app.add_option("--config", settings.config_path, "JSON agent config (default: $EMSIM_CONFIG)");

    // generate
    auto* gen = app.add_subcommand("generate", "Generate an episode batch and its manifest");
    std::uint64_t seed = 1;
    int count = 128;
    std::string cls = "mixed";
    double polarity_mix = 0.5;
    double sigma = 0.05;
    std::string out_dir = "episodes";
    gen->add_option("--seed", seed, "Batch seed");
    gen->add_option("--count", count, "Number of episodes")->check(CLI::NonNegativeNumber);
    gen->add_option("--class", cls, "fall | fire | mixed")->check(CLI::IsMember({"fall", "fire", "mixed"}));
    gen->add_option("--polarity-mix", polarity_mix, "Fraction of positive episodes")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--sigma", sigma, "Heatmap noise sigma")->check(CLI::NonNegativeNumber);
    gen->add_option("--out-dir", out_dir, "Output directory");

    // run
    auto* run = app.add_subcommand("run", "Run a policy over a manifest");
    std::string manifest;
    std::string out = "results";
    int jobs = 0;
    run->add_option("--policy", settings.policy, "ours | df")->check(CLI::IsMember({"ours", "df"}));
    run->add_option("--detector", settings.detector, "oracle | imperfect | noisy:<fnr>,<fpr>");
    run->add_option("--manifest", manifest, "Manifest file")->required();
    run->add_option("--jobs", jobs, "Parallel episodes");
    run->add_option("--out", out, "Output directory");
    run->add_flag("--traces", settings.save_traces, "Also write per-episode trace documents");

    // ablate
    auto* abl = app.add_subcommand("ablate", "Run our policy under an ablation variant");
    std::string variant = "full";
    abl->add_option("--variant", variant, "full | no-direction | no-label | heatmap-noise:<sigma> | periodic-falls")
        ->required();
    abl->add_option("--detector", settings.detector, "oracle | imperfect | noisy:<fnr>,<fpr>");
    abl->add_option("--manifest", manifest, "Manifest file")->required();
    abl->add_option("--jobs", jobs, "Parallel episodes");
    abl->add_option("--out", out, "Output directory");
    abl->add_flag("--traces", settings.save_traces, "Also write per-episode trace documents");

    // render
    auto* ren = app.add_subcommand("render", "Render a trace document to SVG");
    std::string trace_path;
    std::string svg_out = "trace.svg";
    ren->add_option("--trace", trace_path, "Trace document written by run --traces")->required();
    ren->add_option("--out", svg_out, "Output SVG path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            EpisodeParams params;
            params.heatmap_sigma = sigma;
            BatchRequest req;
            req.seed = seed;
            req.count = count;
            req.positive_fraction = polarity_mix;
            if (cls != "mixed") req.cls = emergency_kind_from_string(cls);
            const std::vector<EpisodeSpec> eps = generate_batch(req, params);
            fs::create_directories(out_dir);
            std::vector<std::string> files;
            SceneCache cache;
            for (const EpisodeSpec& e : eps) {
                auto ctx = cache.get(e.scene_seed, e.floorplan_params);
                const std::string name = e.id + ".json";
                write_json_file(fs::path(out_dir) / name, to_json(e, &ctx->scene));
                files.push_back(name);
            }
            write_manifest(fs::path(out_dir) / "manifest.json", files);
            std::printf("wrote %zu episodes to %s\n", eps.size(), out_dir.c_str());
            return 0;
        }
        if (run->parsed() || abl->parsed()) {
            BatchOptions opts;
            opts.agent = load_agent_config(settings, jobs);
            opts.jobs = jobs;
            opts.keep_traces = settings.save_traces;
            BatchResult r;
            std::vector<EpisodeSpec> eps;
            if (run->parsed()) {
                opts.policy = policy_kind_from_string(settings.policy);
                r = run_batch(fs::path(manifest), opts);
                if (settings.save_traces) eps = load_manifest_episodes(manifest);
            } else {
                const AblationVariant v = parse_ablation_variant(variant);
                read_manifest(manifest);  // batch-level check before any work
                eps = load_manifest_episodes(manifest);
                r = run_ablation(eps, v, opts);
                const auto errors = read_manifest(manifest).episodes.size() - eps.size();
                r.metrics.n_errors += static_cast<int>(errors);
                for (EpisodeSpec& e : eps) e = apply_variant(e, v);
            }
            write_outputs(out, r, &eps);
            return report(r);
        }
        if (ren->parsed()) {
            const Json doc = read_json_file(trace_path);
            if (!doc.contains("episode") || !doc.contains("trace"))
                throw ConfigError("trace document needs \"episode\" and \"trace\"");
            const EpisodeSpec ep = episode_from_json(doc.at("episode"));
            const Trace t = trace_from_json(doc.at("trace"));
            auto ctx = SceneCache::global().get(ep.scene_seed, ep.floorplan_params);
            render_trace(t, ep, ctx->plan(), svg_out);
            std::printf("wrote %s\n", svg_out.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "emsim: %s\n", e.what());
        return 1;
    }
    return 0;
}
