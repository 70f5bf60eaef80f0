#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace geoforge::app {

// Shared by every subcommand: optional config file plus key=value overrides.
struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    int jobs = 0;  // 0 = library default thread count
};

struct BuildDatasetOpts {
    CommonOpts common;
    std::string input_path;       // vector-geodata file; empty when synthetic
    std::string synthetic_style;  // "grid" | "organic" | "mixed"; empty = file input
    std::string region;           // "west,south,east,north" degrees
    std::string out_dir;
    std::string city;       // caption city name override
    std::string cache_dir;  // HTTP cache; default <out>/httpcache
    bool force = false;
};

struct TrainOpts {
    CommonOpts common;
    std::string manifest;
    std::string out_checkpoint;
    std::string resume;
    std::string split = "train";
    bool no_image = false, no_metadata = false, no_prompt = false;
};

struct SampleOpts {
    CommonOpts common;
    std::string checkpoint;
    std::string manifest;
    std::string out_dir;
    std::string split = "all";
    std::string style_city;
    int64_t seed = -1;  // -1 = config seed
    bool no_image = false, no_metadata = false, no_prompt = false;
};

struct EvaluateOpts {
    CommonOpts common;
    std::string gen_dir;
    std::string gt_dir;
    std::vector<std::string> features_in;  // 0 or 2 paths: generated, ground truth
    std::string report_out;                // optional report file
    std::string export_dir;                // optional per-tile polygon exports
};

struct DegradeOpts {
    CommonOpts common;
    std::string manifest;
    std::string out_dir;
    std::string fractions;  // comma list cycled over tiles; empty = uniform random
    bool area_weighted = false;
    int64_t seed = -1;
};

struct AssessOpts {
    CommonOpts common;
    std::string gen_dir;
    std::string degraded_dir;  // holds masks + labels.jsonl from degrade
    std::string report_out;
};

int run_build_dataset(const BuildDatasetOpts& opts);
int run_train(const TrainOpts& opts);
int run_sample(const SampleOpts& opts);
int run_evaluate(const EvaluateOpts& opts);
int run_degrade(const DegradeOpts& opts);
int run_assess(const AssessOpts& opts);

}  // namespace geoforge::app
