#include <iostream>

#include "CLI11.hpp"

#include "geoforge/app.hpp"
#include "geoforge/common.hpp"

namespace {

void add_common(CLI::App* sub, geoforge::app::CommonOpts& c) {
    sub->add_option("--config", c.config_path, "config file (key = value lines)");
    sub->add_option("--set", c.overrides, "config override key=value (repeatable)");
    sub->add_option("--jobs", c.jobs, "worker threads for per-tile stages (default: all cores)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{
        "geoforge: builds image-text-metadata-footprint tile datasets, trains and samples a "
        "multimodally-conditioned diffusion model, vectorizes the results and evaluates them "
        "with urban-morphology metrics"};
    cli.require_subcommand(1);

    geoforge::app::BuildDatasetOpts bopts;
    auto* b = cli.add_subcommand("build-dataset",
                                 "rasterize vector geodata into a captioned tile dataset");
    add_common(b, bopts.common);
    b->add_option("--input", bopts.input_path, "vector geodata feature-collection file");
    b->add_option("--synthetic", bopts.synthetic_style,
                  "generate a procedural city instead of reading --input (grid|organic|mixed)");
    b->add_option("--region", bopts.region, "west,south,east,north in degrees")->required();
    b->add_option("--out", bopts.out_dir, "output dataset directory")->required();
    b->add_option("--city", bopts.city, "city name used in captions");
    b->add_option("--cache-dir", bopts.cache_dir, "HTTP response cache (default <out>/httpcache)");
    b->add_flag("--force", bopts.force, "rebuild even if the directory holds a manifest");
    b->callback([&]() { geoforge::app::run_build_dataset(bopts); });

    geoforge::app::TrainOpts topts;
    auto* t = cli.add_subcommand("train", "train the conditional denoiser on a dataset");
    add_common(t, topts.common);
    t->add_option("--manifest", topts.manifest, "dataset manifest")->required();
    t->add_option("--out", topts.out_checkpoint, "checkpoint output path")->required();
    t->add_option("--resume", topts.resume, "resume from an existing checkpoint");
    t->add_option("--split", topts.split, "train | eval | all (default train)");
    t->add_flag("--no-image", topts.no_image, "ablation: blank condition image");
    t->add_flag("--no-metadata", topts.no_metadata, "ablation: zero location embeddings");
    t->add_flag("--no-prompt", topts.no_prompt, "ablation: one-token fallback captions");
    t->callback([&]() { geoforge::app::run_train(topts); });

    geoforge::app::SampleOpts sopts;
    auto* s = cli.add_subcommand("sample", "generate building-footprint tiles from a checkpoint");
    add_common(s, sopts.common);
    s->add_option("--checkpoint", sopts.checkpoint, "trained checkpoint")->required();
    s->add_option("--manifest", sopts.manifest, "manifest providing tiles and conditions")
        ->required();
    s->add_option("--out", sopts.out_dir, "output directory (z/x/y.png layout)")->required();
    s->add_option("--split", sopts.split, "train | eval | all (default all)");
    s->add_option("--style-city", sopts.style_city,
                  "replace the source city name in captions (style transfer)");
    s->add_option("--seed", sopts.seed, "sampling seed (default: config seed)");
    s->add_flag("--no-image", sopts.no_image, "sample with a blank condition image");
    s->add_flag("--no-metadata", sopts.no_metadata, "sample with zero location embeddings");
    s->add_flag("--no-prompt", sopts.no_prompt, "sample with one-token fallback captions");
    s->callback([&]() { geoforge::app::run_sample(sopts); });

    geoforge::app::EvaluateOpts eopts;
    auto* e = cli.add_subcommand("evaluate",
                                 "compare generated tiles against ground truth (IoU, site "
                                 "cover, building counts, Frechet distance)");
    add_common(e, eopts.common);
    e->add_option("--gen", eopts.gen_dir, "generated tile directory")->required();
    e->add_option("--gt", eopts.gt_dir, "ground-truth tile directory")->required();
    e->add_option("--features-in", eopts.features_in,
                  "two feature-matrix files (generated, ground truth) replacing the built-in "
                  "extractor")
        ->expected(2);
    e->add_option("--report-out", eopts.report_out, "also write the report to this file");
    e->add_option("--export-polys", eopts.export_dir,
                  "write vectorized building polygons per tile into this directory");
    e->callback([&]() { geoforge::app::run_evaluate(eopts); });

    geoforge::app::DegradeOpts dopts;
    auto* d = cli.add_subcommand("degrade",
                                 "remove random building polygons per tile to simulate "
                                 "incomplete data (writes masks + labels.jsonl)");
    add_common(d, dopts.common);
    d->add_option("--manifest", dopts.manifest, "dataset manifest supplying target masks")
        ->required();
    d->add_option("--out", dopts.out_dir, "degraded output directory")->required();
    d->add_option("--fractions", dopts.fractions,
                  "comma list of removal fractions cycled over tiles (default: uniform random)");
    d->add_flag("--area-weighted", dopts.area_weighted,
                "bias polygon removal by footprint area");
    d->add_option("--seed", dopts.seed, "degradation seed (default: config seed)");
    d->callback([&]() { geoforge::app::run_degrade(dopts); });

    geoforge::app::AssessOpts aopts;
    auto* a = cli.add_subcommand("assess",
                                 "classify completeness of degraded tiles from generated tiles "
                                 "(site-cover-ratio rule) and score against the labels");
    add_common(a, aopts.common);
    a->add_option("--gen", aopts.gen_dir, "generated tile directory")->required();
    a->add_option("--degraded", aopts.degraded_dir,
                  "degraded tile directory holding labels.jsonl")
        ->required();
    a->add_option("--report-out", aopts.report_out, "also write the report to this file");
    a->callback([&]() { geoforge::app::run_assess(aopts); });

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = cli.exit(err);
        return code == 0 ? 0 : 1;
    } catch (const geoforge::NumericError& err) {
        std::cerr << "numeric error: " << err.what() << "\n";
        return 3;
    } catch (const geoforge::DataError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 0;
}
