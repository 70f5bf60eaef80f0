#include "geoforge/app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "geoforge/captions.hpp"
#include "geoforge/checkpoint.hpp"
#include "geoforge/common.hpp"
#include "geoforge/completeness.hpp"
#include "geoforge/condition.hpp"
#include "geoforge/config.hpp"
#include "geoforge/dataset.hpp"
#include "geoforge/diffusion.hpp"
#include "geoforge/geojson.hpp"
#include "geoforge/manifest.hpp"
#include "geoforge/metrics.hpp"
#include "geoforge/raster.hpp"
#include "geoforge/remote.hpp"
#include "geoforge/synthcity.hpp"
#include "geoforge/tagfilter.hpp"
#include "geoforge/tilegrid.hpp"
#include "geoforge/vectorize.hpp"

#include "nlohmann/json.hpp"

namespace fs = std::filesystem;

namespace geoforge::app {

namespace {

Config make_config(const CommonOpts& c) {
    Config cfg = Config::defaults();
    if (!c.config_path.empty()) cfg.load_file(c.config_path);
    for (const auto& kv : c.overrides) cfg.set_kv(kv);
    return cfg;
}

void log_config(const Config& cfg) {
    std::cout << "resolved config:\n";
    std::istringstream in(cfg.resolved());
    std::string line;
    while (std::getline(in, line)) std::cout << "  " << line << "\n";
}

void apply_jobs(int jobs) {
#ifdef _OPENMP
    if (jobs > 0) omp_set_num_threads(jobs);
#else
    (void)jobs;
#endif
}

std::string env_or_empty(const char* name) {
    const char* v = std::getenv(name);
    return v ? v : "";
}

uint64_t tile_hash(TileId t) {
    return hash_combine(hash_combine(static_cast<uint64_t>(t.z), static_cast<uint64_t>(t.x)),
                        static_cast<uint64_t>(t.y));
}

std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) {
        try {
            size_t pos = 0;
            out.push_back(std::stod(trim(cur), &pos));
        } catch (const std::exception&) {
            throw DataError(what + ": '" + cur + "' is not a number");
        }
    }
    return out;
}

BBox parse_region(const std::string& s) {
    std::vector<double> v = parse_double_list(s, "region");
    if (v.size() != 4) throw DataError("region must be west,south,east,north");
    BBox b{v[0], v[1], v[2], v[3]};
    if (b.west >= b.east || b.south >= b.north)
        throw DataError("region is empty (need west < east and south < north)");
    if (std::fabs(b.south) > kMercatorMaxLat || std::fabs(b.north) > kMercatorMaxLat)
        throw DataError("region exceeds the Web-Mercator latitude band");
    return b;
}

ModelConfig model_config_from(const Config& cfg) {
    ModelConfig mc;
    mc.img_size = cfg.get_int("model.img_size");
    mc.base_ch = cfg.get_int("model.base_ch");
    mc.cond_width = cfg.get_int("model.cond_width");
    mc.embed_dim = cfg.get_int("model.embed_dim");
    mc.text_dim = cfg.get_int("model.text_dim");
    return mc;
}

CompletenessThresholds thresholds_from(const Config& cfg) {
    CompletenessThresholds th;
    th.mapped_ratio = cfg.get_double("assess.mapped_ratio");
    th.partial_ratio = cfg.get_double("assess.partial_ratio");
    th.mapped_fraction = cfg.get_double("assess.mapped_fraction");
    th.partial_fraction = cfg.get_double("assess.partial_fraction");
    if (th.mapped_ratio <= 0 || th.partial_ratio < th.mapped_ratio)
        throw DataError("assess ratio thresholds must satisfy 0 < mapped <= partial");
    return th;
}

void rethrow_tile_errors(const std::vector<std::string>& errors) {
    for (const auto& e : errors)
        if (!e.empty()) throw DataError(e);
}

// case-insensitive replacement of the source city name (style transfer)
std::string apply_style_city(const std::string& caption, const std::string& from,
                             const std::string& to) {
    if (from.empty()) return to + " " + caption;
    std::string lc = lowercase(caption), lf = lowercase(from);
    std::string out;
    size_t pos = 0;
    bool found = false;
    while (true) {
        size_t hit = lc.find(lf, pos);
        if (hit == std::string::npos) {
            out += caption.substr(pos);
            break;
        }
        out += caption.substr(pos, hit - pos);
        out += to;
        pos = hit + lf.size();
        found = true;
    }
    return found ? out : to + " " + caption;
}

struct FoundTile {
    TileId tile;
    std::string path;
};

// every z/x/y.png under root, sorted by (z, x, y)
std::vector<FoundTile> walk_tile_dir(const std::string& root) {
    std::vector<FoundTile> out;
    if (!fs::exists(root)) throw DataError("directory not found: " + root);
    auto parse_int = [](const std::string& s, int64_t& v) {
        if (s.empty()) return false;
        char* end = nullptr;
        v = std::strtoll(s.c_str(), &end, 10);
        return end == s.c_str() + s.size();
    };
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".png") continue;
        fs::path rel = fs::relative(entry.path(), root);
        std::vector<std::string> parts;
        for (const auto& c : rel) parts.push_back(c.string());
        if (parts.size() != 3) continue;
        int64_t z = 0, x = 0, y = 0;
        if (!parse_int(parts[0], z) || !parse_int(parts[1], x) ||
            !parse_int(fs::path(parts[2]).stem().string(), y))
            continue;
        out.push_back({TileId{static_cast<int>(z), x, y}, entry.path().string()});
    }
    std::sort(out.begin(), out.end(), [](const FoundTile& a, const FoundTile& b) {
        return std::tie(a.tile.z, a.tile.x, a.tile.y) < std::tie(b.tile.z, b.tile.x, b.tile.y);
    });
    return out;
}

}  // namespace

int run_build_dataset(const BuildDatasetOpts& opts) {
    Config cfg = make_config(opts.common);
    log_config(cfg);
    apply_jobs(opts.common.jobs);
    if (opts.out_dir.empty()) throw DataError("build-dataset needs an output directory");
    if (opts.region.empty()) throw DataError("build-dataset needs --region west,south,east,north");
    if (opts.input_path.empty() == opts.synthetic_style.empty())
        throw DataError("provide exactly one of an input geodata file or --synthetic STYLE");

    const fs::path out(opts.out_dir);
    const std::string manifest_path = (out / "manifest.jsonl").string();
    if (fs::exists(manifest_path) && !opts.force)
        throw DataError(opts.out_dir + " already contains manifest.jsonl (pass --force to rebuild)");

    const int z = static_cast<int>(cfg.get_int("zoom"));
    const int size = static_cast<int>(cfg.get_int("tile_pixels"));
    const uint64_t seed = static_cast<uint64_t>(cfg.get_int("seed"));
    const double eval_fraction = cfg.get_double("eval_fraction");
    const BBox region = parse_region(opts.region);
    const std::vector<TileId> tiles = enumerate_region(region, z);

    std::string city = opts.city.empty() ? cfg.get_str("city_name") : opts.city;
    FeatureSet all;
    std::vector<std::string> parse_warnings;
    if (!opts.synthetic_style.empty()) {
        CitySpec spec;
        if (opts.synthetic_style == "grid") {
            spec = CitySpec::grid_city(seed);
        } else if (opts.synthetic_style == "organic") {
            spec = CitySpec::organic_city(seed);
        } else if (opts.synthetic_style == "mixed") {
            spec = CitySpec::grid_city(seed);
            spec.style = CityStyle::Mixed;
            spec.name = "mixtown";
        } else {
            throw DataError("synthetic style must be grid, organic or mixed");
        }
        spec.block_min_m = cfg.get_double("synth.block_min_m");
        spec.block_max_m = cfg.get_double("synth.block_max_m");
        spec.building_density = cfg.get_double("synth.density");
        if (!city.empty()) spec.name = city;
        city = spec.name;

        // generate over the full extent of the enumerated tiles (plus one
        // block) so edge tiles see complete street geometry
        BBox gen_box = region;
        for (TileId t : tiles) {
            TileBounds tb = tile_bounds(t, size);
            gen_box.west = std::min(gen_box.west, tb.west);
            gen_box.south = std::min(gen_box.south, tb.south);
            gen_box.east = std::max(gen_box.east, tb.east);
            gen_box.north = std::max(gen_box.north, tb.north);
        }
        const double lat_c = (gen_box.south + gen_box.north) / 2.0;
        const double dlat = spec.block_max_m * 360.0 / kEarthCircumferenceM;
        const double dlon = dlat / std::cos(lat_c * kPi / 180.0);
        gen_box = BBox{gen_box.west - dlon, gen_box.south - dlat, gen_box.east + dlon,
                       gen_box.north + dlat};

        const std::string doc = write_geojson(generate_city(spec, gen_box));
        write_text_file((out / "synthetic.geojson").string(), doc);
        all = parse_geodata(doc, RoadClassMap::defaults(), &parse_warnings);
    } else {
        all = parse_geodata(read_text_file(opts.input_path), RoadClassMap::defaults(),
                            &parse_warnings);
        if (city.empty()) city = "unnamed";
    }
    for (const auto& w : parse_warnings) std::cout << "warning: " << w << "\n";

    const std::string allowlist_path = cfg.get_str("allowlist");
    if (!allowlist_path.empty()) {
        const TagAllowlist allow = TagAllowlist::load(allowlist_path);
        for (auto& f : all.features) f = filter_tags(f, allow);
    }

    const CacheStore cache{opts.cache_dir.empty() ? (out / "httpcache").string()
                                                  : opts.cache_dir};
    const std::string wiki_url =
        cfg.get_bool("caption.use_wiki") ? env_or_empty("GEOFORGE_WIKI_URL") : "";
    const WikiClient wiki(wiki_url, cache);
    const std::string llm_url =
        cfg.get_bool("caption.use_llm") ? env_or_empty("GEOFORGE_LLM_URL") : "";
    const LlmClient llm(llm_url, env_or_empty("GEOFORGE_LLM_KEY"),
                        cfg.get_str("caption.llm_model"), cache);
    CaptionConfig ccfg;
    ccfg.token_budget = static_cast<int>(cfg.get_int("caption.token_budget"));
    ccfg.input_char_budget = static_cast<int>(cfg.get_int("caption.input_char_budget"));
    ccfg.wiki_max_entries = static_cast<int>(cfg.get_int("caption.wiki_max_entries"));
    const double wiki_radius = cfg.get_double("caption.wiki_radius_m");

    const long n = static_cast<long>(tiles.size());
    std::vector<TileRecord> records(n);
    std::vector<std::string> tile_warnings(n), tile_errors(n);
    const RoadStyle road_style;

#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        try {
            const TileId t = tiles[i];
            const TileBounds tb = tile_bounds(t, size);
            const double lat_c = (tb.south + tb.north) / 2.0;
            // roads just outside the tile can still paint pixels inside it
            const double margin_m = (road_style.width_px(1, size) * 0.5 + 1.0) *
                                    tile_ground_width_m(t.z, lat_c) / size;
            const double dlat = margin_m * 360.0 / kEarthCircumferenceM;
            const double dlon = dlat / std::cos(lat_c * kPi / 180.0);
            const BBox clip{tb.west - dlon, tb.south - dlat, tb.east + dlon, tb.north + dlat};

            std::vector<std::vector<Pt>> buildings;
            std::vector<std::pair<std::vector<Pt>, int>> roads;
            std::vector<std::pair<std::vector<Pt>, std::string>> landuse;
            for (const GeoFeature& f : all.features) {
                if (!geom_intersects_bbox(f, clip)) continue;
                if (f.layer == Layer::Buildings && f.kind == GeomKind::Polygon)
                    buildings.push_back(f.pts);
                else if (f.layer == Layer::Roads && f.kind == GeomKind::Polyline)
                    roads.emplace_back(f.pts, f.road_class);
                else if (f.layer == Layer::Landuse && f.kind == GeomKind::Polygon)
                    landuse.emplace_back(f.pts, f.category);
            }

            const Image target = rasterize_polygons(buildings, t, size);
            const Image roads_img = rasterize_roads(roads, t, size, road_style);
            std::vector<std::string> lw;
            const Image landuse_img =
                rasterize_landuse(landuse, t, size, LandusePalette::defaults(), &lw);
            if (!lw.empty()) tile_warnings[i] = t.str() + ": " + lw.front();

            TileRecord r;
            r.tile = t;
            r.center = tile_center(t);
            r.target_path = tile_png_path("target", t);
            r.roads_path = tile_png_path("roads", t);
            r.landuse_path = tile_png_path("landuse", t);
            r.split = assign_split(t, seed, eval_fraction);
            write_png((out / r.target_path).string(), target);
            write_png((out / r.roads_path).string(), roads_img);
            write_png((out / r.landuse_path).string(), landuse_img);

            const auto counts = aggregate_tile_tags(all, t, size);
            std::vector<WikiEntry> wiki_entries;
            if (wiki.enabled()) {
                try {
                    wiki_entries = wiki.geosearch(r.center, wiki_radius);
                } catch (const DataError& e) {
                    tile_warnings[i] += std::string(tile_warnings[i].empty() ? "" : "; ") +
                                        t.str() + ": wiki lookup failed: " + e.what();
                }
            }
            r.caption = assemble_caption(counts, wiki_entries, city, llm, ccfg);
            records[i] = std::move(r);
        } catch (const std::exception& e) {
            tile_errors[i] = tiles[i].str() + ": " + e.what();
        }
    }
    rethrow_tile_errors(tile_errors);
    for (const auto& w : tile_warnings)
        if (!w.empty()) std::cout << "warning: " << w << "\n";

    write_manifest(manifest_path, records);
    write_text_file((out / "build-config.txt").string(), cfg.resolved());
    std::cout << "wrote " << n << " tile records to " << manifest_path << "\n";
    return 0;
}

int run_train(const TrainOpts& opts) {
    Config cfg = make_config(opts.common);
    log_config(cfg);
    if (opts.manifest.empty() || opts.out_checkpoint.empty())
        throw DataError("train needs --manifest and --out");

    const ModelConfig mc = model_config_from(cfg);
    const DatasetAblation abl{opts.no_image, opts.no_metadata, opts.no_prompt};
    const LoadedDataset ds = load_dataset(opts.manifest, opts.split, mc.img_size, mc.text_dim, abl);
    if (ds.samples.empty())
        throw DataError("no '" + opts.split + "' samples in " + opts.manifest);
    std::cout << "loaded " << ds.samples.size() << " training samples (split " << opts.split
              << ")\n";

    const uint64_t seed = static_cast<uint64_t>(cfg.get_int("seed"));
    TrainState st;
    if (!opts.resume.empty()) {
        st = load_checkpoint(opts.resume);
        std::cout << "resumed " << opts.resume << " at step " << st.step << "\n";
    } else {
        st.model.init(mc, hash_combine(seed, fnv1a64("model-init")));
        st.sched = make_schedule(cfg.get_int("schedule.T"), cfg.get_double("schedule.beta1"),
                                 cfg.get_double("schedule.betaT"));
        st.rng = Rng(hash_combine(seed, fnv1a64("train-stream")));
        st.opt.lr = cfg.get_double("train.lr");
    }
    st.zero_metadata = opts.no_metadata;

    const long steps = cfg.get_int("train.steps");
    const long batch_size = std::max(1L, cfg.get_int("train.batch"));
    const long log_every = std::max(1L, cfg.get_int("train.log_every"));
    const long ckpt_every = cfg.get_int("train.ckpt_every");
    const long align_steps = cfg.get_int("train.align_steps");
    if (st.step >= steps)
        std::cout << "checkpoint already at step " << st.step << "; nothing to do\n";

    auto write_loss_curve = [&](const std::string& ckpt_path) {
        std::ostringstream out;
        for (size_t i = 0; i < st.loss_history.size(); ++i)
            out << (i + 1) << " " << format_double(st.loss_history[i]) << "\n";
        write_text_file(ckpt_path + ".loss.txt", out.str());
    };

    std::vector<const TrainSample*> batch(static_cast<size_t>(batch_size));
    while (st.step < steps) {
        st.blank_condition_image = opts.no_image || st.step < align_steps;
        for (auto& slot : batch) slot = &ds.samples[st.rng.below(ds.samples.size())];
        const double loss = train_step(st, batch);
        if (st.step == 1 || st.step == steps || st.step % log_every == 0)
            std::cout << "step " << st.step << " loss " << format_double(loss) << "\n";
        if (ckpt_every > 0 && st.step < steps && st.step % ckpt_every == 0) {
            save_checkpoint(opts.out_checkpoint, st);
            write_loss_curve(opts.out_checkpoint);
        }
    }
    save_checkpoint(opts.out_checkpoint, st);
    write_loss_curve(opts.out_checkpoint);
    std::cout << "saved checkpoint to " << opts.out_checkpoint << " (step " << st.step << ")\n";
    return 0;
}

int run_sample(const SampleOpts& opts) {
    Config cfg = make_config(opts.common);
    log_config(cfg);
    apply_jobs(opts.common.jobs);
    if (opts.checkpoint.empty() || opts.manifest.empty() || opts.out_dir.empty())
        throw DataError("sample needs --checkpoint, --manifest and --out");

    const TrainState st = load_checkpoint(opts.checkpoint);
    const ModelConfig& mc = st.model.cfg;

    std::vector<TileRecord> records;
    for (TileRecord& r : read_manifest(opts.manifest))
        if (opts.split == "all" || r.split == opts.split) records.push_back(std::move(r));
    if (records.empty())
        throw DataError("no '" + opts.split + "' tiles in " + opts.manifest);

    const uint64_t seed = opts.seed >= 0 ? static_cast<uint64_t>(opts.seed)
                                         : static_cast<uint64_t>(cfg.get_int("seed"));
    const long want_steps =
        std::min(static_cast<long>(cfg.get_int("sample.ddim_steps")), st.sched.T);
    const std::vector<long> steps = ddim_steps(st.sched.T, std::max(1L, want_steps));

    const long n = static_cast<long>(records.size());
    std::vector<std::string> tile_errors(n);

#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        try {
            const TileRecord& r = records[i];
            CondBatch cb;
            cb.lons = {r.center.lon};
            cb.lats = {r.center.lat};
            cb.zero_metadata = opts.no_metadata;
            std::string caption =
                opts.no_prompt ? std::string(kNoPromptToken) : r.caption.final_caption;
            if (!opts.style_city.empty())
                caption = apply_style_city(caption, r.caption.city_name, opts.style_city);
            cb.captions = {embed_caption(caption, mc.text_dim)};
            if (opts.no_image) {
                cb.cond_img = Tensor({1, mc.cond_ch, mc.img_size, mc.img_size});
            } else {
                Tensor c = load_condition(
                    resolve_manifest_sibling(opts.manifest, r.roads_path),
                    resolve_manifest_sibling(opts.manifest, r.landuse_path), mc.img_size);
                c.shape = {1, mc.cond_ch, mc.img_size, mc.img_size};
                cb.cond_img = std::move(c);
            }
            const Tensor x =
                ddim_sample(st.model, st.sched, cb, steps, hash_combine(seed, tile_hash(r.tile)));
            write_png(tile_png_path(opts.out_dir, r.tile), tensor_to_image(x, 0));
        } catch (const std::exception& e) {
            tile_errors[i] = records[i].tile.str() + ": " + e.what();
        }
    }
    rethrow_tile_errors(tile_errors);
    std::cout << "sampled " << n << " tiles into " << opts.out_dir << "\n";
    return 0;
}

int run_evaluate(const EvaluateOpts& opts) {
    Config cfg = make_config(opts.common);
    log_config(cfg);
    apply_jobs(opts.common.jobs);
    if (opts.gen_dir.empty() || opts.gt_dir.empty())
        throw DataError("evaluate needs --gen and --gt directories");

    const auto found = walk_tile_dir(opts.gen_dir);
    if (found.empty()) throw DataError("no z/x/y.png tiles under " + opts.gen_dir);

    std::vector<Image> gn, gt;
    std::vector<TileId> ids;
    for (const auto& f : found) {
        const std::string gt_path = tile_png_path(opts.gt_dir, f.tile);
        if (!fs::exists(gt_path))
            throw DataError("missing ground-truth tile " + f.tile.str() + " (expected " +
                            gt_path + ")");
        gn.push_back(read_png(f.path));
        gt.push_back(read_png(gt_path));
        ids.push_back(f.tile);
    }

    const std::string mode_str = cfg.get_str("eval.gn_count_mode");
    GnCountMode mode;
    if (mode_str == "per-tile-mean")
        mode = GnCountMode::PerTileMean;
    else if (mode_str == "ratio-of-totals")
        mode = GnCountMode::RatioOfTotals;
    else
        throw DataError("eval.gn_count_mode must be per-tile-mean or ratio-of-totals");

    std::vector<std::vector<double>> fgen, fgt;
    const std::vector<std::vector<double>>*pgen = nullptr, *pgt = nullptr;
    if (!opts.features_in.empty()) {
        if (opts.features_in.size() != 2)
            throw DataError("--features-in needs two paths: generated then ground truth");
        fgen = read_feature_matrix(opts.features_in[0]);
        fgt = read_feature_matrix(opts.features_in[1]);
        pgen = &fgen;
        pgt = &fgt;
    }

    const RegionReport rep = region_report(gn, gt, ids, mode, pgen, pgt);
    std::ostringstream out;
    for (const auto& m : rep.tiles) out << report_tile_line(m) << "\n";
    out << report_summary_json(rep) << "\n";
    std::cout << out.str();
    if (!opts.report_out.empty()) write_text_file(opts.report_out, out.str());

    if (!opts.export_dir.empty()) {
        for (size_t i = 0; i < gn.size(); ++i) {
            const auto polys = polygonize(binarize(gn[i]), ids[i], gn[i].width);
            const std::string path = tile_png_path(opts.export_dir, ids[i]);
            write_text_file(path.substr(0, path.size() - 4) + ".geojson",
                            export_polygons(polys, gn[i].width, true));
        }
        std::cout << "exported polygons for " << gn.size() << " tiles into " << opts.export_dir
                  << "\n";
    }
    return 0;
}

int run_degrade(const DegradeOpts& opts) {
    Config cfg = make_config(opts.common);
    log_config(cfg);
    if (opts.manifest.empty() || opts.out_dir.empty())
        throw DataError("degrade needs --manifest and --out");
    const CompletenessThresholds th = thresholds_from(cfg);

    const auto records = read_manifest(opts.manifest);
    if (records.empty()) throw DataError("empty manifest: " + opts.manifest);

    std::vector<double> fractions;
    if (!opts.fractions.empty()) {
        fractions = parse_double_list(opts.fractions, "fractions");
        for (double f : fractions)
            if (f < 0 || f > 1) throw DataError("fractions must lie in [0,1]");
        if (fractions.empty()) throw DataError("fractions list is empty");
    }
    const uint64_t seed = opts.seed >= 0 ? static_cast<uint64_t>(opts.seed)
                                         : static_cast<uint64_t>(cfg.get_int("seed"));
    Rng fraction_rng(hash_combine(seed, fnv1a64("degrade-fractions")));

    std::ostringstream labels;
    for (size_t i = 0; i < records.size(); ++i) {
        const TileRecord& r = records[i];
        const Image target =
            read_png(resolve_manifest_sibling(opts.manifest, r.target_path));
        const auto polys = polygonize(binarize(target), r.tile,
                                      static_cast<int>(cfg.get_int("tile_pixels")));
        const double f =
            fractions.empty() ? fraction_rng.uniform() : fractions[i % fractions.size()];
        DegradedTile d = degrade(polys, target.width, f, hash_combine(seed, tile_hash(r.tile)),
                                 th, opts.area_weighted);
        d.tile = r.tile;
        write_png(tile_png_path(opts.out_dir, r.tile), d.mask);

        nlohmann::ordered_json j;
        j["z"] = r.tile.z;
        j["x"] = r.tile.x;
        j["y"] = r.tile.y;
        j["removed_fraction"] = d.removed_fraction;
        j["kept_fraction"] = d.kept_fraction;
        j["kept_area_fraction"] = d.kept_area_fraction;
        j["true_class"] = map_class_name(d.true_class);
        labels << j.dump() << "\n";
    }
    write_text_file((fs::path(opts.out_dir) / "labels.jsonl").string(), labels.str());
    std::cout << "degraded " << records.size() << " tiles into " << opts.out_dir << "\n";
    return 0;
}

int run_assess(const AssessOpts& opts) {
    Config cfg = make_config(opts.common);
    log_config(cfg);
    if (opts.gen_dir.empty() || opts.degraded_dir.empty())
        throw DataError("assess needs --gen and --degraded directories");
    const CompletenessThresholds th = thresholds_from(cfg);

    const std::string labels_path = (fs::path(opts.degraded_dir) / "labels.jsonl").string();
    const std::string labels_text = read_text_file(labels_path);
    std::istringstream in(labels_text);
    std::string line;
    std::vector<MapClass> truths, predictions;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        TileId t;
        MapClass truth;
        try {
            const auto j = nlohmann::json::parse(line);
            t = TileId{j.at("z").get<int>(), j.at("x").get<int64_t>(), j.at("y").get<int64_t>()};
            truth = map_class_from_name(j.at("true_class").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw DataError(labels_path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        const std::string deg_path = tile_png_path(opts.degraded_dir, t);
        const std::string gen_path = tile_png_path(opts.gen_dir, t);
        if (!fs::exists(deg_path)) throw DataError("missing degraded tile " + deg_path);
        if (!fs::exists(gen_path)) throw DataError("missing generated tile " + gen_path);
        const double ratio = site_cover_ratio(read_png(gen_path), read_png(deg_path));
        predictions.push_back(classify(ratio, th));
        truths.push_back(truth);
    }
    if (truths.empty()) throw DataError(labels_path + " holds no labeled tiles");

    const ClassificationResult res = score(predictions, truths);
    std::ostringstream out;
    out << classification_table(res) << "\n" << classification_json(res) << "\n";
    std::cout << out.str();
    if (!opts.report_out.empty()) write_text_file(opts.report_out, out.str());
    return 0;
}

}  // namespace geoforge::app
