#include "geoforge/dataset.hpp"

#include <filesystem>

#include "geoforge/condition.hpp"
#include "geoforge/raster.hpp"

namespace geoforge {

std::string resolve_manifest_sibling(const std::string& manifest_path,
                                     const std::string& relative) {
    std::filesystem::path rel(relative);
    if (rel.is_absolute()) return relative;
    return (std::filesystem::path(manifest_path).parent_path() / rel).string();
}

Tensor image_to_x0(const Image& target) {
    if (target.channels != 1)
        throw DataError("target raster must be single-channel, got " +
                        std::to_string(target.channels));
    Tensor x({1, target.height, target.width});
    for (size_t i = 0; i < target.data.size(); ++i)
        x.data[i] = target.data[i] / 255.0 * 2.0 - 1.0;
    return x;
}

Tensor load_condition(const std::string& roads_path, const std::string& landuse_path,
                      long img_size) {
    Image roads = read_png(roads_path);
    Image landuse = read_png(landuse_path);
    if (roads.width != img_size || roads.height != img_size)
        throw DataError(roads_path + ": expected " + std::to_string(img_size) + "px tile, got " +
                        std::to_string(roads.width) + "x" + std::to_string(roads.height));
    if (landuse.width != img_size || landuse.height != img_size)
        throw DataError(landuse_path + ": expected " + std::to_string(img_size) +
                        "px tile, got " + std::to_string(landuse.width) + "x" +
                        std::to_string(landuse.height));
    return concat_condition(roads, landuse);
}

LoadedDataset load_dataset(const std::string& manifest_path, const std::string& split,
                           long img_size, long text_dim, const DatasetAblation& abl) {
    if (split != "train" && split != "eval" && split != "all")
        throw DataError("split must be train, eval or all, got '" + split + "'");
    LoadedDataset ds;
    for (TileRecord& r : read_manifest(manifest_path)) {
        if (split != "all" && r.split != split) continue;
        TrainSample s;
        Image target = read_png(resolve_manifest_sibling(manifest_path, r.target_path));
        if (target.width != img_size || target.height != img_size)
            throw DataError(r.target_path + ": expected " + std::to_string(img_size) +
                            "px tile, got " + std::to_string(target.width) + "x" +
                            std::to_string(target.height));
        s.x0 = image_to_x0(target);
        if (abl.no_image) {
            s.cond_img = Tensor({6, img_size, img_size});
        } else {
            s.cond_img = load_condition(resolve_manifest_sibling(manifest_path, r.roads_path),
                                        resolve_manifest_sibling(manifest_path, r.landuse_path),
                                        img_size);
        }
        s.lon = r.center.lon;
        s.lat = r.center.lat;
        const std::string text =
            abl.no_prompt ? std::string(kNoPromptToken) : r.caption.final_caption;
        s.caption_embed = embed_caption(text, text_dim);
        ds.samples.push_back(std::move(s));
        ds.records.push_back(std::move(r));
    }
    return ds;
}

}  // namespace geoforge
