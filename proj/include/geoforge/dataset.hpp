#pragma once

#include <string>
#include <vector>

#include "geoforge/diffusion.hpp"
#include "geoforge/manifest.hpp"

namespace geoforge {

// Modality ablations applied at load time (train) or sample assembly.
struct DatasetAblation {
    bool no_image = false;     // blank condition image
    bool no_metadata = false;  // zero location embeddings
    bool no_prompt = false;    // captions replaced by the one-token fallback
};

inline constexpr const char* kNoPromptToken = "tile";

struct LoadedDataset {
    std::vector<TileRecord> records;   // aligned with samples
    std::vector<TrainSample> samples;  // tensors resident in memory
};

// Reads records with the given split ("train", "eval" or "all") and loads
// their rasters relative to the manifest's directory. Every target must be a
// single-channel img_size^2 PNG; roads/landuse must be 3-channel.
LoadedDataset load_dataset(const std::string& manifest_path, const std::string& split,
                           long img_size, long text_dim, const DatasetAblation& abl = {});

// Shared raster -> tensor conversions (also used when sampling).
Tensor image_to_x0(const Image& target);                       // [0,255] -> [-1,1]
Tensor load_condition(const std::string& roads_path, const std::string& landuse_path,
                      long img_size);                          // (6,H,W) in [0,1]

std::string resolve_manifest_sibling(const std::string& manifest_path,
                                     const std::string& relative);

}  // namespace geoforge
