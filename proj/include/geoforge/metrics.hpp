#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geoforge/png_io.hpp"
#include "geoforge/tilegrid.hpp"

namespace geoforge {

// Per-tile comparison of a generated mask (gn) against ground truth (gt).
struct TilePairMetrics {
    TileId tile{};
    double iou = 0.0;
    bool iou_defined = false;  // false when both masks are empty
    double delta_site_cover = 0.0;  // signed percent, positive = over-generation
    double gn_count_pct = 0.0;
    bool gn_count_defined = false;  // false when the gt tile has no polygons
    long count_gn = 0;
    long count_gt = 0;
};

struct GaussianStats {
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;  // symmetric PSD up to a small numerical floor
    long n = 0;
};

enum class GnCountMode { PerTileMean, RatioOfTotals };

struct RegionReport {
    std::vector<TilePairMetrics> tiles;
    double mean_iou = 0.0;
    long iou_tiles = 0;  // tiles contributing to mean_iou
    double mean_abs_delta_site_cover = 0.0;
    double mean_gn_count_pct = 0.0;
    long gn_count_tiles = 0;
    long undefined_iou_tiles = 0;
    long undefined_gn_count_tiles = 0;
    double fid = 0.0;
    bool fid_defined = false;  // needs >= 2 tiles per side
    std::string feature_source = "builtin";
    GnCountMode gn_count_mode = GnCountMode::PerTileMean;
};

// intersection / union of binary masks; empty union -> undefined
std::optional<double> tile_iou(const Image& gn, const Image& gt);

// 100 * (cover_gn - cover_gt)
double delta_site_cover(const Image& gn, const Image& gt);

// 100 * count_gn / count_gt; count_gt == 0 -> undefined
std::optional<double> gn_count_pct(long count_gn, long count_gt);

TilePairMetrics tile_pair_metrics(const Image& gn, const Image& gt, TileId tile);

// Sample mean and unbiased covariance, symmetrized. Requires >= 2 samples.
GaussianStats gaussian_stats(const std::vector<std::vector<double>>& features);

// ||mu_a - mu_b||^2 + Tr(Sa) + Tr(Sb) - 2 Tr(sqrtm(sqrtm(Sa) Sb sqrtm(Sa)));
// matrix square roots by symmetric eigendecomposition with eigenvalues
// floored at zero, final value clamped to >= 0.
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

// Built-in deterministic tile descriptor: (site cover, polygon count,
// 8x8 block-density grid, 16-bin oriented-edge histogram) = 82 dims.
std::vector<double> feature_extract(const Image& img);
inline constexpr int kFeatureDim = 2 + 64 + 16;

// Per-region aggregation. External feature matrices (one row per tile, same
// order) may replace the built-in extractor for the FID term.
RegionReport region_report(const std::vector<Image>& gn_tiles, const std::vector<Image>& gt_tiles,
                           const std::vector<TileId>& tile_ids,
                           GnCountMode mode = GnCountMode::PerTileMean,
                           const std::vector<std::vector<double>>* gn_features = nullptr,
                           const std::vector<std::vector<double>>* gt_features = nullptr);

// Feature matrix file: either text ("n d" header line, then n rows of d
// numbers) or binary (magic "GFFB", u32 n, u32 d, n*d little-endian f64).
std::vector<std::vector<double>> read_feature_matrix(const std::string& path);
void write_feature_matrix_text(const std::string& path,
                               const std::vector<std::vector<double>>& rows);

// Line-delimited per-tile table row and a JSON summary for reports.
std::string report_tile_line(const TilePairMetrics& m);
std::string report_summary_json(const RegionReport& r);

}  // namespace geoforge
