#include "geoforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "geoforge/common.hpp"
#include "geoforge/kernels.hpp"
#include "geoforge/vectorize.hpp"

#include "nlohmann/json.hpp"

namespace geoforge {

namespace {

void check_pair(const Image& gn, const Image& gt) {
    if (gn.width != gt.width || gn.height != gt.height)
        throw DataError("mask dimension mismatch: " + std::to_string(gn.width) + "x" +
                        std::to_string(gn.height) + " vs " + std::to_string(gt.width) + "x" +
                        std::to_string(gt.height));
}

long count_set(const Image& m) {
    long n = 0;
    const int ch = m.channels;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m.data[(static_cast<size_t>(y) * m.width + x) * ch] >= 128) ++n;
    return n;
}

}  // namespace

std::optional<double> tile_iou(const Image& gn, const Image& gt) {
    check_pair(gn, gt);
    long inter = 0, uni = 0;
    const int cg = gn.channels, ct = gt.channels;
    for (int y = 0; y < gn.height; ++y) {
        for (int x = 0; x < gn.width; ++x) {
            bool a = gn.data[(static_cast<size_t>(y) * gn.width + x) * cg] >= 128;
            bool b = gt.data[(static_cast<size_t>(y) * gt.width + x) * ct] >= 128;
            inter += (a && b) ? 1 : 0;
            uni += (a || b) ? 1 : 0;
        }
    }
    if (uni == 0) return std::nullopt;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double delta_site_cover(const Image& gn, const Image& gt) {
    check_pair(gn, gt);
    double denom = static_cast<double>(gn.width) * gn.height;
    return 100.0 * (count_set(gn) - count_set(gt)) / denom;
}

std::optional<double> gn_count_pct(long count_gn, long count_gt) {
    if (count_gt == 0) return std::nullopt;
    return 100.0 * static_cast<double>(count_gn) / static_cast<double>(count_gt);
}

TilePairMetrics tile_pair_metrics(const Image& gn, const Image& gt, TileId tile) {
    TilePairMetrics m;
    m.tile = tile;
    if (auto iou = tile_iou(gn, gt)) {
        m.iou = *iou;
        m.iou_defined = true;
    }
    m.delta_site_cover = delta_site_cover(gn, gt);
    m.count_gn = static_cast<long>(polygonize(binarize(gn)).size());
    m.count_gt = static_cast<long>(polygonize(binarize(gt)).size());
    if (auto pct = gn_count_pct(m.count_gn, m.count_gt)) {
        m.gn_count_pct = *pct;
        m.gn_count_defined = true;
    }
    return m;
}

GaussianStats gaussian_stats(const std::vector<std::vector<double>>& features) {
    if (features.size() < 2) throw DataError("gaussian stats need at least 2 samples");
    const long n = static_cast<long>(features.size());
    const long d = static_cast<long>(features[0].size());
    for (const auto& f : features)
        if (static_cast<long>(f.size()) != d)
            throw DataError("feature dimension mismatch inside sample set");

    GaussianStats g;
    g.n = n;
    g.mu = Eigen::VectorXd::Zero(d);
    for (const auto& f : features)
        for (long j = 0; j < d; ++j) g.mu[j] += f[j];
    g.mu /= static_cast<double>(n);

    g.sigma = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd c(d);
    for (const auto& f : features) {
        for (long j = 0; j < d; ++j) c[j] = f[j] - g.mu[j];
        g.sigma.noalias() += c * c.transpose();
    }
    g.sigma /= static_cast<double>(n - 1);
    g.sigma = ((g.sigma + g.sigma.transpose()) * 0.5).eval();
    return g;
}

namespace {

Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

double trace_sqrtm_psd(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
    return es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

}  // namespace

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
    if (a.mu.size() != b.mu.size()) throw DataError("feature dimension mismatch between sets");
    Eigen::MatrixXd sa = sqrtm_psd(a.sigma);
    Eigen::MatrixXd prod = sa * b.sigma * sa;
    prod = ((prod + prod.transpose()) * 0.5).eval();
    double trace_term = a.sigma.trace() + b.sigma.trace() - 2.0 * trace_sqrtm_psd(prod);
    double d2 = (a.mu - b.mu).squaredNorm() + trace_term;
    if (!std::isfinite(d2)) throw NumericError("non-finite Frechet distance");
    // eigensolver slop scales with the covariance magnitude; only hard
    // negativity (a real bug) should throw
    const double floor = -1e-6 * std::max(1.0, a.sigma.trace() + b.sigma.trace());
    if (d2 < floor) throw NumericError("Frechet distance " + format_double(d2) + " below floor");
    return std::max(0.0, d2);
}

std::vector<double> feature_extract(const Image& img) {
    Image mask = binarize(img);
    const int w = mask.width, h = mask.height;
    const double total = static_cast<double>(w) * h;

    std::vector<double> f;
    f.reserve(kFeatureDim);

    long set = 0;
    for (uint8_t v : mask.data) set += v ? 1 : 0;
    f.push_back(static_cast<double>(set) / total);
    f.push_back(static_cast<double>(polygonize(mask).size()));

    // 8x8 block densities (block edges at i*dim/8)
    for (int by = 0; by < 8; ++by) {
        for (int bx = 0; bx < 8; ++bx) {
            int y0 = by * h / 8, y1 = (by + 1) * h / 8;
            int x0 = bx * w / 8, x1 = (bx + 1) * w / 8;
            long cnt = 0;
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x)
                    cnt += mask.data[static_cast<size_t>(y) * w + x] ? 1 : 0;
            long area = static_cast<long>(y1 - y0) * (x1 - x0);
            f.push_back(area > 0 ? static_cast<double>(cnt) / area : 0.0);
        }
    }

    // 16-bin oriented-edge histogram over interior central differences,
    // normalized by tile area so tiles of different size stay comparable
    std::vector<double> hist(16, 0.0);
    for (int y = 1; y + 1 < h; ++y) {
        for (int x = 1; x + 1 < w; ++x) {
            auto at = [&](int yy, int xx) {
                return mask.data[static_cast<size_t>(yy) * w + xx] ? 1.0 : 0.0;
            };
            double gx = at(y, x + 1) - at(y, x - 1);
            double gy = at(y + 1, x) - at(y - 1, x);
            if (gx == 0.0 && gy == 0.0) continue;
            double ang = std::atan2(gy, gx);  // (-pi, pi]
            int bin = static_cast<int>(std::floor((ang + kPi) / (2.0 * kPi / 16.0)));
            bin = std::clamp(bin, 0, 15);
            hist[bin] += 1.0;
        }
    }
    for (double v : hist) f.push_back(v / total);
    return f;
}

RegionReport region_report(const std::vector<Image>& gn_tiles, const std::vector<Image>& gt_tiles,
                           const std::vector<TileId>& tile_ids, GnCountMode mode,
                           const std::vector<std::vector<double>>* gn_features,
                           const std::vector<std::vector<double>>* gt_features) {
    if (gn_tiles.empty()) throw DataError("region report needs at least one tile pair");
    if (gn_tiles.size() != gt_tiles.size() || gn_tiles.size() != tile_ids.size())
        throw DataError("generated/ground-truth/tile-id counts differ");
    if (gn_features && gn_features->size() != gn_tiles.size())
        throw DataError("external generated-feature rows do not match the tile count");
    if (gt_features && gt_features->size() != gt_tiles.size())
        throw DataError("external ground-truth-feature rows do not match the tile count");

    RegionReport r;
    r.gn_count_mode = mode;
    const long n = static_cast<long>(gn_tiles.size());
    r.tiles.resize(n);

#pragma omp parallel for schedule(static) if (parallel_kernels())
    for (long i = 0; i < n; ++i)
        r.tiles[i] = tile_pair_metrics(gn_tiles[i], gt_tiles[i], tile_ids[i]);

    double sum_iou = 0.0, sum_abs_dsc = 0.0, sum_pct = 0.0;
    long total_gn = 0, total_gt = 0;
    for (const auto& m : r.tiles) {
        if (m.iou_defined) {
            sum_iou += m.iou;
            ++r.iou_tiles;
        } else {
            ++r.undefined_iou_tiles;
        }
        sum_abs_dsc += std::fabs(m.delta_site_cover);
        if (m.gn_count_defined) {
            sum_pct += m.gn_count_pct;
            ++r.gn_count_tiles;
        } else {
            ++r.undefined_gn_count_tiles;
        }
        total_gn += m.count_gn;
        total_gt += m.count_gt;
    }
    r.mean_iou = r.iou_tiles > 0 ? sum_iou / r.iou_tiles : 0.0;
    r.mean_abs_delta_site_cover = sum_abs_dsc / static_cast<double>(n);
    if (mode == GnCountMode::PerTileMean) {
        r.mean_gn_count_pct = r.gn_count_tiles > 0 ? sum_pct / r.gn_count_tiles : 0.0;
    } else {
        r.mean_gn_count_pct =
            total_gt > 0 ? 100.0 * static_cast<double>(total_gn) / total_gt : 0.0;
        r.gn_count_tiles = total_gt > 0 ? n : 0;
    }

    if (n >= 2) {
        std::vector<std::vector<double>> fg, ft;
        if (gn_features) {
            fg = *gn_features;
        } else {
            fg.resize(n);
#pragma omp parallel for schedule(static) if (parallel_kernels())
            for (long i = 0; i < n; ++i) fg[i] = feature_extract(gn_tiles[i]);
        }
        if (gt_features) {
            ft = *gt_features;
        } else {
            ft.resize(n);
#pragma omp parallel for schedule(static) if (parallel_kernels())
            for (long i = 0; i < n; ++i) ft[i] = feature_extract(gt_tiles[i]);
        }
        r.fid = frechet_distance(gaussian_stats(fg), gaussian_stats(ft));
        r.fid_defined = true;
        if (gn_features || gt_features) r.feature_source = "external";
    }
    return r;
}

std::vector<std::vector<double>> read_feature_matrix(const std::string& path) {
    std::string blob = read_text_file(path);
    std::vector<std::vector<double>> rows;
    if (blob.size() >= 4 && blob.compare(0, 4, "GFFB") == 0) {
        if (blob.size() < 12) throw DataError(path + ": truncated binary feature file");
        uint32_t n = 0, d = 0;
        std::memcpy(&n, blob.data() + 4, 4);
        std::memcpy(&d, blob.data() + 8, 4);
        size_t need = 12 + static_cast<size_t>(n) * d * sizeof(double);
        if (blob.size() != need)
            throw DataError(path + ": binary feature file size does not match header");
        rows.assign(n, std::vector<double>(d));
        size_t off = 12;
        for (uint32_t i = 0; i < n; ++i)
            for (uint32_t j = 0; j < d; ++j) {
                std::memcpy(&rows[i][j], blob.data() + off, sizeof(double));
                off += sizeof(double);
            }
        return rows;
    }

    std::istringstream in(blob);
    long n = 0, d = 0;
    if (!(in >> n >> d) || n < 0 || d <= 0)
        throw DataError(path + ": bad feature matrix header (want: n d)");
    rows.assign(n, std::vector<double>(d));
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < d; ++j)
            if (!(in >> rows[i][j]))
                throw DataError(path + ": feature matrix ends early at row " + std::to_string(i));
    double extra;
    if (in >> extra) throw DataError(path + ": trailing data after feature matrix");
    return rows;
}

void write_feature_matrix_text(const std::string& path,
                               const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    size_t d = rows.empty() ? 0 : rows[0].size();
    out << rows.size() << " " << d << "\n";
    for (const auto& r : rows) {
        for (size_t j = 0; j < r.size(); ++j) out << (j ? " " : "") << format_double(r[j]);
        out << "\n";
    }
    write_text_file(path, out.str());
}

std::string report_tile_line(const TilePairMetrics& m) {
    nlohmann::ordered_json j;
    j["tile"] = m.tile.str();
    if (m.iou_defined)
        j["iou"] = m.iou;
    else
        j["iou"] = nullptr;
    j["delta_site_cover"] = m.delta_site_cover;
    if (m.gn_count_defined)
        j["gn_count_pct"] = m.gn_count_pct;
    else
        j["gn_count_pct"] = nullptr;
    j["count_gn"] = m.count_gn;
    j["count_gt"] = m.count_gt;
    return j.dump();
}

std::string report_summary_json(const RegionReport& r) {
    nlohmann::ordered_json j;
    j["tiles"] = r.tiles.size();
    j["mean_iou"] = r.mean_iou;
    j["iou_tiles"] = r.iou_tiles;
    j["undefined_iou_tiles"] = r.undefined_iou_tiles;
    j["mean_abs_delta_site_cover"] = r.mean_abs_delta_site_cover;
    j["mean_gn_count_pct"] = r.mean_gn_count_pct;
    j["gn_count_tiles"] = r.gn_count_tiles;
    j["undefined_gn_count_tiles"] = r.undefined_gn_count_tiles;
    j["gn_count_mode"] =
        r.gn_count_mode == GnCountMode::PerTileMean ? "per-tile-mean" : "ratio-of-totals";
    if (r.fid_defined)
        j["fid"] = r.fid;
    else
        j["fid"] = nullptr;
    j["feature_source"] = r.feature_source;
    return j.dump(2);
}

}  // namespace geoforge
