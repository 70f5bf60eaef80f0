#include "geoforge/completeness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "nlohmann/json.hpp"

namespace geoforge {

const char* map_class_name(MapClass c) {
    switch (c) {
        case MapClass::Mapped: return "Mapped";
        case MapClass::PartiallyMapped: return "PartiallyMapped";
        default: return "Unmapped";
    }
}

MapClass map_class_from_name(const std::string& name) {
    if (name == "Mapped") return MapClass::Mapped;
    if (name == "PartiallyMapped") return MapClass::PartiallyMapped;
    if (name == "Unmapped") return MapClass::Unmapped;
    throw DataError("unknown completeness class '" + name + "'");
}

DegradedTile degrade(const std::vector<BuildingPolygon>& gt_polys, int size, double fraction,
                     uint64_t seed, const CompletenessThresholds& th, bool area_weighted) {
    if (fraction < 0.0 || fraction > 1.0) throw DataError("removal fraction must be in [0,1]");
    DegradedTile d;
    d.removed_fraction = fraction;
    if (!gt_polys.empty()) d.tile = gt_polys.front().tile;

    const size_t n = gt_polys.size();
    const size_t k = static_cast<size_t>(std::ceil(fraction * static_cast<double>(n)));
    Rng rng(seed);

    std::vector<char> removed(n, 0);
    if (area_weighted) {
        // k sequential draws, each proportional to remaining polygon area
        std::vector<double> w(n);
        for (size_t i = 0; i < n; ++i) w[i] = static_cast<double>(gt_polys[i].area_px);
        for (size_t draw = 0; draw < k; ++draw) {
            double total = 0.0;
            for (size_t i = 0; i < n; ++i)
                if (!removed[i]) total += w[i];
            size_t pick = n;
            if (total > 0.0) {
                double u = rng.uniform() * total;
                double acc = 0.0;
                for (size_t i = 0; i < n; ++i) {
                    if (removed[i]) continue;
                    acc += w[i];
                    if (u < acc) {
                        pick = i;
                        break;
                    }
                }
            }
            if (pick == n) {  // zero-area leftovers: fall back to uniform
                std::vector<size_t> left;
                for (size_t i = 0; i < n; ++i)
                    if (!removed[i]) left.push_back(i);
                pick = left[rng.below(left.size())];
            }
            removed[pick] = 1;
        }
    } else {
        // partial Fisher-Yates: the first k slots of a shuffled index list
        std::vector<size_t> idx(n);
        std::iota(idx.begin(), idx.end(), size_t{0});
        for (size_t i = 0; i < k; ++i) {
            size_t j = i + rng.below(n - i);
            std::swap(idx[i], idx[j]);
        }
        for (size_t i = 0; i < k; ++i) removed[idx[i]] = 1;
    }

    std::vector<BuildingPolygon> kept;
    long kept_area = 0, total_area = 0;
    for (size_t i = 0; i < n; ++i) {
        total_area += gt_polys[i].area_px;
        if (!removed[i]) {
            kept.push_back(gt_polys[i]);
            kept_area += gt_polys[i].area_px;
        }
    }
    d.kept_fraction = n > 0 ? static_cast<double>(n - k) / static_cast<double>(n) : 1.0;
    d.kept_area_fraction =
        total_area > 0 ? static_cast<double>(kept_area) / static_cast<double>(total_area) : 1.0;
    d.mask = rasterize_buildings(kept, size);
    d.true_class = true_label(d.kept_fraction, th);
    return d;
}

MapClass true_label(double mapped_fraction, const CompletenessThresholds& th) {
    if (mapped_fraction >= th.mapped_fraction) return MapClass::Mapped;
    if (mapped_fraction >= th.partial_fraction) return MapClass::PartiallyMapped;
    return MapClass::Unmapped;
}

double site_cover_ratio(const Image& gen_tile, const Image& degraded_tile) {
    if (gen_tile.width != degraded_tile.width || gen_tile.height != degraded_tile.height)
        throw DataError("site-cover ratio needs equal tile dimensions");
    auto cover = [](const Image& m) {
        long c = 0;
        const int ch = m.channels;
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x)
                if (m.data[(static_cast<size_t>(y) * m.width + x) * ch] >= 128) ++c;
        return c;
    };
    long g = cover(gen_tile), d = cover(degraded_tile);
    if (d == 0) return g == 0 ? 1.0 : std::numeric_limits<double>::infinity();
    return static_cast<double>(g) / static_cast<double>(d);
}

MapClass classify(double ratio, const CompletenessThresholds& th) {
    if (ratio <= th.mapped_ratio) return MapClass::Mapped;
    if (ratio <= th.partial_ratio) return MapClass::PartiallyMapped;
    return MapClass::Unmapped;
}

ClassificationResult score(const std::vector<MapClass>& predictions,
                           const std::vector<MapClass>& truths) {
    if (predictions.empty()) throw DataError("classification score needs at least one sample");
    if (predictions.size() != truths.size())
        throw DataError("prediction/truth counts differ");

    ClassificationResult r;
    r.total = static_cast<long>(predictions.size());
    for (size_t i = 0; i < predictions.size(); ++i)
        ++r.confusion[static_cast<int>(truths[i])][static_cast<int>(predictions[i])];

    long trace = 0;
    double wp = 0, wr = 0, wf = 0;
    for (int c = 0; c < 3; ++c) {
        long row = 0, col = 0;
        for (int j = 0; j < 3; ++j) {
            row += r.confusion[c][j];
            col += r.confusion[j][c];
        }
        r.support[c] = row;
        long diag = r.confusion[c][c];
        trace += diag;
        r.never_predicted[c] = (col == 0);
        r.precision[c] = col > 0 ? static_cast<double>(diag) / col : 0.0;
        r.recall[c] = row > 0 ? static_cast<double>(diag) / row : 0.0;
        double pr = r.precision[c] + r.recall[c];
        r.f1[c] = pr > 0 ? 2.0 * r.precision[c] * r.recall[c] / pr : 0.0;
        wp += r.precision[c] * row;
        wr += r.recall[c] * row;
        wf += r.f1[c] * row;
    }
    r.weighted_precision = wp / r.total;
    r.weighted_recall = wr / r.total;
    r.weighted_f1 = wf / r.total;
    r.accuracy = static_cast<double>(trace) / r.total;
    return r;
}

std::string classification_table(const ClassificationResult& r) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3);
    out << "confusion matrix (rows = truth, cols = predicted)\n";
    out << std::setw(18) << "";
    for (int c = 0; c < 3; ++c) out << std::setw(17) << map_class_name(static_cast<MapClass>(c));
    out << "\n";
    for (int t = 0; t < 3; ++t) {
        out << std::setw(18) << std::left << map_class_name(static_cast<MapClass>(t))
            << std::right;
        for (int p = 0; p < 3; ++p) out << std::setw(17) << r.confusion[t][p];
        out << "\n";
    }
    out << "\n" << std::setw(18) << std::left << "class" << std::right << std::setw(11)
        << "precision" << std::setw(9) << "recall" << std::setw(10) << "f1-score" << std::setw(9)
        << "support" << "\n";
    for (int c = 0; c < 3; ++c) {
        out << std::setw(18) << std::left << map_class_name(static_cast<MapClass>(c))
            << std::right << std::setw(11) << r.precision[c] << std::setw(9) << r.recall[c]
            << std::setw(10) << r.f1[c] << std::setw(9) << r.support[c];
        if (r.never_predicted[c]) out << "  (never predicted)";
        out << "\n";
    }
    out << std::setw(18) << std::left << "weighted avg" << std::right << std::setw(11)
        << r.weighted_precision << std::setw(9) << r.weighted_recall << std::setw(10)
        << r.weighted_f1 << std::setw(9) << r.total << "\n";
    out << "accuracy " << r.accuracy << " (n=" << r.total << ")\n";
    return out.str();
}

std::string classification_json(const ClassificationResult& r) {
    nlohmann::ordered_json j;
    j["confusion"] = nlohmann::ordered_json::array();
    for (int t = 0; t < 3; ++t) j["confusion"].push_back({r.confusion[t][0], r.confusion[t][1],
                                                          r.confusion[t][2]});
    for (int c = 0; c < 3; ++c) {
        nlohmann::ordered_json e;
        e["precision"] = r.precision[c];
        e["recall"] = r.recall[c];
        e["f1"] = r.f1[c];
        e["support"] = r.support[c];
        e["never_predicted"] = r.never_predicted[c];
        j["classes"][map_class_name(static_cast<MapClass>(c))] = std::move(e);
    }
    j["weighted"] = {{"precision", r.weighted_precision},
                     {"recall", r.weighted_recall},
                     {"f1", r.weighted_f1}};
    j["accuracy"] = r.accuracy;
    j["total"] = r.total;
    return j.dump(2);
}

}  // namespace geoforge
