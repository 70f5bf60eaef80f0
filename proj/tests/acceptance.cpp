// Acceptance gate: one pass/fail line per criterion, exit 0 only if all pass.
//
// The heavyweight end-to-end criterion shares one synthetic dataset with the
// completeness criteria; its build time is charged to the end-to-end budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geoforge/app.hpp"
#include "geoforge/checkpoint.hpp"
#include "geoforge/common.hpp"
#include "geoforge/completeness.hpp"
#include "geoforge/condition.hpp"
#include "geoforge/diffusion.hpp"
#include "geoforge/manifest.hpp"
#include "geoforge/metrics.hpp"
#include "geoforge/nn.hpp"
#include "geoforge/png_io.hpp"
#include "geoforge/tilegrid.hpp"
#include "geoforge/vectorize.hpp"

using namespace geoforge;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- harness

struct Criterion {
    bool ok = true;
    std::ostringstream note;

    void require(bool cond, const std::string& why) {
        if (!cond) {
            ok = false;
            if (note.tellp() > 0) note << "; ";
            note << why;
        }
    }
    void info(const std::string& msg) {
        if (note.tellp() > 0) note << "; ";
        note << msg;
    }
};

// library subcommands log to stdout; keep the acceptance output to the
// criterion lines
struct CoutSilencer {
    std::streambuf* old;
    std::ostringstream sink;
    CoutSilencer() : old(std::cout.rdbuf(sink.rdbuf())) {}
    ~CoutSilencer() { std::cout.rdbuf(old); }
};

fs::path work_root() {
    static fs::path root = [] {
        fs::path p = fs::temp_directory_path() / "geoforge_acceptance";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string region_str(double w, double s, double e, double n) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%.9f,%.9f,%.9f,%.9f", w, s, e, n);
    return buf;
}

// axis-aligned region covering exactly cols x rows tiles from the tile at p
std::string region_for_tiles(LonLat p, int z, int cols, int rows, TileId* first = nullptr) {
    const TileId t0 = tile_for_lonlat(p, z);
    if (first) *first = t0;
    const double west = lon_of_fx((double)t0.x + 0.01, z);
    const double east = lon_of_fx((double)t0.x + cols - 0.01, z);
    const double north = lat_of_fy((double)t0.y + 0.01, z);
    const double south = lat_of_fy((double)t0.y + rows - 0.01, z);
    return region_str(west, south, east, north);
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ------------------------------------------------- independent mask oracles

Image random_mask(Rng& rng, int w, int h, double density) {
    Image m;
    m.width = w;
    m.height = h;
    m.channels = 1;
    m.data.assign((size_t)w * h, 0);
    for (auto& px : m.data)
        if (rng.uniform() < density) px = 255;
    return m;
}

long oracle_cover(const Image& m) {
    long c = 0;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m.data[((size_t)y * m.width + x) * m.channels] >= 128) ++c;
    return c;
}

// 4-connected component count by scanline flood fill
long oracle_component_count(const Image& m) {
    const int w = m.width, h = m.height;
    std::vector<char> seen((size_t)w * h, 0);
    auto set = [&](int x, int y) {
        return m.data[((size_t)y * w + x) * m.channels] >= 128;
    };
    long components = 0;
    std::vector<int> stack;
    for (int sy = 0; sy < h; ++sy)
        for (int sx = 0; sx < w; ++sx) {
            if (!set(sx, sy) || seen[(size_t)sy * w + sx]) continue;
            ++components;
            stack.push_back(sy * w + sx);
            seen[(size_t)sy * w + sx] = 1;
            while (!stack.empty()) {
                const int cur = stack.back();
                stack.pop_back();
                const int cx = cur % w, cy = cur / w;
                const int nx[4] = {cx - 1, cx + 1, cx, cx};
                const int ny[4] = {cy, cy, cy - 1, cy + 1};
                for (int k = 0; k < 4; ++k) {
                    if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h) continue;
                    const size_t idx = (size_t)ny[k] * w + nx[k];
                    if (seen[idx] || !set(nx[k], ny[k])) continue;
                    seen[idx] = 1;
                    stack.push_back(ny[k] * w + nx[k]);
                }
            }
        }
    return components;
}

// ------------------------------------------------------------ shared corpus

constexpr int kE2eZoom = 17;
constexpr int kE2eCols = 24, kE2eRows = 24;  // 576 tiles
constexpr uint64_t kE2eSeed = 20;

struct SharedDataset {
    std::string dir;
    std::vector<TileRecord> records;
    double build_seconds = 0;
};

const SharedDataset& shared_dataset() {
    static SharedDataset ds = [] {
        SharedDataset d;
        d.dir = (work_root() / "e2e_dataset").string();
        const auto t0 = std::chrono::steady_clock::now();
        app::BuildDatasetOpts b;
        b.synthetic_style = "grid";
        b.region = region_for_tiles({13.30, 52.50}, kE2eZoom, kE2eCols, kE2eRows);
        b.out_dir = d.dir;
        b.common.overrides = {"tile_pixels=64", "zoom=" + std::to_string(kE2eZoom),
                              "seed=" + std::to_string(kE2eSeed)};
        {
            CoutSilencer quiet;
            app::run_build_dataset(b);
        }
        d.build_seconds = elapsed_s(t0);
        d.records = read_manifest(d.dir + "/manifest.jsonl");
        return d;
    }();
    return ds;
}

// degrade every tile of the shared dataset with cycling removal fractions and
// classify it with the perfect-generator surrogate (the pristine target)
struct CompletenessCorpus {
    long tiles = 0;
    long rule_agreements = 0;  // library classify(site_cover_ratio) vs hand rule
    std::vector<MapClass> truths, predictions;
    double mean_ratio[3] = {0, 0, 0};  // finite ratios by predicted class
    long finite_n[3] = {0, 0, 0};
    long true_count[3] = {0, 0, 0};
};

const CompletenessCorpus& completeness_corpus() {
    static CompletenessCorpus c = [] {
        CompletenessCorpus cc;
        const SharedDataset& ds = shared_dataset();
        const std::vector<double> fractions = {0.0, 0.1, 0.3, 0.5, 0.6, 0.9, 1.0};
        double ratio_sum[3] = {0, 0, 0};
        for (size_t i = 0; i < ds.records.size(); ++i) {
            const TileRecord& r = ds.records[i];
            const Image target = binarize(read_png(ds.dir + "/" + r.target_path));
            const auto polys = polygonize(target, r.tile, 64);
            const double f = fractions[i % fractions.size()];
            const DegradedTile d =
                degrade(polys, target.width, f, hash_combine(kE2eSeed, (uint64_t)i));

            const double ratio = site_cover_ratio(target, d.mask);
            const MapClass predicted = classify(ratio);

            // hand-computed surrogate rule: independent pixel counts, then the
            // ratio thresholds applied longhand
            const long cover_gt = oracle_cover(target);
            const long cover_deg = oracle_cover(d.mask);
            double hand_ratio;
            if (cover_deg == 0)
                hand_ratio = cover_gt == 0 ? 1.0 : std::numeric_limits<double>::infinity();
            else
                hand_ratio = (double)cover_gt / (double)cover_deg;
            MapClass hand;
            if (hand_ratio <= 1.6)
                hand = MapClass::Mapped;
            else if (hand_ratio <= 5.0)
                hand = MapClass::PartiallyMapped;
            else
                hand = MapClass::Unmapped;

            ++cc.tiles;
            if (predicted == hand && ratio == hand_ratio) ++cc.rule_agreements;
            cc.truths.push_back(d.true_class);
            cc.predictions.push_back(predicted);
            ++cc.true_count[(int)d.true_class];
            if (std::isfinite(ratio)) {
                ratio_sum[(int)predicted] += ratio;
                ++cc.finite_n[(int)predicted];
            }
        }
        for (int k = 0; k < 3; ++k)
            cc.mean_ratio[k] = cc.finite_n[k] > 0 ? ratio_sum[k] / cc.finite_n[k] : 0.0;
        return cc;
    }();
    return c;
}

// -------------------------------------------------------------- criteria

// 1. per-tile metrics match brute-force pixel/polygon counting exactly
Criterion criterion_metric_oracles() {
    Criterion c;
    Rng rng(1001);
    long pairs = 0, exact = 0;
    for (int it = 0; it < 1000; ++it) {
        const int w = 24 + 8 * (int)rng.below(2);
        const Image gn = random_mask(rng, w, w, rng.uniform(0.0, 0.8));
        const Image gt = random_mask(rng, w, w, rng.uniform(0.0, 0.8));
        const TileId tile{15, 100 + it, 200};
        const TilePairMetrics m = tile_pair_metrics(gn, gt, tile);

        // pixel counts, recomputed independently
        long inter = 0, uni = 0;
        for (size_t i = 0; i < gn.data.size(); ++i) {
            const bool a = gn.data[i] >= 128, b = gt.data[i] >= 128;
            if (a && b) ++inter;
            if (a || b) ++uni;
        }
        const long cover_gn = oracle_cover(gn), cover_gt = oracle_cover(gt);
        const long n_gn = oracle_component_count(gn), n_gt = oracle_component_count(gt);

        bool good = true;
        if (uni == 0)
            good = good && !m.iou_defined;
        else
            good = good && m.iou_defined && m.iou == (double)inter / (double)uni;
        good = good &&
               m.delta_site_cover ==
                   100.0 * (double)(cover_gn - cover_gt) / (double)((long)gn.data.size());
        good = good && m.count_gn == n_gn && m.count_gt == n_gt;
        if (n_gt == 0)
            good = good && !m.gn_count_defined;
        else
            good = good && m.gn_count_defined &&
                   m.gn_count_pct == 100.0 * (double)n_gn / (double)n_gt;
        ++pairs;
        if (good) ++exact;
    }
    c.require(exact == pairs, "only " + std::to_string(exact) + " of 1000 pairs matched");
    c.info(std::to_string(exact) + "/" + std::to_string(pairs) +
           " random pairs exact (iou, site cover, counts; tolerance 0)");
    return c;
}

// 2. Frechet distance reproduces analytic closed forms
Criterion criterion_frechet() {
    Criterion c;
    Rng rng(1002);

    double worst_1d = 0;
    for (int it = 0; it < 100; ++it) {
        GaussianStats a, b;
        a.mu = Eigen::VectorXd::Constant(1, rng.uniform(-5.0, 5.0));
        b.mu = Eigen::VectorXd::Constant(1, rng.uniform(-5.0, 5.0));
        const double va = rng.uniform(0.01, 4.0), vb = rng.uniform(0.01, 4.0);
        a.sigma = Eigen::MatrixXd::Constant(1, 1, va);
        b.sigma = Eigen::MatrixXd::Constant(1, 1, vb);
        a.n = b.n = 16;
        const double expect = (a.mu(0) - b.mu(0)) * (a.mu(0) - b.mu(0)) +
                              (std::sqrt(va) - std::sqrt(vb)) * (std::sqrt(va) - std::sqrt(vb));
        worst_1d = std::max(worst_1d, std::abs(frechet_distance(a, b) - expect));
    }
    c.require(worst_1d <= 1e-10,
              "1-D closed form off by " + format_double(worst_1d) + " (> 1e-10)");

    double worst_same = 0;
    for (int it = 0; it < 20; ++it) {
        const int d = 8;
        Eigen::MatrixXd m = Eigen::MatrixXd::NullaryExpr(
            d, d, [&](Eigen::Index, Eigen::Index) { return rng.uniform(-1.0, 1.0); });
        GaussianStats a;
        a.mu = Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return rng.uniform(-2.0, 2.0); });
        a.sigma = m * m.transpose() + 0.05 * Eigen::MatrixXd::Identity(d, d);
        a.n = 16;
        worst_same = std::max(worst_same, std::abs(frechet_distance(a, a)));
    }
    c.require(worst_same <= 1e-8,
              "identical stats gave " + format_double(worst_same) + " (> 1e-8)");

    double worst_diag = 0;
    for (int it = 0; it < 100; ++it) {
        const int d = 16;
        GaussianStats a, b;
        a.mu = Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return rng.uniform(-3.0, 3.0); });
        b.mu = Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return rng.uniform(-3.0, 3.0); });
        Eigen::VectorXd va = Eigen::VectorXd::NullaryExpr(
            d, [&](Eigen::Index) { return rng.uniform(0.05, 3.0); });
        Eigen::VectorXd vb = Eigen::VectorXd::NullaryExpr(
            d, [&](Eigen::Index) { return rng.uniform(0.05, 3.0); });
        a.sigma = va.asDiagonal();
        b.sigma = vb.asDiagonal();
        a.n = b.n = 16;
        double expect = (a.mu - b.mu).squaredNorm();
        for (int i = 0; i < d; ++i)
            expect += va(i) + vb(i) - 2.0 * std::sqrt(va(i) * vb(i));
        worst_diag = std::max(worst_diag, std::abs(frechet_distance(a, b) - expect));
    }
    c.require(worst_diag <= 1e-8,
              "diagonal 16-D closed form off by " + format_double(worst_diag) + " (> 1e-8)");

    c.info("1-D max err " + format_double(worst_1d) + ", identical " + format_double(worst_same) +
           ", diagonal 16-D " + format_double(worst_diag));
    return c;
}

// 3. surrogate completeness classes agree with the analytic ratio rule
Criterion criterion_completeness_rule() {
    Criterion c;
    const CompletenessCorpus& cc = completeness_corpus();
    c.require(cc.tiles >= 500, "corpus too small: " + std::to_string(cc.tiles));
    c.require(cc.rule_agreements == cc.tiles,
              std::to_string(cc.tiles - cc.rule_agreements) + " tiles disagree with the rule");
    for (int k = 0; k < 3; ++k)
        c.require(cc.true_count[k] > 0,
                  std::string("class ") + map_class_name((MapClass)k) + " is unpopulated");
    const double m0 = cc.mean_ratio[0], m1 = cc.mean_ratio[1], m2 = cc.mean_ratio[2];
    c.require(m0 >= 1.0 && m0 <= 1.6,
              "Mapped mean ratio " + format_double(m0) + " outside [1.0, 1.6]");
    c.require(m0 < m1 && m1 < m2, "stratum ratio ordering violated");
    {
        std::ostringstream s;
        s.precision(3);
        s << std::fixed << cc.rule_agreements << "/" << cc.tiles
          << " tiles agree; mean ratios M " << m0 << " < P " << m1 << " < U " << m2;
        c.info(s.str());
    }
    return c;
}

// 4. Unmapped precision/recall in the perfect-surrogate setting
Criterion criterion_completeness_scoring() {
    Criterion c;
    const CompletenessCorpus& cc = completeness_corpus();
    const ClassificationResult r = score(cc.predictions, cc.truths);
    const int u = (int)MapClass::Unmapped;
    c.require(r.precision[u] >= 0.95,
              "Unmapped precision " + format_double(r.precision[u]) + " < 0.95");
    c.require(r.recall[u] >= 0.85, "Unmapped recall " + format_double(r.recall[u]) + " < 0.85");
    {
        std::ostringstream s;
        s.precision(3);
        s << std::fixed << "Unmapped precision " << r.precision[u] << ", recall " << r.recall[u]
          << ", accuracy " << r.accuracy << " over " << r.total << " tiles";
        c.info(s.str());
    }
    return c;
}

// 5. gradient checks per layer type, monotone schedule, forward-process MC
Criterion criterion_numerics() {
    Criterion c;
    Rng rng(1005);
    long checked = 0, failed = 0;
    auto fd_check = [&](double grad, double fd, double tol) {
        ++checked;
        if (std::abs(grad - fd) > tol * std::max(1.0, std::abs(fd))) ++failed;
    };

    {  // convolution: 64 sampled weights + all biases
        Conv2d conv;
        conv.init("c", ConvSpec{4, 4, 3, 1, 1}, &rng);
        Tensor X({2, 4, 6, 6});
        for (auto& v : X.data) v = rng.normal();
        Tensor R(conv.forward(X).shape);
        for (auto& v : R.data) v = rng.uniform(-1.0, 1.0);
        auto loss = [&]() { return conv.forward(X).dot(R); };
        conv.visit([](Param& p) { p.zero_grad(); });
        conv.backward(X, R, false);
        const double h = 1e-5;
        auto probe = [&](Param& p, size_t i) {
            const double keep = p.w.data[i];
            p.w.data[i] = keep + h;
            const double lp = loss();
            p.w.data[i] = keep - h;
            const double lm = loss();
            p.w.data[i] = keep;
            fd_check(p.g.data[i], (lp - lm) / (2 * h), 1e-3);
        };
        for (int k = 0; k < 64; ++k) probe(conv.W, rng.below(conv.W.w.data.size()));
        for (size_t i = 0; i < conv.b.w.data.size(); ++i) probe(conv.b, i);
    }

    {  // linear: every weight and bias (104 parameters)
        Linear lin;
        lin.init("l", 12, 8, &rng);
        Tensor X({3, 12});
        for (auto& v : X.data) v = rng.normal();
        Tensor R(lin.forward(X).shape);
        for (auto& v : R.data) v = rng.uniform(-1.0, 1.0);
        auto loss = [&]() { return lin.forward(X).dot(R); };
        lin.visit([](Param& p) { p.zero_grad(); });
        lin.backward(X, R, false);
        const double h = 1e-5;
        lin.visit([&](Param& p) {
            for (size_t i = 0; i < p.w.data.size(); ++i) {
                const double keep = p.w.data[i];
                p.w.data[i] = keep + h;
                const double lp = loss();
                p.w.data[i] = keep - h;
                const double lm = loss();
                p.w.data[i] = keep;
                fd_check(p.g.data[i], (lp - lm) / (2 * h), 1e-3);
            }
        });
    }

    {  // residual block: 72 sampled parameters across its six tensors
        ResBlock rb;
        rb.init("rb", 4, 6, rng);
        for (auto& v : rb.conv2.W.w.data) v = rng.uniform(-0.2, 0.2);
        Tensor x({2, 4, 6, 6});
        for (auto& v : x.data) v = rng.normal();
        Tensor cond({2, 6});
        for (auto& v : cond.data) v = rng.uniform(-1.0, 1.0);
        Tensor R;
        {
            ResBlock::Act act;
            R = Tensor(rb.forward(x, cond, act).shape);
            for (auto& v : R.data) v = rng.uniform(-1.0, 1.0);
        }
        auto loss = [&]() {
            ResBlock::Act act;
            return rb.forward(x, cond, act).dot(R);
        };
        ResBlock::Act act;
        rb.forward(x, cond, act);
        rb.visit([](Param& p) { p.zero_grad(); });
        Tensor dcond({2, 6});
        rb.backward(act, cond, R, dcond);
        const double h = 1e-5;
        rb.visit([&](Param& p) {
            for (int k = 0; k < 12; ++k) {
                const size_t i = rng.below(p.w.data.size());
                const double keep = p.w.data[i];
                p.w.data[i] = keep + h;
                const double lp = loss();
                p.w.data[i] = keep - h;
                const double lm = loss();
                p.w.data[i] = keep;
                fd_check(p.g.data[i], (lp - lm) / (2 * h), 1e-3);
            }
        });
    }

    {  // full denoiser: 2 sampled elements in each of its 112 tensors
        ModelConfig mc;
        mc.img_size = 8;
        mc.base_ch = 4;
        mc.cond_width = 8;
        mc.embed_dim = 8;
        mc.text_dim = 8;
        Denoiser model;
        model.init(mc, 1006);
        model.visit_params([&](Param& p) {
            for (auto& v : p.w.data) v = rng.uniform(-0.3, 0.3);
        });
        Tensor x({2, 1, 8, 8});
        for (auto& v : x.data) v = rng.normal();
        CondBatch cb;
        cb.lons = {13.0, 13.1};
        cb.lats = {52.0, 51.9};
        cb.captions = {embed_caption("tile one", mc.text_dim),
                       embed_caption("tile two", mc.text_dim)};
        cb.cond_img = Tensor({2, mc.cond_ch, mc.img_size, mc.img_size});
        for (auto& v : cb.cond_img.data) v = rng.uniform(0.0, 1.0);
        const std::vector<double> ts = {3.0, 11.0};
        Tensor R;
        {
            Tensor y = model.predict_eps(x, ts, cb);
            R = Tensor(y.shape);
            for (auto& v : R.data) v = rng.uniform(-1.0, 1.0);
        }
        auto loss = [&]() { return model.predict_eps(x, ts, cb).dot(R); };
        Denoiser::Acts acts;
        model.predict_eps(x, ts, cb, &acts);
        model.visit_params([](Param& p) { p.zero_grad(); });
        model.backward(acts, R);
        const double h = 1e-4;
        for (Param* p : model.params()) {
            for (int k = 0; k < 2; ++k) {
                const size_t i = rng.below(p->w.data.size());
                const double keep = p->w.data[i];
                p->w.data[i] = keep + h;
                const double lp = loss();
                p->w.data[i] = keep - h;
                const double lm = loss();
                p->w.data[i] = keep;
                fd_check(p->g.data[i], (lp - lm) / (2 * h), 1e-3);
            }
        }
    }

    c.require(failed == 0, std::to_string(failed) + " finite-difference checks failed");

    const NoiseSchedule sched = make_schedule(1000, 1e-4, 2e-2);
    bool monotone = true;
    for (long t = 1; t <= sched.T; ++t)
        if (!(sched.alpha_bar[t] < sched.alpha_bar[t - 1])) monotone = false;
    c.require(monotone, "alpha_bar is not strictly decreasing");

    // marginal variance of x_t is exactly 1 when x0 and eps are unit normal
    Rng mc_rng(1007);
    Tensor x0({1, 1, 250, 400}), eps(x0.shape);
    for (auto& v : x0.data) v = mc_rng.normal();
    for (auto& v : eps.data) v = mc_rng.normal();
    const Tensor xt = forward_diffuse(x0, 400, eps, sched);
    double mean = 0;
    for (double v : xt.data) mean += v;
    mean /= (double)xt.data.size();
    double var = 0;
    for (double v : xt.data) var += (v - mean) * (v - mean);
    var /= (double)(xt.data.size() - 1);
    c.require(std::abs(var - 1.0) <= 0.02,
              "forward-process variance " + format_double(var) + " off by more than 2%");

    {
        std::ostringstream s;
        s.precision(4);
        s << std::fixed << checked << " gradient probes (conv/linear/resblock/full model), 0 over"
          << " 1e-3 rel; MC variance " << var << " vs 1";
        c.info(s.str());
    }
    return c;
}

// 6. zero-initialized control branch: condition image cannot change the output
Criterion criterion_zero_conv() {
    Criterion c;
    ModelConfig mc;
    mc.img_size = 16;
    mc.base_ch = 8;
    mc.cond_width = 16;
    mc.embed_dim = 16;
    mc.text_dim = 16;
    Denoiser model;
    model.init(mc, 1008);

    const NoiseSchedule sched = make_schedule(40, 1e-4, 2e-2);
    const std::vector<long> steps = ddim_steps(sched.T, 8);

    CondBatch cb;
    cb.lons = {13.4};
    cb.lats = {52.5};
    cb.captions = {embed_caption("city tile of gridtown", mc.text_dim)};
    cb.cond_img = Tensor({1, mc.cond_ch, mc.img_size, mc.img_size});  // blank
    const Tensor blank = ddim_sample(model, sched, cb, steps, 1009);

    Rng rng(1010);
    int identical = 0;
    for (int it = 0; it < 10; ++it) {
        for (auto& v : cb.cond_img.data) v = rng.uniform(0.0, 1.0);
        const Tensor with_cond = ddim_sample(model, sched, cb, steps, 1009);
        if (with_cond.data == blank.data) ++identical;
    }
    c.require(identical == 10,
              "only " + std::to_string(identical) + "/10 condition images were inert");
    c.info(std::to_string(identical) + "/10 random condition images bit-identical to blank");
    return c;
}

// 7. desk-scale end-to-end: build, train, sample, evaluate
Criterion criterion_end_to_end() {
    Criterion c;
    const auto t0 = std::chrono::steady_clock::now();
    const SharedDataset& ds = shared_dataset();
    c.require(ds.records.size() >= 512,
              "dataset has only " + std::to_string(ds.records.size()) + " tiles");

    const std::vector<std::string> model_sets = {
        "tile_pixels=64",     "model.img_size=64", "model.base_ch=8",
        "model.cond_width=32", "model.embed_dim=16", "model.text_dim=16",
        "schedule.T=120",     "train.steps=1600",  "train.batch=4",
        "train.lr=0.002",     "train.log_every=400", "train.ckpt_every=0",
        "sample.ddim_steps=12", "seed=" + std::to_string(kE2eSeed)};

    const std::string ck = (work_root() / "e2e_ck.bin").string();
    {
        app::TrainOpts t;
        t.common.overrides = model_sets;
        t.manifest = ds.dir + "/manifest.jsonl";
        t.out_checkpoint = ck;
        t.split = "train";
        CoutSilencer quiet;
        app::run_train(t);
    }
    const TrainState st = load_checkpoint(ck);
    c.require(!st.loss_history.empty(), "empty loss history");
    double first = st.loss_history.empty() ? 0.0 : st.loss_history.front();
    double tail = 0;
    const size_t tail_n = std::min<size_t>(10, st.loss_history.size());
    for (size_t i = st.loss_history.size() - tail_n; i < st.loss_history.size(); ++i)
        tail += st.loss_history[i];
    tail /= (double)tail_n;
    c.require(tail <= 0.5 * first, "loss fell only from " + format_double(first) + " to " +
                                       format_double(tail) + " (< 50% drop)");

    auto sample_into = [&](const std::string& out, bool no_image) {
        app::SampleOpts s;
        s.common.overrides = model_sets;
        s.checkpoint = ck;
        s.manifest = ds.dir + "/manifest.jsonl";
        s.out_dir = out;
        s.split = "eval";
        s.seed = 33;
        s.no_image = no_image;
        CoutSilencer quiet;
        app::run_sample(s);
    };
    const std::string gen_cond = (work_root() / "e2e_gen_cond").string();
    const std::string gen_blank = (work_root() / "e2e_gen_blank").string();
    sample_into(gen_cond, false);
    sample_into(gen_blank, true);

    auto mean_iou_against_gt = [&](const std::string& gen_dir) {
        double sum = 0;
        long n = 0;
        for (const TileRecord& r : ds.records) {
            if (r.split != "eval") continue;
            const Image gn = read_png(tile_png_path(gen_dir, r.tile));
            const Image gt = read_png(ds.dir + "/" + r.target_path);
            if (auto iou = tile_iou(gn, gt)) {
                sum += *iou;
                ++n;
            }
        }
        return n > 0 ? sum / (double)n : 0.0;
    };
    const double iou_cond = mean_iou_against_gt(gen_cond);
    const double iou_blank = mean_iou_against_gt(gen_blank);
    c.require(iou_cond >= 0.15, "conditional IoU " + format_double(iou_cond) + " < 0.15");
    c.require(iou_cond >= 2.0 * iou_blank, "conditional IoU " + format_double(iou_cond) +
                                               " is not 2x the no-image IoU " +
                                               format_double(iou_blank));

    const double total_s = elapsed_s(t0) + ds.build_seconds;
    c.require(total_s <= 1800.0,
              "pipeline took " + format_double(total_s) + " s (> 30 min)");
    {
        std::ostringstream s;
        s.precision(3);
        s << std::fixed << ds.records.size() << " tiles; loss " << first << " -> " << tail
          << "; eval IoU with image " << iou_cond << " vs blank " << iou_blank << "; "
          << (long)total_s << " s total";
        c.info(s.str());
    }
    return c;
}

// 8. vectorization inverts rasterization exactly
Criterion criterion_vector_round_trip() {
    Criterion c;
    Rng rng(1011);
    long masks = 0, exact = 0, count_match = 0;
    for (int it = 0; it < 1000; ++it) {
        const int sizes[4] = {16, 24, 32, 48};
        const int w = sizes[it % 4];
        const Image m = random_mask(rng, w, w, rng.uniform(0.05, 0.8));
        const auto polys = polygonize(m);
        const Image back = rasterize_buildings(polys, w);
        ++masks;
        if (back.data == m.data) ++exact;
        if ((long)polys.size() == oracle_component_count(m)) ++count_match;
    }
    c.require(exact == masks, std::to_string(masks - exact) + " masks failed the round trip");
    c.require(count_match == masks,
              std::to_string(masks - count_match) + " masks disagree with the flood-fill count");
    c.info(std::to_string(exact) + "/" + std::to_string(masks) +
           " masks round-trip byte-exact; counts match flood fill");
    return c;
}

// 9. tile math round trips and matches the documented ground resolution
Criterion criterion_tile_math() {
    Criterion c;
    Rng rng(1012);
    double worst = 0;
    long tile_mismatch = 0;
    for (int it = 0; it < 100000; ++it) {
        const int z = (int)rng.below(19);
        const double lon = rng.uniform(-180.0, 180.0);
        const double lat = rng.uniform(-85.0, 85.0);
        worst = std::max(worst, std::abs(lon_of_fx(tile_fx(lon, z), z) - lon));
        worst = std::max(worst, std::abs(lat_of_fy(tile_fy(lat, z), z) - lat));

        const TileId t = tile_for_lonlat({lon, lat}, z);
        if (!(tile_for_lonlat(tile_center(t), z) == t)) ++tile_mismatch;
    }
    c.require(worst < 1e-9, "round-trip error " + format_double(worst) + " >= 1e-9 degrees");
    c.require(tile_mismatch == 0,
              std::to_string(tile_mismatch) + " tile centers landed in a different tile");

    const double width = tile_ground_width_m(15, 0.0);
    c.require(std::abs(width - 1223.0) / 1223.0 <= 0.03,
              "z15 equator width " + format_double(width) + " m is not within 3% of 1223 m");
    c.info("max round-trip error " + format_double(worst) + " deg over 1e5 tiles; z15 width " +
           format_double(width) + " m");
    return c;
}

// 10. build, train and sample are bit-reproducible
Criterion criterion_determinism() {
    Criterion c;
    const std::string region = region_for_tiles({13.35, 52.49}, 15, 2, 2);
    const std::vector<std::string> sets = {
        "tile_pixels=32",  "model.img_size=32",  "model.base_ch=8", "model.cond_width=16",
        "model.embed_dim=16", "model.text_dim=16", "schedule.T=8",  "train.steps=3",
        "train.batch=2",   "train.ckpt_every=0", "sample.ddim_steps=4", "seed=9"};

    auto build = [&](const std::string& dir) {
        app::BuildDatasetOpts b;
        b.synthetic_style = "grid";
        b.region = region;
        b.out_dir = dir;
        b.common.overrides = sets;
        CoutSilencer quiet;
        app::run_build_dataset(b);
    };
    const std::string d1 = (work_root() / "det_ds1").string();
    const std::string d2 = (work_root() / "det_ds2").string();
    build(d1);
    build(d2);
    c.require(slurp(d1 + "/manifest.jsonl") == slurp(d2 + "/manifest.jsonl"),
              "manifests differ");
    const auto recs = read_manifest(d1 + "/manifest.jsonl");
    bool tiles_equal = true;
    for (const auto& r : recs) {
        tiles_equal = tiles_equal && slurp(d1 + "/" + r.target_path) == slurp(d2 + "/" + r.target_path);
        tiles_equal = tiles_equal && slurp(d1 + "/" + r.roads_path) == slurp(d2 + "/" + r.roads_path);
        tiles_equal =
            tiles_equal && slurp(d1 + "/" + r.landuse_path) == slurp(d2 + "/" + r.landuse_path);
    }
    c.require(tiles_equal, "rasters differ between identical builds");

    auto train = [&](const std::string& ck) {
        app::TrainOpts t;
        t.common.overrides = sets;
        t.manifest = d1 + "/manifest.jsonl";
        t.out_checkpoint = ck;
        t.split = "all";
        CoutSilencer quiet;
        app::run_train(t);
    };
    const std::string ck1 = (work_root() / "det_ck1.bin").string();
    const std::string ck2 = (work_root() / "det_ck2.bin").string();
    train(ck1);
    train(ck2);
    c.require(slurp(ck1) == slurp(ck2), "checkpoints differ");
    c.require(slurp(ck1 + ".loss.txt") == slurp(ck2 + ".loss.txt"), "loss curves differ");

    auto sample = [&](const std::string& out) {
        app::SampleOpts s;
        s.common.overrides = sets;
        s.checkpoint = ck1;
        s.manifest = d1 + "/manifest.jsonl";
        s.out_dir = out;
        s.seed = 21;
        CoutSilencer quiet;
        app::run_sample(s);
    };
    const std::string g1 = (work_root() / "det_gen1").string();
    const std::string g2 = (work_root() / "det_gen2").string();
    sample(g1);
    sample(g2);
    bool gen_equal = true;
    for (const auto& r : recs)
        gen_equal =
            gen_equal && slurp(tile_png_path(g1, r.tile)) == slurp(tile_png_path(g2, r.tile));
    c.require(gen_equal, "sampled tiles differ between identical runs");
    c.info("build, train and sample each byte-identical across two runs (" +
           std::to_string(recs.size()) + " tiles)");
    return c;
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        std::function<Criterion()> fn;
    };
    const std::vector<Entry> entries = {
        {"metric oracles (iou, site cover, counts) exact on 1000 random pairs",
         criterion_metric_oracles},
        {"Frechet distance reproduces analytic closed forms", criterion_frechet},
        {"completeness surrogate agrees with the analytic ratio rule", criterion_completeness_rule},
        {"Unmapped stratum precision >= 0.95 and recall >= 0.85", criterion_completeness_scoring},
        {"gradient checks, monotone schedule, forward-process variance", criterion_numerics},
        {"zero-convolution init keeps condition images inert", criterion_zero_conv},
        {"end-to-end: 512+ tiles, loss halves, conditional IoU beats no-image 2x",
         criterion_end_to_end},
        {"vector round trip is exact on 1000 random masks", criterion_vector_round_trip},
        {"tile math round trips below 1e-9 degrees", criterion_tile_math},
        {"build/train/sample are bit-reproducible", criterion_determinism},
    };

    int failures = 0;
    for (size_t i = 0; i < entries.size(); ++i) {
        Criterion c;
        try {
            c = entries[i].fn();
        } catch (const std::exception& e) {
            c.ok = false;
            c.info(std::string("exception: ") + e.what());
        }
        if (!c.ok) ++failures;
        std::cout << (c.ok ? "PASS" : "FAIL") << " " << (i + 1) << "/10 " << entries[i].name
                  << " -- " << c.note.str() << "\n";
        std::cout.flush();
    }
    if (failures) std::cout << failures << " criteria failed\n";
    return failures == 0 ? 0 : 1;
}
