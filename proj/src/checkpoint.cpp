#include "geoforge/checkpoint.hpp"

#include <cstring>
#include <map>

#include "geoforge/common.hpp"

namespace geoforge {

namespace {

constexpr char kMagic[8] = {'G', 'E', 'O', 'F', 'D', 'I', 'F', 'F'};
constexpr uint32_t kVersion = 1;

struct Writer {
    std::string buf;

    void raw(const void* p, size_t n) { buf.append((const char*)p, n); }
    void u32(uint32_t v) { raw(&v, 4); }
    void i64(int64_t v) { raw(&v, 8); }
    void f64(double v) { raw(&v, 8); }
    void f64s(const std::vector<double>& v) { raw(v.data(), v.size() * 8); }
    void str(const std::string& s) {
        u32((uint32_t)s.size());
        raw(s.data(), s.size());
    }
};

struct Reader {
    const std::string& buf;
    size_t off = 0;

    void raw(void* p, size_t n) {
        if (off + n > buf.size()) throw DataError("checkpoint truncated");
        std::memcpy(p, buf.data() + off, n);
        off += n;
    }
    uint32_t u32() {
        uint32_t v;
        raw(&v, 4);
        return v;
    }
    int64_t i64() {
        int64_t v;
        raw(&v, 8);
        return v;
    }
    double f64() {
        double v;
        raw(&v, 8);
        return v;
    }
    void f64s(std::vector<double>& v) { raw(v.data(), v.size() * 8); }
    std::string str() {
        std::string s((size_t)u32(), '\0');
        raw(s.data(), s.size());
        return s;
    }
};

}  // namespace

void save_checkpoint(const std::string& path, const TrainState& st) {
    Writer w;
    w.raw(kMagic, 8);
    w.u32(kVersion);

    const ModelConfig& c = st.model.cfg;
    w.i64(c.img_size);
    w.i64(c.in_ch);
    w.i64(c.cond_ch);
    w.i64(c.base_ch);
    w.i64(c.cond_width);
    w.i64(c.embed_dim);
    w.i64(c.text_dim);

    w.i64(st.sched.T);
    for (long t = 1; t <= st.sched.T; ++t) w.f64(st.sched.beta[(size_t)t]);

    w.i64(st.step);
    w.i64(st.opt.step_count);
    w.f64(st.opt.lr);
    w.f64(st.opt.beta1);
    w.f64(st.opt.beta2);
    w.f64(st.opt.eps);
    w.str(st.rng.serialize());
    w.i64((int64_t)st.loss_history.size());
    w.f64s(st.loss_history);

    // const_cast: visit_params is non-const only because it hands out Param&
    auto& model = const_cast<Denoiser&>(st.model);
    std::vector<Param*> ps = model.params();
    w.i64((int64_t)ps.size());
    for (Param* p : ps) {
        w.str(p->name);
        w.u32((uint32_t)p->w.rank());
        for (long d : p->w.shape) w.i64(d);
        w.f64s(p->w.data);
        w.f64s(p->m.data);
        w.f64s(p->v.data);
    }
    write_text_file(path, w.buf);
}

TrainState load_checkpoint(const std::string& path) {
    const std::string bytes = read_text_file(path);
    Reader r{bytes};
    char magic[8];
    r.raw(magic, 8);
    if (std::memcmp(magic, kMagic, 8) != 0) throw DataError("not a checkpoint: " + path);
    const uint32_t version = r.u32();
    if (version != kVersion)
        throw DataError("unsupported checkpoint version " + std::to_string(version));

    ModelConfig c;
    c.img_size = r.i64();
    c.in_ch = r.i64();
    c.cond_ch = r.i64();
    c.base_ch = r.i64();
    c.cond_width = r.i64();
    c.embed_dim = r.i64();
    c.text_dim = r.i64();

    TrainState st;
    st.sched.T = r.i64();
    if (st.sched.T < 1) throw DataError("checkpoint: bad schedule length");
    st.sched.beta.assign((size_t)st.sched.T + 1, 0.0);
    st.sched.alpha_bar.assign((size_t)st.sched.T + 1, 1.0);
    for (long t = 1; t <= st.sched.T; ++t) {
        st.sched.beta[(size_t)t] = r.f64();
        st.sched.alpha_bar[(size_t)t] =
            st.sched.alpha_bar[(size_t)t - 1] * (1.0 - st.sched.beta[(size_t)t]);
    }

    st.step = r.i64();
    st.opt.step_count = r.i64();
    st.opt.lr = r.f64();
    st.opt.beta1 = r.f64();
    st.opt.beta2 = r.f64();
    st.opt.eps = r.f64();
    st.rng.deserialize(r.str());
    st.loss_history.assign((size_t)r.i64(), 0.0);
    r.f64s(st.loss_history);

    st.model.init(c, 0);
    std::map<std::string, Param*> by_name;
    for (Param* p : st.model.params()) by_name[p->name] = p;

    const int64_t count = r.i64();
    if ((size_t)count != by_name.size())
        throw DataError("checkpoint: parameter count mismatch");
    for (int64_t i = 0; i < count; ++i) {
        const std::string name = r.str();
        auto it = by_name.find(name);
        if (it == by_name.end()) throw DataError("checkpoint: unknown parameter " + name);
        Param* p = it->second;
        const uint32_t rank = r.u32();
        if ((int)rank != p->w.rank()) throw DataError("checkpoint: rank mismatch for " + name);
        for (int d = 0; d < (int)rank; ++d)
            if (r.i64() != p->w.shape[(size_t)d])
                throw DataError("checkpoint: shape mismatch for " + name);
        r.f64s(p->w.data);
        r.f64s(p->m.data);
        r.f64s(p->v.data);
    }
    return st;
}

}  // namespace geoforge
