#include "bttf/serialize.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace bttf {

namespace {

constexpr std::uint32_t kModelVersion = 1;
constexpr std::uint32_t kCacheVersion = 1;
constexpr char kModelMagic[4] = {'B', 'T', 'L', 'M'};
constexpr char kCacheMagic[4] = {'B', 'T', 'F', 'C'};

template <class T>
void put(std::string& out, const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const auto* p = reinterpret_cast<const char*>(&v);
    out.append(p, sizeof(T));
}

void put_doubles(std::string& out, const double* data, std::size_t count) {
    out.append(reinterpret_cast<const char*>(data), count * sizeof(double));
}

class Reader {
public:
    Reader(const std::string& bytes, const char* what) : bytes_(bytes), what_(what) {}

    template <class T>
    T get() {
        static_assert(std::is_trivially_copyable_v<T>);
        need(sizeof(T));
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }

    void get_doubles(double* data, std::size_t count) {
        need(count * sizeof(double));
        std::memcpy(data, bytes_.data() + pos_, count * sizeof(double));
        pos_ += count * sizeof(double);
    }

    std::string get_string() {
        const auto len = get<std::uint32_t>();
        need(len);
        std::string s = bytes_.substr(pos_, len);
        pos_ += len;
        return s;
    }

    void expect_magic(const char magic[4]) {
        need(4);
        if (std::memcmp(bytes_.data() + pos_, magic, 4) != 0)
            throw std::runtime_error(std::string(what_) + ": bad magic (not a " +
                                     std::string(magic, 4) + " record)");
        pos_ += 4;
    }

    void finish() const {
        if (pos_ != bytes_.size())
            throw std::runtime_error(std::string(what_) + ": trailing bytes in record");
    }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size())
            throw std::runtime_error(std::string(what_) + ": truncated record");
    }

    const std::string& bytes_;
    const char* what_;
    std::size_t pos_ = 0;
};

std::string read_file(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(std::string(what) + ": cannot open '" + path + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

} // namespace

void atomic_write(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("atomic_write: cannot open '" + tmp + "'");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("atomic_write: write to '" + tmp + "' failed");
    }
    std::filesystem::rename(tmp, path);
}

std::string serialize_model(const LinearForecaster& model) {
    std::string out;
    out.append(kModelMagic, 4);
    put(out, kModelVersion);
    put(out, static_cast<std::uint32_t>(model.kind));
    put(out, static_cast<std::uint64_t>(model.input_len));
    put(out, static_cast<std::uint64_t>(model.horizon));
    put(out, static_cast<std::uint64_t>(model.kernel));
    put(out, static_cast<std::int64_t>(model.seed));
    const Vecd flat = flatten_params(model);
    put(out, static_cast<std::uint64_t>(flat.size()));
    put_doubles(out, flat.data(), static_cast<std::size_t>(flat.size()));
    return out;
}

LinearForecaster deserialize_model(const std::string& bytes) {
    Reader r(bytes, "deserialize_model");
    r.expect_magic(kModelMagic);
    const auto version = r.get<std::uint32_t>();
    if (version != kModelVersion)
        throw std::runtime_error("deserialize_model: unsupported version " + std::to_string(version));
    const auto kind = static_cast<ModelKind>(r.get<std::uint32_t>());
    if (kind != ModelKind::plain && kind != ModelKind::dlinear)
        throw std::runtime_error("deserialize_model: unknown model kind");
    const auto input_len = static_cast<Index>(r.get<std::uint64_t>());
    const auto horizon = static_cast<Index>(r.get<std::uint64_t>());
    const auto kernel = static_cast<Index>(r.get<std::uint64_t>());
    const auto seed = r.get<std::int64_t>();

    LinearForecaster model = init_model(kind, input_len, horizon, kernel, seed);
    const auto count = static_cast<Index>(r.get<std::uint64_t>());
    if (count != model.param_count())
        throw std::runtime_error("deserialize_model: parameter count mismatch");
    Vecd flat(count);
    r.get_doubles(flat.data(), static_cast<std::size_t>(count));
    r.finish();
    unflatten_params(model, flat);
    return model;
}

void save_model(const std::string& path, const LinearForecaster& model) {
    atomic_write(path, serialize_model(model));
}

LinearForecaster load_model(const std::string& path) {
    return deserialize_model(read_file(path, "load_model"));
}

std::uint64_t model_hash(const LinearForecaster& model) {
    const std::string bytes = serialize_model(model);
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void save_forecasts(const std::string& path, const Matd& forecasts, std::uint64_t producer_hash,
                    const std::string& split) {
    std::string out;
    out.append(kCacheMagic, 4);
    put(out, kCacheVersion);
    put(out, producer_hash);
    put(out, static_cast<std::uint32_t>(split.size()));
    out.append(split);
    put(out, static_cast<std::uint64_t>(forecasts.rows()));
    put(out, static_cast<std::uint64_t>(forecasts.cols()));
    // row-major on disk
    for (Index i = 0; i < forecasts.rows(); ++i)
        for (Index j = 0; j < forecasts.cols(); ++j) put(out, forecasts(i, j));
    atomic_write(path, out);
}

ForecastCache load_forecasts(const std::string& path) {
    const std::string bytes = read_file(path, "load_forecasts");
    Reader r(bytes, "load_forecasts");
    r.expect_magic(kCacheMagic);
    const auto version = r.get<std::uint32_t>();
    if (version != kCacheVersion)
        throw std::runtime_error("load_forecasts: unsupported version " + std::to_string(version));
    ForecastCache cache;
    cache.producer_hash = r.get<std::uint64_t>();
    cache.split = r.get_string();
    const auto rows = static_cast<Index>(r.get<std::uint64_t>());
    const auto cols = static_cast<Index>(r.get<std::uint64_t>());
    cache.forecasts.resize(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) cache.forecasts(i, j) = r.get<double>();
    r.finish();
    return cache;
}

void save_series_cache(const std::string& path, const TimeSeries& series) {
    save_forecasts(path, series.values.transpose(), 0, series.name);
}

TimeSeries load_series_cache(const std::string& path) {
    ForecastCache cache = load_forecasts(path);
    if (cache.forecasts.rows() != 1)
        throw std::runtime_error("load_series_cache: expected a single-row record");
    return make_series(cache.split, cache.forecasts.row(0).transpose());
}

std::string serialize_pool(const RefinementPool& pool) {
    std::string out;
    put(out, static_cast<std::int64_t>(pool.base_seed));
    put(out, static_cast<std::uint64_t>(pool.entries.size()));
    for (const PoolEntry& e : pool.entries) {
        put(out, static_cast<std::int32_t>(e.segment.index));
        put(out, static_cast<std::int64_t>(e.segment.start));
        put(out, static_cast<std::int64_t>(e.segment.end));
        put(out, e.val_mse);
        put(out, static_cast<std::int32_t>(e.rank));
        const std::string m = serialize_model(e.model);
        put(out, static_cast<std::uint64_t>(m.size()));
        out += m;
    }
    return out;
}

std::string save_pool_manifest(const std::string& dir, const RefinementPool& pool,
                               std::uint64_t first_stage_hash) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    nlohmann::ordered_json manifest;
    manifest["schema_version"] = 1;
    manifest["base_seed"] = pool.base_seed;
    manifest["first_stage_hash"] = first_stage_hash;
    auto& entries = manifest["entries"] = nlohmann::ordered_json::array();
    for (const PoolEntry& e : pool.entries) {
        char name[32];
        std::snprintf(name, sizeof(name), "member_%03d.model", e.segment.index);
        save_model((fs::path(dir) / name).string(), e.model);
        entries.push_back({{"segment",
                            {{"index", e.segment.index},
                             {"start", e.segment.start},
                             {"end", e.segment.end}}},
                           {"model_path", name},
                           {"val_mse", e.val_mse},
                           {"rank", e.rank}});
    }
    const std::string path = (fs::path(dir) / "pool.json").string();
    atomic_write(path, manifest.dump(2) + "\n");
    return path;
}

PoolManifest load_pool_manifest(const std::string& path) {
    namespace fs = std::filesystem;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_pool_manifest: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_pool_manifest: invalid JSON in '" + path + "': " + e.what());
    }
    if (j.value("schema_version", 0) != 1)
        throw std::runtime_error("load_pool_manifest: unsupported schema_version");

    PoolManifest m;
    m.base_seed = j.at("base_seed").get<std::int64_t>();
    m.first_stage_hash = j.at("first_stage_hash").get<std::uint64_t>();
    const fs::path base = fs::path(path).parent_path();
    for (const auto& e : j.at("entries")) {
        PoolManifestEntry entry;
        entry.segment.index = e.at("segment").at("index").get<int>();
        entry.segment.start = e.at("segment").at("start").get<Index>();
        entry.segment.end = e.at("segment").at("end").get<Index>();
        entry.model_path = (base / e.at("model_path").get<std::string>()).string();
        entry.val_mse = e.at("val_mse").get<double>();
        entry.rank = e.at("rank").get<int>();
        m.entries.push_back(std::move(entry));
    }
    return m;
}

} // namespace bttf
