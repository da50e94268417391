#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bttf/linear_model.hpp"
#include "bttf/refinement.hpp"
#include "bttf/timeseries.hpp"

namespace bttf {

/// Self-describing binary model record (magic "BTLM", version, kind,
/// dimensions, kernel, seed, parameters in flatten_params order as
/// little-endian IEEE-754 doubles). Round trips are bit-exact.
std::string serialize_model(const LinearForecaster& model);
LinearForecaster deserialize_model(const std::string& bytes);
void save_model(const std::string& path, const LinearForecaster& model);
LinearForecaster load_model(const std::string& path);

/// FNV-1a 64 over the serialized model record; keys forecast caches and
/// pool manifests to the first-stage model that produced them.
std::uint64_t model_hash(const LinearForecaster& model);

/// Forecast cache record (magic "BTFC", version, producing-model hash,
/// split name, row count, horizon, row-major doubles).
struct ForecastCache {
    Matd forecasts;
    std::uint64_t producer_hash = 0;
    std::string split;
};

void save_forecasts(const std::string& path, const Matd& forecasts, std::uint64_t producer_hash,
                    const std::string& split);
ForecastCache load_forecasts(const std::string& path);

/// Optional series cache in the forecast record format (one row, hash 0,
/// split = series name).
void save_series_cache(const std::string& path, const TimeSeries& series);
TimeSeries load_series_cache(const std::string& path);

/// Canonical pool bytes: base seed, then per entry (segment order) the
/// segment spec, val_mse, rank, and full model record. Used for the
/// parallel-vs-sequential equality checks.
std::string serialize_pool(const RefinementPool& pool);

/// Writes member model files plus a JSON manifest (segment specs, model
/// paths, val_mse, ranks, base_seed, first-stage hash) under `dir`.
/// Returns the manifest path.
std::string save_pool_manifest(const std::string& dir, const RefinementPool& pool,
                               std::uint64_t first_stage_hash);

struct PoolManifestEntry {
    SegmentSpec segment;
    std::string model_path;  // resolved against the manifest directory
    double val_mse = 0.0;
    int rank = 0;
};

struct PoolManifest {
    std::vector<PoolManifestEntry> entries;
    std::int64_t base_seed = 0;
    std::uint64_t first_stage_hash = 0;
};

PoolManifest load_pool_manifest(const std::string& path);

/// Writes bytes to path via a temporary file and rename.
void atomic_write(const std::string& path, const std::string& bytes);

} // namespace bttf
