#ifndef MRIQ_PIPELINE_HPP
#define MRIQ_PIPELINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mriq/augment.hpp"
#include "mriq/distortion.hpp"
#include "mriq/metrics.hpp"
#include "mriq/volume.hpp"

namespace mriq {

// One generated training sample: provenance, applied stages, and the
// per-artifact target vector (1.0 for artifacts that were not applied).
struct SampleRecord {
    std::int64_t sample_id = 0;
    std::string source_path;
    std::uint64_t seed = 0;
    AugmentSpec augment;
    std::vector<DistortionRecord> distortions;
    QualityVector target;
    std::string output_path;
};

struct DatasetConfig {
    std::vector<std::string> refs; // reference volume paths, round-robin
    std::int64_t n_samples = 0;
    std::uint64_t base_seed = 0;
    double mix_probability = 0.0; // chance of a mixed (2-6 artifact) sample
    int size = 224;               // pad/center-crop target when preprocessing
    bool preprocess = true;       // normalize + resample 1mm + pad/crop
    int threads = 0;              // 0 = hardware concurrency
};

struct DatasetManifest {
    DatasetConfig config;
    std::vector<SampleRecord> records;
};

// Testing hooks for generate_sample.
struct SampleOptions {
    bool augment = true;
    bool no_distortions = false;
    std::optional<DistortionKind> forced_kind;
    std::optional<DistortionParams> forced_params;
};

// Augment + distort one preprocessed reference. Pure function of
// (ref, seed, mix_probability, options); the record carries everything
// needed to reproduce the output volume and target.
std::pair<Volume, SampleRecord> generate_sample(const Volume& ref, std::uint64_t seed,
                                                double mix_probability,
                                                const SampleOptions& options = {});

// Generates cfg.n_samples volumes under out_dir plus manifest.jsonl.
// Sample i uses refs[i mod refs.size()] and seed derive_seed(base_seed, i);
// output bytes are independent of cfg.threads.
DatasetManifest generate_dataset(const DatasetConfig& cfg, const std::string& out_dir);

void write_manifest(const DatasetManifest& m, const std::string& path);
DatasetManifest load_manifest(const std::string& path);

// Reference-based scoring of (ref, img) path pairs.
struct PairScore {
    std::string ref_path;
    std::string img_path;
    bool ok = false;
    std::string error;
    QualityVector quality;
    double ssim = 0.0; // NaN when dims are too small for the SSIM window
    double psnr_db = 0.0;
    double psnr_score = 0.0;
    double aggregate = 0.0;
};

struct ColumnStats {
    double mean = 0.0;
    double sd = 0.0; // population
};

struct ScoreReport {
    std::vector<PairScore> pairs;
    int n_ok = 0;
    QualityVector mean_quality, sd_quality;
    ColumnStats ssim, psnr_score, aggregate;
};

ScoreReport score_report(const std::vector<std::pair<std::string, std::string>>& pairs);

std::string report_to_json(const ScoreReport& r);
std::string report_to_table(const ScoreReport& r);

std::string sample_record_to_json(const SampleRecord& rec);

// Command-line entry point (subcommands distort, score, gen-dataset,
// report, info). Returns 0 on success, 1 on usage errors, 2 on data errors.
int cli_main(int argc, const char* const* argv);

} // namespace mriq

#endif
