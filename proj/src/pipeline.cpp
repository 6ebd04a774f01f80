#include "mriq/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mriq/error.hpp"
#include "mriq/rng.hpp"
#include "mriq/spectral.hpp"

namespace mriq {
namespace {

std::string fmt6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                out += buf;
            } else {
                out += c;
            }
        }
    }
    return out;
}

void append_augment_json(const AugmentSpec& a, std::string& out) {
    out += "\"augment\":{";
    out += "\"skull_strip\":";
    if (a.skull_strip) {
        out += "{\"threshold\":" + fmt6(a.skull_strip->threshold) +
               ",\"dilate_radius\":" + std::to_string(a.skull_strip->dilate_radius) +
               ",\"seed\":" + std::to_string(a.skull_strip->seed) + "}";
    } else {
        out += "null";
    }
    out += ",\"elastic\":";
    if (a.elastic) {
        out += "{\"sigma\":" + fmt6(a.elastic->sigma) +
               ",\"scale\":" + fmt6(a.elastic->scale) +
               ",\"seed\":" + std::to_string(a.elastic->seed) + "}";
    } else {
        out += "null";
    }
    out += ",\"rotation_deg\":";
    if (a.rotation_deg) {
        out += "[" + fmt6((*a.rotation_deg)[0]) + "," + fmt6((*a.rotation_deg)[1]) +
               "," + fmt6((*a.rotation_deg)[2]) + "]";
    } else {
        out += "null";
    }
    out += ",\"translation\":";
    if (a.translation) {
        out += "[" + std::to_string((*a.translation)[0]) + "," +
               std::to_string((*a.translation)[1]) + "," +
               std::to_string((*a.translation)[2]) + "]";
    } else {
        out += "null";
    }
    out += ",\"flip_axes\":[";
    for (std::size_t i = 0; i < a.flip_axes.size(); ++i) {
        if (i)
            out += ",";
        out += std::to_string(a.flip_axes[i]);
    }
    out += "]}";
}

void append_params_json(const DistortionRecord& rec, std::string& out) {
    out += "\"params\":{";
    switch (rec.kind) {
    case DistortionKind::Contrast:
        out += "\"gamma\":" + fmt6(std::get<ContrastParams>(rec.params).gamma);
        break;
    case DistortionKind::Bias: {
        const auto& c = std::get<BiasParams>(rec.params).center;
        out += "\"center\":[" + fmt6(c[0]) + "," + fmt6(c[1]) + "," + fmt6(c[2]) + "]";
        break;
    }
    case DistortionKind::Ring:
        out += "\"cutoff\":" + std::to_string(std::get<RingParams>(rec.params).cutoff);
        break;
    case DistortionKind::Ghost: {
        const auto& p = std::get<GhostParams>(rec.params);
        out += "\"alpha\":" + fmt6(p.alpha) + ",\"axis\":" + std::to_string(p.axis);
        break;
    }
    case DistortionKind::Noise: {
        const auto& p = std::get<NoiseParams>(rec.params);
        out += "\"variance\":" + fmt6(p.variance) + ",\"seed\":" + std::to_string(p.seed);
        break;
    }
    case DistortionKind::Blur: {
        const auto& p = std::get<BlurParams>(rec.params);
        if (p.mode == BlurMode::Resample)
            out += "\"mode\":\"resample\",\"scale\":" + fmt6(p.scale);
        else
            out += "\"mode\":\"gaussian\",\"kernel\":" + std::to_string(p.kernel) +
                   ",\"sigma\":" + fmt6(p.sigma);
        break;
    }
    }
    out += "}";
}

double stat_mean(const std::vector<double>& xs) {
    if (xs.empty())
        return 0.0;
    double s = 0.0;
    for (double x : xs)
        s += x;
    return s / static_cast<double>(xs.size());
}

double stat_sd(const std::vector<double>& xs, double mean) {
    if (xs.empty())
        return 0.0;
    double s = 0.0;
    for (double x : xs)
        s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(xs.size()));
}

} // namespace

std::string sample_record_to_json(const SampleRecord& rec) {
    std::string out = "{";
    out += "\"sample_id\":" + std::to_string(rec.sample_id);
    out += ",\"source_path\":\"" + json_escape(rec.source_path) + "\"";
    out += ",\"seed\":" + std::to_string(rec.seed) + ",";
    append_augment_json(rec.augment, out);
    out += ",\"distortions\":[";
    for (std::size_t i = 0; i < rec.distortions.size(); ++i) {
        if (i)
            out += ",";
        out += "{\"kind\":\"";
        out += to_string(rec.distortions[i].kind);
        out += "\",";
        append_params_json(rec.distortions[i], out);
        out += ",\"score\":" + fmt6(rec.distortions[i].score) + "}";
    }
    out += "],\"target\":" + quality_to_json(rec.target);
    out += ",\"output_path\":\"" + json_escape(rec.output_path) + "\"}";
    return out;
}

std::pair<Volume, SampleRecord> generate_sample(const Volume& ref, std::uint64_t seed,
                                                double mix_probability,
                                                const SampleOptions& options) {
    if (!(mix_probability >= 0.0 && mix_probability <= 1.0))
        throw std::invalid_argument("generate_sample: mix probability must be in [0, 1]");
    if (ref.data.empty())
        throw data_error("generate_sample: empty reference volume");
    for (float x : ref.data)
        if (!(x >= 0.0f && x <= 1.0f))
            throw data_error("generate_sample: reference must be normalized to [0, 1]");

    Rng rng(seed);
    SampleRecord rec;
    rec.seed = seed;

    Volume cur = ref;
    if (options.augment) {
        AugmentResult aug = random_augment(cur, rng);
        cur = std::move(aug.volume);
        rec.augment = std::move(aug.spec);
    }

    std::vector<DistortionKind> kinds;
    if (options.no_distortions) {
        // testing hook: target stays all ones
    } else if (options.forced_kind) {
        kinds.push_back(*options.forced_kind);
    } else if (rng.uniform() < mix_probability) {
        // Mixed sample: subset of 2-6 artifacts, applied in canonical order.
        const int m = rng.uniform_int(2, 6);
        std::array<int, 6> pool = {0, 1, 2, 3, 4, 5};
        for (int i = 0; i < m; ++i)
            std::swap(pool[static_cast<std::size_t>(i)],
                      pool[static_cast<std::size_t>(rng.uniform_int(i, 5))]);
        std::sort(pool.begin(), pool.begin() + m);
        for (int i = 0; i < m; ++i)
            kinds.push_back(static_cast<DistortionKind>(pool[static_cast<std::size_t>(i)]));
    } else {
        kinds.push_back(static_cast<DistortionKind>(rng.uniform_int(0, 5)));
    }

    for (DistortionKind kind : kinds) {
        DistortionParams params;
        if (options.forced_kind && options.forced_params)
            params = *options.forced_params;
        else
            params = sample_params(kind, rng);
        // Each stage is scored against its own input volume.
        DistortionResult res = apply_distortion(cur, kind, params);
        cur = std::move(res.volume);
        rec.target[static_cast<int>(kind)] = res.record.score;
        rec.distortions.push_back(std::move(res.record));
    }
    return {std::move(cur), std::move(rec)};
}

DatasetManifest generate_dataset(const DatasetConfig& cfg, const std::string& out_dir) {
    if (cfg.refs.empty())
        throw std::invalid_argument("generate_dataset: no reference volumes given");
    if (cfg.n_samples < 0)
        throw std::invalid_argument("generate_dataset: negative sample count");
    if (!(cfg.mix_probability >= 0.0 && cfg.mix_probability <= 1.0))
        throw std::invalid_argument("generate_dataset: mix probability must be in [0, 1]");

    std::filesystem::create_directories(out_dir);

    std::vector<Volume> refs;
    refs.reserve(cfg.refs.size());
    for (const auto& path : cfg.refs) {
        Volume v = load_volume(path);
        if (cfg.preprocess)
            v = pad_center_crop(resample_isotropic(normalize_intensity(v), 1.0),
                                cfg.size);
        refs.push_back(std::move(v));
    }

    DatasetManifest manifest;
    manifest.config = cfg;
    manifest.records.resize(static_cast<std::size_t>(cfg.n_samples));

    const unsigned hw = std::thread::hardware_concurrency();
    const int workers = cfg.threads > 0 ? cfg.threads
                                        : static_cast<int>(hw > 0 ? hw : 1);
    std::atomic<std::int64_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::int64_t i = next.fetch_add(1);
            if (i >= cfg.n_samples)
                return;
            try {
                const std::size_t ref_idx =
                    static_cast<std::size_t>(i) % cfg.refs.size();
                auto [vol, rec] =
                    generate_sample(refs[ref_idx], derive_seed(cfg.base_seed,
                                                               static_cast<std::uint64_t>(i)),
                                    cfg.mix_probability);
                rec.sample_id = i;
                rec.source_path = cfg.refs[ref_idx];
                char name[64];
                std::snprintf(name, sizeof(name), "sample_%06lld.nii",
                              static_cast<long long>(i));
                rec.output_path = name; // relative to the manifest
                save_volume(vol, (std::filesystem::path(out_dir) / name).string());
                manifest.records[static_cast<std::size_t>(i)] = std::move(rec);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error)
                    first_error = std::current_exception();
                next.store(cfg.n_samples); // stop the pool
                return;
            }
        }
    };

    if (workers <= 1 || cfg.n_samples <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (first_error)
        std::rethrow_exception(first_error);

    write_manifest(manifest, (std::filesystem::path(out_dir) / "manifest.jsonl").string());
    return manifest;
}

void write_manifest(const DatasetManifest& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open manifest for writing: " + path);

    std::string header = "{";
    header += "\"base_seed\":" + std::to_string(m.config.base_seed);
    header += ",\"n_samples\":" + std::to_string(m.config.n_samples);
    header += ",\"mix_probability\":" + fmt6(m.config.mix_probability);
    header += ",\"size\":" + std::to_string(m.config.size);
    header += std::string(",\"preprocess\":") + (m.config.preprocess ? "true" : "false");
    header += ",\"refs\":[";
    for (std::size_t i = 0; i < m.config.refs.size(); ++i) {
        if (i)
            header += ",";
        header += "\"" + json_escape(m.config.refs[i]) + "\"";
    }
    header += "],\"ranges\":{";
    header += "\"gamma\":[" + fmt6(0.5) + "," + fmt6(2.0) + "]";
    header += ",\"bias_center\":[" + fmt6(1.0) + "," + fmt6(224.0) + "]";
    header += ",\"ring_cutoff\":[32,224]";
    header += ",\"ghost_alpha\":[" + fmt6(0.35) + "," + fmt6(1.0) + "]";
    header += ",\"noise_variance\":[" + fmt6(1e-6) + "," + fmt6(1e-2) + "]";
    header += ",\"blur_scale\":[" + fmt6(0.2) + "," + fmt6(2.0) + "]";
    header += ",\"blur_kernel\":[3,11]";
    header += ",\"blur_sigma\":[" + fmt6(0.25) + "," + fmt6(5.0) + "]";
    header += "}}";
    out << header << '\n';
    for (const auto& rec : m.records)
        out << sample_record_to_json(rec) << '\n';
    if (!out)
        throw io_error("manifest write failed: " + path);
}

namespace {

AugmentSpec augment_from_json(const nlohmann::json& j) {
    AugmentSpec spec;
    if (!j.at("skull_strip").is_null()) {
        const auto& s = j.at("skull_strip");
        spec.skull_strip = SkullStripParams{s.at("threshold").get<double>(),
                                            s.at("dilate_radius").get<int>(),
                                            s.at("seed").get<std::uint64_t>()};
    }
    if (!j.at("elastic").is_null()) {
        const auto& e = j.at("elastic");
        spec.elastic = ElasticParams{e.at("sigma").get<double>(),
                                     e.at("scale").get<double>(),
                                     e.at("seed").get<std::uint64_t>()};
    }
    if (!j.at("rotation_deg").is_null())
        spec.rotation_deg = std::array<double, 3>{j.at("rotation_deg").at(0).get<double>(),
                                                  j.at("rotation_deg").at(1).get<double>(),
                                                  j.at("rotation_deg").at(2).get<double>()};
    if (!j.at("translation").is_null())
        spec.translation = std::array<int, 3>{j.at("translation").at(0).get<int>(),
                                              j.at("translation").at(1).get<int>(),
                                              j.at("translation").at(2).get<int>()};
    for (const auto& a : j.at("flip_axes"))
        spec.flip_axes.push_back(a.get<int>());
    return spec;
}

DistortionRecord distortion_from_json(const nlohmann::json& j) {
    DistortionRecord rec;
    const auto kind = distortion_from_string(j.at("kind").get<std::string>());
    if (!kind)
        throw io_error("manifest contains unknown distortion kind");
    rec.kind = *kind;
    const auto& p = j.at("params");
    switch (rec.kind) {
    case DistortionKind::Contrast:
        rec.params = ContrastParams{p.at("gamma").get<double>()};
        break;
    case DistortionKind::Bias:
        rec.params = BiasParams{{p.at("center").at(0).get<double>(),
                                 p.at("center").at(1).get<double>(),
                                 p.at("center").at(2).get<double>()}};
        break;
    case DistortionKind::Ring:
        rec.params = RingParams{p.at("cutoff").get<int>()};
        break;
    case DistortionKind::Ghost:
        rec.params = GhostParams{p.at("alpha").get<double>(), p.at("axis").get<int>()};
        break;
    case DistortionKind::Noise:
        rec.params = NoiseParams{p.at("variance").get<double>(),
                                 p.at("seed").get<std::uint64_t>()};
        break;
    case DistortionKind::Blur: {
        BlurParams bp;
        if (p.at("mode").get<std::string>() == "resample") {
            bp.mode = BlurMode::Resample;
            bp.scale = p.at("scale").get<double>();
        } else {
            bp.mode = BlurMode::Gaussian;
            bp.kernel = p.at("kernel").get<int>();
            bp.sigma = p.at("sigma").get<double>();
        }
        rec.params = bp;
        break;
    }
    }
    rec.score = j.at("score").get<double>();
    return rec;
}

QualityVector quality_from_json(const nlohmann::json& j) {
    QualityVector q;
    for (int i = 0; i < QualityVector::count; ++i)
        q[i] = j.at(QualityVector::component_name(i)).get<double>();
    return q;
}

} // namespace

DatasetManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open manifest: " + path);
    DatasetManifest m;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw io_error("bad manifest line (" + path + "): " + e.what());
        }
        try {
            if (!have_header) {
                m.config.base_seed = j.at("base_seed").get<std::uint64_t>();
                m.config.n_samples = j.at("n_samples").get<std::int64_t>();
                m.config.mix_probability = j.at("mix_probability").get<double>();
                m.config.size = j.at("size").get<int>();
                m.config.preprocess = j.at("preprocess").get<bool>();
                for (const auto& r : j.at("refs"))
                    m.config.refs.push_back(r.get<std::string>());
                have_header = true;
                continue;
            }
            SampleRecord rec;
            rec.sample_id = j.at("sample_id").get<std::int64_t>();
            rec.source_path = j.at("source_path").get<std::string>();
            rec.seed = j.at("seed").get<std::uint64_t>();
            rec.augment = augment_from_json(j.at("augment"));
            for (const auto& d : j.at("distortions"))
                rec.distortions.push_back(distortion_from_json(d));
            rec.target = quality_from_json(j.at("target"));
            rec.output_path = j.at("output_path").get<std::string>();
            m.records.push_back(std::move(rec));
        } catch (const nlohmann::json::exception& e) {
            throw io_error("bad manifest content (" + path + "): " + e.what());
        }
    }
    if (!have_header)
        throw io_error("manifest has no header line: " + path);
    return m;
}

ScoreReport score_report(const std::vector<std::pair<std::string, std::string>>& pairs) {
    ScoreReport report;
    report.pairs.reserve(pairs.size());

    std::array<std::vector<double>, QualityVector::count> cols;
    std::vector<double> ssim_col, psnr_col, agg_col;

    for (const auto& [ref_path, img_path] : pairs) {
        PairScore ps;
        ps.ref_path = ref_path;
        ps.img_path = img_path;
        try {
            const Volume ref = load_volume(ref_path);
            const Volume img = load_volume(img_path);
            if (ref.dims != img.dims)
                throw data_error("volume dimensions differ");

            ps.quality.contrast = contrast_sdr(ref, img);
            ps.quality.bias = cvr(ref, img);
            const KSpace f_ref = fft3_centered(ref);
            const KSpace f_img = fft3_centered(img);
            ps.quality.ring = ring_truncation(f_ref, f_img);
            ps.quality.ghost = ghost_modulation(f_ref, f_img);
            const PsnrResult pr = psnr(ref, img);
            ps.quality.noise = pr.score;
            ps.psnr_db = pr.db;
            ps.psnr_score = pr.score;
            ps.quality.blur = hf_ratio(f_ref, f_img);
            ps.aggregate = aggregate_quality(ps.quality);
            ps.ssim = (ref.dims[0] >= 11 && ref.dims[1] >= 11 && ref.dims[2] >= 11)
                          ? ssim3d(ref, img)
                          : std::numeric_limits<double>::quiet_NaN();
            ps.ok = true;
        } catch (const std::exception& e) {
            ps.ok = false;
            ps.error = e.what();
        }
        if (ps.ok) {
            ++report.n_ok;
            for (int i = 0; i < QualityVector::count; ++i)
                cols[static_cast<std::size_t>(i)].push_back(ps.quality[i]);
            if (!std::isnan(ps.ssim))
                ssim_col.push_back(ps.ssim);
            psnr_col.push_back(ps.psnr_score);
            agg_col.push_back(ps.aggregate);
        }
        report.pairs.push_back(std::move(ps));
    }

    for (int i = 0; i < QualityVector::count; ++i) {
        const auto& xs = cols[static_cast<std::size_t>(i)];
        report.mean_quality[i] = stat_mean(xs);
        report.sd_quality[i] = stat_sd(xs, report.mean_quality[i]);
    }
    report.ssim = {stat_mean(ssim_col), stat_sd(ssim_col, stat_mean(ssim_col))};
    report.psnr_score = {stat_mean(psnr_col), stat_sd(psnr_col, stat_mean(psnr_col))};
    report.aggregate = {stat_mean(agg_col), stat_sd(agg_col, stat_mean(agg_col))};
    return report;
}

std::string report_to_json(const ScoreReport& r) {
    std::string out = "{\"pairs\":[";
    for (std::size_t i = 0; i < r.pairs.size(); ++i) {
        const auto& p = r.pairs[i];
        if (i)
            out += ",";
        out += "{\"ref\":\"" + json_escape(p.ref_path) + "\",\"img\":\"" +
               json_escape(p.img_path) + "\"";
        if (!p.ok) {
            out += ",\"error\":\"" + json_escape(p.error) + "\"}";
            continue;
        }
        out += ",\"scores\":" + quality_to_json(p.quality);
        out += ",\"ssim\":";
        out += std::isnan(p.ssim) ? "null" : fmt6(p.ssim);
        out += ",\"psnr_db\":";
        out += std::isfinite(p.psnr_db) ? fmt6(p.psnr_db) : "null";
        out += ",\"psnr_score\":" + fmt6(p.psnr_score) + "}";
    }
    out += "],\"n_ok\":" + std::to_string(r.n_ok);
    out += ",\"mean\":" + quality_to_json(r.mean_quality);
    out += ",\"sd\":" + quality_to_json(r.sd_quality);
    out += ",\"ssim\":{\"mean\":" + fmt6(r.ssim.mean) + ",\"sd\":" + fmt6(r.ssim.sd) + "}";
    out += ",\"psnr_score\":{\"mean\":" + fmt6(r.psnr_score.mean) +
           ",\"sd\":" + fmt6(r.psnr_score.sd) + "}";
    out += ",\"aggregate\":{\"mean\":" + fmt6(r.aggregate.mean) +
           ",\"sd\":" + fmt6(r.aggregate.sd) + "}}";
    return out;
}

std::string report_to_table(const ScoreReport& r) {
    std::ostringstream os;
    char line[512];
    std::snprintf(line, sizeof(line), "%-40s %8s %8s %8s %8s %8s %8s %8s %8s %9s\n",
                  "pair", "contrast", "bias", "ring", "ghost", "noise", "blur", "ssim",
                  "psnr", "aggregate");
    os << line;
    for (const auto& p : r.pairs) {
        const std::string name =
            std::filesystem::path(p.ref_path).filename().string() + "|" +
            std::filesystem::path(p.img_path).filename().string();
        if (!p.ok) {
            std::snprintf(line, sizeof(line), "%-40s ERROR: %s\n", name.c_str(),
                          p.error.c_str());
            os << line;
            continue;
        }
        char ssim_buf[16];
        if (std::isnan(p.ssim))
            std::snprintf(ssim_buf, sizeof(ssim_buf), "%8s", "-");
        else
            std::snprintf(ssim_buf, sizeof(ssim_buf), "%8.4f", p.ssim);
        std::snprintf(line, sizeof(line),
                      "%-40s %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f %s %8.4f %9.4f\n",
                      name.c_str(), p.quality.contrast, p.quality.bias, p.quality.ring,
                      p.quality.ghost, p.quality.noise, p.quality.blur, ssim_buf,
                      p.psnr_score, p.aggregate);
        os << line;
    }
    std::snprintf(line, sizeof(line),
                  "%-40s %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f %9.4f\n",
                  "mean", r.mean_quality.contrast, r.mean_quality.bias,
                  r.mean_quality.ring, r.mean_quality.ghost, r.mean_quality.noise,
                  r.mean_quality.blur, r.ssim.mean, r.psnr_score.mean,
                  r.aggregate.mean);
    os << line;
    std::snprintf(line, sizeof(line),
                  "%-40s %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f %9.4f\n", "sd",
                  r.sd_quality.contrast, r.sd_quality.bias, r.sd_quality.ring,
                  r.sd_quality.ghost, r.sd_quality.noise, r.sd_quality.blur, r.ssim.sd,
                  r.psnr_score.sd, r.aggregate.sd);
    os << line;
    return os.str();
}

} // namespace mriq
