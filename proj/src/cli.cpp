#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mriq/error.hpp"
#include "mriq/pipeline.hpp"
#include "mriq/rng.hpp"

namespace mriq {
namespace {

constexpr int ExitOk = 0;
constexpr int ExitUsage = 1;
constexpr int ExitData = 2;

Volume load_for_processing(const std::string& path, bool normalize) {
    Volume v = load_volume(path);
    if (normalize)
        return normalize_intensity(v);
    const auto [mn, mx] = std::minmax_element(v.data.begin(), v.data.end());
    if (*mn < 0.0f || *mx > 1.0f)
        throw data_error(path + ": intensities outside [0, 1]; pass --normalize");
    return v;
}

int run_info(const std::string& in_path) {
    const Volume v = load_volume(in_path);
    const auto [mn, mx] = std::minmax_element(v.data.begin(), v.data.end());
    const VolumeStats st = stats(v);
    std::printf("file:    %s\n", in_path.c_str());
    std::printf("dims:    %d x %d x %d\n", v.dims[0], v.dims[1], v.dims[2]);
    std::printf("spacing: %.6f x %.6f x %.6f mm\n", v.spacing[0], v.spacing[1],
                v.spacing[2]);
    std::printf("range:   [%.6f, %.6f]\n", static_cast<double>(*mn),
                static_cast<double>(*mx));
    std::printf("mean:    %.6f   std: %.6f\n", st.mean, st.std_dev);
    return ExitOk;
}

struct DistortCli {
    std::string in_path, out_path, kind_name, json_path;
    std::uint64_t seed = 0;
    bool normalize = false;
    double gamma = -1.0;
    std::vector<double> center;
    int fc = -1;
    double alpha = -1.0;
    int axis = -1;
    double variance = -1.0;
    std::string blur_mode;
    double scale = -1.0;
    int kernel = -1;
    double sigma = -1.0;
};

// Explicit parameters win; anything unspecified is sampled from --seed.
DistortionParams resolve_params(const DistortCli& o, DistortionKind kind, Rng& rng) {
    switch (kind) {
    case DistortionKind::Contrast:
        return o.gamma >= 0.0 ? ContrastParams{o.gamma}
                              : std::get<ContrastParams>(sample_params(kind, rng));
    case DistortionKind::Bias: {
        if (o.center.empty())
            return std::get<BiasParams>(sample_params(kind, rng));
        if (o.center.size() != 3)
            throw std::invalid_argument("--center needs exactly three values");
        return BiasParams{{o.center[0], o.center[1], o.center[2]}};
    }
    case DistortionKind::Ring:
        return o.fc >= 0 ? RingParams{o.fc}
                         : std::get<RingParams>(sample_params(kind, rng));
    case DistortionKind::Ghost: {
        GhostParams p = std::get<GhostParams>(sample_params(kind, rng));
        if (o.alpha >= 0.0)
            p.alpha = o.alpha;
        if (o.axis >= 0)
            p.axis = o.axis;
        return p;
    }
    case DistortionKind::Noise: {
        NoiseParams p = std::get<NoiseParams>(sample_params(kind, rng));
        if (o.variance >= 0.0)
            p.variance = o.variance;
        return p;
    }
    case DistortionKind::Blur: {
        BlurParams p = std::get<BlurParams>(sample_params(kind, rng));
        if (!o.blur_mode.empty()) {
            if (o.blur_mode == "resample")
                p.mode = BlurMode::Resample;
            else if (o.blur_mode == "gaussian")
                p.mode = BlurMode::Gaussian;
            else
                throw std::invalid_argument("--blur-mode must be resample or gaussian");
        }
        if (o.scale >= 0.0) {
            p.mode = o.blur_mode.empty() ? BlurMode::Resample : p.mode;
            p.scale = o.scale;
        }
        if (o.kernel >= 0 || o.sigma >= 0.0) {
            if (o.blur_mode.empty())
                p.mode = BlurMode::Gaussian;
            if (o.kernel >= 0)
                p.kernel = o.kernel;
            if (o.sigma >= 0.0)
                p.sigma = o.sigma;
        }
        return p;
    }
    }
    throw std::invalid_argument("unknown distortion kind");
}

int run_distort(const DistortCli& o) {
    const auto kind = distortion_from_string(o.kind_name);
    if (!kind)
        throw std::invalid_argument("--kind must be one of contrast, bias, ring, "
                                    "ghost, noise, blur");
    Rng rng(o.seed);
    const DistortionParams params = resolve_params(o, *kind, rng);
    const Volume v = load_for_processing(o.in_path, o.normalize);
    DistortionResult res = apply_distortion(v, *kind, params);
    save_volume(res.volume, o.out_path);

    SampleRecord rec;
    rec.source_path = o.in_path;
    rec.seed = o.seed;
    rec.distortions.push_back(res.record);
    rec.target[static_cast<int>(*kind)] = res.record.score;
    rec.output_path = o.out_path;
    const std::string json = sample_record_to_json(rec);
    if (!o.json_path.empty()) {
        std::ofstream f(o.json_path);
        if (!f)
            throw io_error("cannot open file for writing: " + o.json_path);
        f << json << '\n';
    }
    std::printf("%s: score %.6f -> %s\n", to_string(*kind), res.record.score,
                o.out_path.c_str());
    return ExitOk;
}

int run_score(const std::string& ref_path, const std::string& img_path,
              const std::string& json_path) {
    const ScoreReport report = score_report({{ref_path, img_path}});
    if (!json_path.empty()) {
        std::ofstream f(json_path);
        if (!f)
            throw io_error("cannot open file for writing: " + json_path);
        f << report_to_json(report) << '\n';
    }
    std::fputs(report_to_table(report).c_str(), stdout);
    if (report.n_ok != 1) {
        std::fprintf(stderr, "error: %s\n", report.pairs[0].error.c_str());
        return ExitData;
    }
    return ExitOk;
}

int run_gen_dataset(DatasetConfig cfg, const std::string& refs_dir,
                    const std::string& out_dir) {
    for (const auto& entry : std::filesystem::directory_iterator(refs_dir)) {
        if (!entry.is_regular_file())
            continue;
        const std::string p = entry.path().string();
        if (p.ends_with(".nii") || p.ends_with(".nii.gz") || p.ends_with(".f32raw") ||
            p.ends_with(".hdr"))
            cfg.refs.push_back(p);
    }
    std::sort(cfg.refs.begin(), cfg.refs.end());
    if (cfg.refs.empty())
        throw data_error("no reference volumes found in " + refs_dir);
    const DatasetManifest m = generate_dataset(cfg, out_dir);
    std::printf("wrote %zu samples and manifest.jsonl to %s\n", m.records.size(),
                out_dir.c_str());
    return ExitOk;
}

int run_report(const std::string& manifest_path, const std::string& pairs_csv,
               const std::string& json_path) {
    if (!manifest_path.empty()) {
        const DatasetManifest m = load_manifest(manifest_path);
        std::array<std::vector<double>, QualityVector::count> cols;
        std::vector<double> agg;
        for (const auto& rec : m.records) {
            for (int i = 0; i < QualityVector::count; ++i)
                cols[static_cast<std::size_t>(i)].push_back(rec.target[i]);
            agg.push_back(aggregate_quality(rec.target));
        }
        auto mean_of = [](const std::vector<double>& xs) {
            double s = 0.0;
            for (double x : xs)
                s += x;
            return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
        };
        auto sd_of = [&](const std::vector<double>& xs) {
            if (xs.empty())
                return 0.0;
            const double mu = mean_of(xs);
            double s = 0.0;
            for (double x : xs)
                s += (x - mu) * (x - mu);
            return std::sqrt(s / static_cast<double>(xs.size()));
        };
        std::printf("%-10s %10s %10s\n", "column", "mean", "sd");
        for (int i = 0; i < QualityVector::count; ++i) {
            const auto& xs = cols[static_cast<std::size_t>(i)];
            std::printf("%-10s %10.6f %10.6f\n", QualityVector::component_name(i),
                        mean_of(xs), sd_of(xs));
        }
        std::printf("%-10s %10.6f %10.6f\n", "aggregate", mean_of(agg), sd_of(agg));
        std::printf("records: %zu\n", m.records.size());
        if (!json_path.empty()) {
            QualityVector mean_q, sd_q;
            for (int i = 0; i < QualityVector::count; ++i) {
                const auto& xs = cols[static_cast<std::size_t>(i)];
                mean_q[i] = mean_of(xs);
                sd_q[i] = sd_of(xs);
            }
            char agg_buf[128];
            std::snprintf(agg_buf, sizeof(agg_buf),
                          ",\"aggregate\":{\"mean\":%.6f,\"sd\":%.6f},\"records\":%zu}",
                          mean_of(agg), sd_of(agg), m.records.size());
            std::ofstream f(json_path);
            if (!f)
                throw io_error("cannot open file for writing: " + json_path);
            f << "{\"mean\":" << quality_to_json(mean_q)
              << ",\"sd\":" << quality_to_json(sd_q) << agg_buf << '\n';
        }
        return ExitOk;
    }

    std::ifstream in(pairs_csv);
    if (!in)
        throw io_error("cannot open pairs file: " + pairs_csv);
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw data_error("pairs file line without a comma: " + line);
        pairs.emplace_back(line.substr(0, comma), line.substr(comma + 1));
    }
    const ScoreReport report = score_report(pairs);
    if (!json_path.empty()) {
        std::ofstream f(json_path);
        if (!f)
            throw io_error("cannot open file for writing: " + json_path);
        f << report_to_json(report) << '\n';
    }
    std::fputs(report_to_table(report).c_str(), stdout);
    return report.n_ok == static_cast<int>(report.pairs.size()) ? ExitOk : ExitData;
}

} // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"MRI distortion simulation and quality measurement"};
    app.require_subcommand(1);

    // distort
    DistortCli d;
    auto* distort = app.add_subcommand("distort", "apply one artifact to a volume");
    distort->add_option("--in", d.in_path, "input volume")->required();
    distort->add_option("--out", d.out_path, "output volume")->required();
    distort->add_option("--kind", d.kind_name,
                        "contrast|bias|ring|ghost|noise|blur")->required();
    distort->add_option("--seed", d.seed, "seed for sampled parameters / noise");
    distort->add_option("--json", d.json_path, "write the distortion record here");
    distort->add_flag("--normalize", d.normalize, "min-max/type normalize the input");
    distort->add_option("--gamma", d.gamma, "contrast gamma in [0.5, 2]");
    distort->add_option("--center", d.center,
                        "bias ellipse center (three values in [1, 224])")
        ->expected(3)
        ->delimiter(',');
    distort->add_option("--fc", d.fc, "ring cutoff in [32, 224]");
    distort->add_option("--alpha", d.alpha, "ghost modulation in [0.35, 1]");
    distort->add_option("--axis", d.axis, "ghost axis in {0, 1, 2}");
    distort->add_option("--variance", d.variance, "noise variance in [1e-6, 1e-2]");
    distort->add_option("--blur-mode", d.blur_mode, "resample|gaussian");
    distort->add_option("--scale", d.scale, "resample-blur scale in [0.2, 2]");
    distort->add_option("--kernel", d.kernel, "gaussian-blur kernel, odd in [3, 11]");
    distort->add_option("--sigma", d.sigma, "gaussian-blur sigma in [0.25, 5]");

    // score
    std::string score_ref, score_img, score_json;
    auto* score = app.add_subcommand("score", "reference-based quality scores");
    score->add_option("--ref", score_ref, "reference volume")->required();
    score->add_option("--img", score_img, "image volume")->required();
    score->add_option("--json", score_json, "write the scores as JSON here");

    // gen-dataset
    DatasetConfig cfg;
    std::string refs_dir, out_dir;
    auto* gen = app.add_subcommand("gen-dataset", "generate a scored dataset");
    gen->add_option("--refs", refs_dir, "directory of reference volumes")->required();
    gen->add_option("--out", out_dir, "output directory")->required();
    gen->add_option("--n", cfg.n_samples, "number of samples")->required();
    gen->add_option("--seed", cfg.base_seed, "base seed");
    gen->add_option("--mix-prob", cfg.mix_probability,
                    "probability of a mixed (2-6 artifact) sample");
    gen->add_option("--size", cfg.size, "pad/center-crop target (default 224)");
    gen->add_option("--threads", cfg.threads, "worker threads (0 = hardware)");
    bool no_preprocess = false;
    gen->add_flag("--no-preprocess", no_preprocess,
                  "skip normalize/resample/pad-crop of references");

    // report
    std::string manifest_path, pairs_csv, report_json;
    auto* rep = app.add_subcommand("report", "aggregate scores");
    auto* opt_manifest =
        rep->add_option("--manifest", manifest_path, "dataset manifest.jsonl");
    auto* opt_pairs = rep->add_option("--pairs", pairs_csv, "CSV of ref,img paths");
    rep->add_option("--json", report_json, "write the report as JSON here");
    opt_manifest->excludes(opt_pairs);

    // info
    std::string info_path;
    auto* info = app.add_subcommand("info", "print volume header summary");
    info->add_option("--in", info_path, "input volume")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // prints help, returns 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return ExitUsage;
    }

    try {
        if (distort->parsed())
            return run_distort(d);
        if (score->parsed())
            return run_score(score_ref, score_img, score_json);
        if (gen->parsed()) {
            cfg.preprocess = !no_preprocess;
            return run_gen_dataset(cfg, refs_dir, out_dir);
        }
        if (rep->parsed()) {
            if (manifest_path.empty() && pairs_csv.empty())
                throw std::invalid_argument("report needs --manifest or --pairs");
            return run_report(manifest_path, pairs_csv, report_json);
        }
        if (info->parsed())
            return run_info(info_path);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return ExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return ExitData;
    }
    return ExitUsage;
}

} // namespace mriq
