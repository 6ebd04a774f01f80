#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>

#include "mriq/error.hpp"
#include "mriq/pipeline.hpp"
#include "mriq/rng.hpp"
#include "support/phantoms.hpp"

using namespace mriq;
using namespace mriq::testing;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "mriq_pipeline_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Reference volumes that are preprocessing fixed points: span [0,1],
// spacing 1, already at the target size.
std::vector<std::string> write_refs(const std::filesystem::path& dir, int n_refs,
                                    int size) {
    std::vector<std::string> paths;
    for (int i = 0; i < n_refs; ++i) {
        Volume v = smooth_phantom(size, 100 + static_cast<std::uint64_t>(i));
        const auto path = (dir / ("ref" + std::to_string(i) + ".nii")).string();
        save_volume(v, path);
        paths.push_back(path);
    }
    return paths;
}

} // namespace

TEST_SUITE_BEGIN("pipeline");

TEST_CASE("generate_sample: a forced single ghost stage shapes the target") {
    const Volume ref = cosine_phantom(16);
    SampleOptions opt;
    opt.augment = false;
    opt.forced_kind = DistortionKind::Ghost;
    opt.forced_params = GhostParams{0.5, 1};
    const auto [vol, rec] = generate_sample(ref, 7, 0.0, opt);
    CHECK(rec.target.contrast == 1.0);
    CHECK(rec.target.bias == 1.0);
    CHECK(rec.target.ring == 1.0);
    CHECK(rec.target.ghost == 0.5);
    CHECK(rec.target.noise == 1.0);
    CHECK(rec.target.blur == 1.0);
    REQUIRE(rec.distortions.size() == 1);
    CHECK(rec.distortions[0].kind == DistortionKind::Ghost);
}

TEST_CASE("generate_sample: the no-distortion hook leaves an all-ones target") {
    const Volume ref = smooth_phantom(16, 3);
    SampleOptions opt;
    opt.no_distortions = true;
    const auto [vol, rec] = generate_sample(ref, 11, 0.5, opt);
    CHECK(rec.target == QualityVector{});
    CHECK(rec.distortions.empty());
}

TEST_CASE("generate_sample is a pure function of volume and seed") {
    const Volume ref = smooth_phantom(16, 4);
    const auto [va, ra] = generate_sample(ref, 1234, 0.7);
    const auto [vb, rb] = generate_sample(ref, 1234, 0.7);
    CHECK(max_abs_diff(va, vb) == 0.0);
    CHECK(sample_record_to_json(ra) == sample_record_to_json(rb));
}

TEST_CASE("generate_sample: mixed samples apply 2-6 kinds in canonical order") {
    const Volume ref = smooth_phantom(16, 5);
    bool saw_mixed = false;
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto [vol, rec] = generate_sample(ref, seed, 1.0);
        CHECK(rec.distortions.size() >= 2);
        CHECK(rec.distortions.size() <= 6);
        for (std::size_t i = 1; i < rec.distortions.size(); ++i)
            CHECK(static_cast<int>(rec.distortions[i].kind) >
                  static_cast<int>(rec.distortions[i - 1].kind));
        saw_mixed |= rec.distortions.size() > 2;
    }
    CHECK(saw_mixed);
}

TEST_CASE("generate_sample rejects unnormalized input") {
    Volume bad({8, 8, 8}, 2.0f);
    CHECK_THROWS_AS(generate_sample(bad, 1, 0.0), data_error);
}

TEST_CASE("generate_dataset: empty run still writes a loadable manifest") {
    const auto dir = fresh_dir("empty");
    DatasetConfig cfg;
    cfg.refs = write_refs(dir, 1, 16);
    cfg.n_samples = 0;
    cfg.size = 16;
    const DatasetManifest m = generate_dataset(cfg, (dir / "out").string());
    CHECK(m.records.empty());
    const DatasetManifest back = load_manifest((dir / "out" / "manifest.jsonl").string());
    CHECK(back.records.empty());
    CHECK(back.config.n_samples == 0);
}

TEST_CASE("generate_dataset: sources rotate round-robin") {
    const auto dir = fresh_dir("rr");
    DatasetConfig cfg;
    cfg.refs = write_refs(dir, 3, 16);
    cfg.n_samples = 12;
    cfg.base_seed = 5;
    cfg.size = 16;
    const DatasetManifest m = generate_dataset(cfg, (dir / "out").string());
    std::map<std::string, int> uses;
    for (const auto& rec : m.records)
        ++uses[rec.source_path];
    REQUIRE(uses.size() == 3);
    for (const auto& [path, count] : uses)
        CHECK(count == 4);
}

TEST_CASE("generate_dataset twice gives byte-identical outputs") {
    const auto dir = fresh_dir("det");
    DatasetConfig cfg;
    cfg.refs = write_refs(dir, 2, 16);
    cfg.n_samples = 6;
    cfg.base_seed = 99;
    cfg.mix_probability = 0.5;
    cfg.size = 16;
    cfg.threads = 1;
    generate_dataset(cfg, (dir / "a").string());
    cfg.threads = 4;
    generate_dataset(cfg, (dir / "b").string());
    CHECK(slurp((dir / "a" / "manifest.jsonl").string()) ==
          slurp((dir / "b" / "manifest.jsonl").string()));
    for (int i = 0; i < 6; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "sample_%06d.nii", i);
        CHECK(slurp((dir / "a" / name).string()) == slurp((dir / "b" / name).string()));
    }
}

TEST_CASE("manifest round-trips through write and load") {
    const auto dir = fresh_dir("mrt");
    DatasetConfig cfg;
    cfg.refs = write_refs(dir, 1, 16);
    cfg.n_samples = 4;
    cfg.base_seed = 3;
    cfg.mix_probability = 1.0;
    cfg.size = 16;
    const DatasetManifest m = generate_dataset(cfg, (dir / "out").string());
    const DatasetManifest back =
        load_manifest((dir / "out" / "manifest.jsonl").string());
    REQUIRE(back.records.size() == m.records.size());
    for (std::size_t i = 0; i < m.records.size(); ++i)
        CHECK(sample_record_to_json(back.records[i]) ==
              sample_record_to_json(m.records[i]));
}

TEST_CASE("recorded parameters reproduce the stored targets and volumes") {
    const auto dir = fresh_dir("replay");
    DatasetConfig cfg;
    cfg.refs = write_refs(dir, 2, 16);
    cfg.n_samples = 8;
    cfg.base_seed = 21;
    cfg.mix_probability = 0.6;
    cfg.size = 16;
    const DatasetManifest m = generate_dataset(cfg, (dir / "out").string());
    for (const auto& rec : m.records) {
        Volume cur = apply_augment(load_volume(rec.source_path), rec.augment);
        QualityVector target;
        for (const auto& d : rec.distortions) {
            const DistortionResult res = apply_distortion(cur, d.kind, d.params);
            cur = res.volume;
            target[static_cast<int>(d.kind)] = res.record.score;
            CHECK(std::abs(res.record.score - d.score) <= 1e-6);
        }
        for (int i = 0; i < QualityVector::count; ++i)
            CHECK(std::abs(target[i] - rec.target[i]) <= 1e-6);
        const Volume stored =
            load_volume((dir / "out" / rec.output_path).string());
        CHECK(max_abs_diff(stored, cur) == 0.0);
    }
}

TEST_CASE("score_report: identical pairs mean 1.0 with zero spread") {
    const auto dir = fresh_dir("ident");
    const auto refs = write_refs(dir, 2, 16);
    const ScoreReport r = score_report({{refs[0], refs[0]}, {refs[1], refs[1]}});
    REQUIRE(r.n_ok == 2);
    for (int i = 0; i < QualityVector::count; ++i) {
        CHECK(r.mean_quality[i] == doctest::Approx(1.0));
        CHECK(r.sd_quality[i] == doctest::Approx(0.0));
    }
    CHECK(r.ssim.mean == doctest::Approx(1.0));
    CHECK(r.aggregate.mean == doctest::Approx(1.0));
    CHECK(r.psnr_score.mean == doctest::Approx(1.0));
}

TEST_CASE("score_report: ring fixtures read back f_c/224 in the ring column") {
    const auto dir = fresh_dir("ring");
    std::vector<std::pair<std::string, std::string>> pairs;
    for (int i = 0; i < 2; ++i) {
        const Volume v = noise_band_phantom(32, 50 + static_cast<std::uint64_t>(i));
        const Volume ringed = apply_gibbs_ringing(v, 112).volume;
        const auto ref_path = (dir / ("r" + std::to_string(i) + ".nii")).string();
        const auto img_path = (dir / ("g" + std::to_string(i) + ".nii")).string();
        save_volume(v, ref_path);
        save_volume(ringed, img_path);
        pairs.emplace_back(ref_path, img_path);
    }
    const ScoreReport r = score_report(pairs);
    REQUIRE(r.n_ok == 2);
    CHECK(std::abs(r.mean_quality.ring - 0.5) <= 1e-6);
    CHECK(r.sd_quality.ring <= 1e-6);
}

TEST_CASE("score_report column spread uses the population definition") {
    const auto dir = fresh_dir("popsd");
    // pair 1 is identical (psnr_score 1), pair 2 has one 0.5-off voxel
    const Volume flat({25, 25, 16}, 0.5f);
    Volume delta = flat;
    delta.data[0] = 1.0f;
    const auto pf = (dir / "f.nii").string();
    const auto pd = (dir / "d.nii").string();
    save_volume(flat, pf);
    save_volume(delta, pd);
    const ScoreReport r = score_report({{pf, pf}, {pf, pd}});
    REQUIRE(r.n_ok == 2);
    const double s1 = r.pairs[0].psnr_score;
    const double s2 = r.pairs[1].psnr_score;
    CHECK(s1 == doctest::Approx(1.0));
    // population over two samples: mean (s1+s2)/2, sd |s1-s2|/2
    CHECK(r.psnr_score.mean == doctest::Approx((s1 + s2) / 2.0).epsilon(1e-12));
    CHECK(r.psnr_score.sd == doctest::Approx((s1 - s2) / 2.0).epsilon(1e-12));
}

TEST_CASE("score_report keeps going past a mismatched pair") {
    const auto dir = fresh_dir("mismatch");
    const Volume a = smooth_phantom(16, 1);
    const Volume b = smooth_phantom(12, 2);
    const auto pa = (dir / "a.nii").string();
    const auto pb = (dir / "b.nii").string();
    save_volume(a, pa);
    save_volume(b, pb);
    const ScoreReport r = score_report({{pa, pb}, {pa, pa}});
    REQUIRE(r.pairs.size() == 2);
    CHECK_FALSE(r.pairs[0].ok);
    CHECK(r.pairs[1].ok);
    CHECK(r.n_ok == 1);
}

TEST_CASE("derive_seed decorrelates neighboring indices") {
    const std::uint64_t a = derive_seed(42, 0);
    const std::uint64_t b = derive_seed(42, 1);
    const std::uint64_t c = derive_seed(43, 0);
    CHECK(a != b);
    CHECK(a != c);
    CHECK(derive_seed(42, 0) == a);
}

TEST_CASE("cli: info succeeds on a valid file") {
    const auto dir = fresh_dir("cli_info");
    const auto path = (dir / "v.nii").string();
    save_volume(smooth_phantom(12, 9), path);
    const char* argv[] = {"mriq", "info", "--in", path.c_str()};
    CHECK(cli_main(4, argv) == 0);
}

TEST_CASE("cli: out-of-range ghost alpha is a usage error") {
    const auto dir = fresh_dir("cli_range");
    const auto in = (dir / "v.nii").string();
    const auto out = (dir / "o.nii").string();
    save_volume(smooth_phantom(12, 9), in);
    const char* argv[] = {"mriq",   "distort", "--in",   in.c_str(),
                          "--out",  out.c_str(), "--kind", "ghost",
                          "--alpha", "1.5"};
    CHECK(cli_main(10, argv) == 1);
}

TEST_CASE("cli: mismatched score dims exit with a data error") {
    const auto dir = fresh_dir("cli_dims");
    const auto pa = (dir / "a.nii").string();
    const auto pb = (dir / "b.nii").string();
    save_volume(smooth_phantom(16, 1), pa);
    save_volume(smooth_phantom(12, 2), pb);
    const char* argv[] = {"mriq", "score", "--ref", pa.c_str(), "--img", pb.c_str()};
    CHECK(cli_main(6, argv) == 2);
}

TEST_CASE("cli: unknown flags are usage errors") {
    const char* argv[] = {"mriq", "info", "--nope", "x"};
    CHECK(cli_main(4, argv) == 1);
}

TEST_CASE("cli: distort then score recovers the ghost factor") {
    const auto dir = fresh_dir("cli_round");
    const auto in = (dir / "v.nii").string();
    const auto out = (dir / "g.nii").string();
    const auto json = (dir / "rec.json").string();
    save_volume(cosine_phantom(16), in);
    const char* distort_argv[] = {"mriq",   "distort", "--in",    in.c_str(),
                                  "--out",  out.c_str(), "--kind",  "ghost",
                                  "--alpha", "0.5",      "--axis",  "1",
                                  "--json", json.c_str()};
    REQUIRE(cli_main(14, distort_argv) == 0);
    CHECK(slurp(json).find("\"score\":0.500000") != std::string::npos);

    const ScoreReport r = score_report({{in, out}});
    REQUIRE(r.n_ok == 1);
    CHECK(r.pairs[0].quality.ghost == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("cli: gen-dataset then report runs end to end") {
    const auto dir = fresh_dir("cli_gen");
    const auto refs_dir = dir / "refs";
    std::filesystem::create_directories(refs_dir);
    write_refs(refs_dir, 2, 16);
    const auto out_dir = (dir / "out").string();
    const char* gen_argv[] = {"mriq", "gen-dataset", "--refs",
                              refs_dir.c_str(),      "--out",  out_dir.c_str(),
                              "--n",  "4",           "--seed", "7",
                              "--mix-prob", "0.5",   "--size", "16"};
    REQUIRE(cli_main(14, gen_argv) == 0);
    const auto manifest = out_dir + "/manifest.jsonl";
    const char* rep_argv[] = {"mriq", "report", "--manifest", manifest.c_str()};
    CHECK(cli_main(4, rep_argv) == 0);
}

TEST_SUITE_END();
