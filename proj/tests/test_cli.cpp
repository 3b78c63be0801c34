// Drives the installed binary end to end: every exit code, every artifact
// format, and agreement with the in-process pipeline on identical inputs.
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "satrdo/denoise.hpp"
#include "satrdo/frame_io.hpp"
#include "satrdo/rdo.hpp"
#include "satrdo/saturation.hpp"

#include "fixtures.hpp"

#ifndef SATRDO_CLI_PATH
#error "SATRDO_CLI_PATH must point at the command-line binary"
#endif

namespace fs = std::filesystem;
using namespace satrdo;

namespace {

struct TempDir {
    fs::path path;

    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("satrdo_test_" + std::to_string(::getpid()) + "_" + tag + "_" +
                std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

int run_cli(const std::string& args) {
    std::string cmd = std::string(SATRDO_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

void write_frames(const FrameSet& set, const fs::path& dir) {
    fs::create_directories(dir);
    for (int i = 0; i < set.count(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%05d.pgm", i);
        save_frame(set.frames[size_t(i)], dir / name, FrameFormat::Pgm);
    }
}

FrameSet read_frames(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<Frame> frames;
    for (const auto& f : files) frames.push_back(load_frame(f, FrameFormat::Pgm));
    return make_frame_set(std::move(frames));
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_file(p)); }

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_CASE("detect pipeline reproduces the in-process run byte for byte") {
    TempDir tmp("pipeline");
    fs::path in_dir = tmp.path / "pristine";
    fs::path ugc_dir = tmp.path / "ugc";
    fs::path out_dir = tmp.path / "out";

    write_frames(fixtures::robust_pristine(), in_dir);
    CHECK(run_cli("generate-ugc " + q(in_dir) + " " + q(ugc_dir) +
                  " --severity 25 --seed 7 --jobs 1") == 0);

    // Severity-only degradation is deterministic, so the tool's output must
    // equal the same synthesis done in process.
    FrameSet expected_ugc = fixtures::robust_ugc();
    FrameSet cli_ugc = read_frames(ugc_dir);
    REQUIRE(cli_ugc.count() == expected_ugc.count());
    CHECK(cli_ugc.frames == expected_ugc.frames);

    nlohmann::json gen_manifest = read_json(ugc_dir / "manifest.json");
    CHECK(gen_manifest["command"] == "generate-ugc");
    CHECK(gen_manifest["severity"] == 25);
    CHECK(gen_manifest["outputs"].size() == 10);

    CHECK(run_cli("detect " + q(ugc_dir) +
                  " --patch-width 480 --patch-height 360 --denoiser deblock:20 --jobs 1 -o " +
                  q(out_dir)) == 0);

    DetectConfig cfg = fixtures::robust_config();
    DetectionRun run = run_detection(expected_ugc, parse_denoiser_spec("deblock:20"), cfg);

    CHECK(read_file(out_dir / "saturation.json") ==
          saturation_result_to_json(run.result, cfg.lambda_grid, "deblock:20",
                                    run.total_pixels));

    nlohmann::json sat = read_json(out_dir / "saturation.json");
    CHECK(sat["verdict"] == "detected");
    CHECK(sat["qp_star"] == 0);

    RDCurve curve_u =
        read_rd_curve_csv(out_dir / "rd_curve_u.csv", Reference::U, run.total_pixels);
    RDCurve curve_z =
        read_rd_curve_csv(out_dir / "rd_curve_z.csv", Reference::Z, run.total_pixels);
    REQUIRE(curve_u.points.size() == run.curve_u.points.size());
    for (size_t i = 0; i < curve_u.points.size(); ++i) {
        CHECK(curve_u.points[i].lambda == run.curve_u.points[i].lambda);
        CHECK(curve_u.points[i].total_rate_bits == run.curve_u.points[i].total_rate_bits);
        CHECK(curve_u.points[i].sse_vs_u == run.curve_u.points[i].sse_vs_u);
        CHECK(curve_u.points[i].sse_vs_z == run.curve_u.points[i].sse_vs_z);
        CHECK(curve_z.points[i].sse_vs_z == run.curve_z.points[i].sse_vs_z);
    }

    nlohmann::json manifest = read_json(out_dir / "manifest.json");
    CHECK(manifest["command"] == "detect");
    CHECK(manifest["frames_loaded"] == 10);
    CHECK(manifest["sample_count"] == 5);
    CHECK(manifest["frame_width"] == 480);
    CHECK(manifest["frame_height"] == 360);
    CHECK(manifest["total_pixels"] == int64_t(5) * 480 * 360);
    CHECK(manifest["denoiser"] == "deblock:20");
    CHECK(manifest["bound_source"] == "u-sweep");
}

TEST_CASE("saturation report re-derives from the emitted curves alone") {
    TempDir tmp("rederive");
    fs::path ugc_dir = tmp.path / "ugc";
    fs::path detect_out = tmp.path / "detect";
    fs::path curve_out = tmp.path / "curves";

    write_frames(fixtures::robust_ugc(), ugc_dir);
    std::string flags =
        " --patch-width 480 --patch-height 360 --denoiser deblock:20 --jobs 1 -o ";
    CHECK(run_cli("detect " + q(ugc_dir) + flags + q(detect_out)) == 0);
    CHECK(run_cli("rd-curve " + q(ugc_dir) + flags + q(curve_out)) == 0);

    // rd-curve must emit exactly the sweeps detect used, and no verdict.
    CHECK(read_file(curve_out / "rd_curve_u.csv") == read_file(detect_out / "rd_curve_u.csv"));
    CHECK(read_file(curve_out / "rd_curve_z.csv") == read_file(detect_out / "rd_curve_z.csv"));
    CHECK(!fs::exists(curve_out / "saturation.json"));
    CHECK(read_json(curve_out / "manifest.json")["command"] == "rd-curve");

    // The verdict is a pure function of the curves: recompute it offline.
    nlohmann::json sat = read_json(detect_out / "saturation.json");
    int64_t total_pixels = read_json(detect_out / "manifest.json")["total_pixels"];
    RDCurve curve_u =
        read_rd_curve_csv(curve_out / "rd_curve_u.csv", Reference::U, total_pixels);
    RDCurve curve_z =
        read_rd_curve_csv(curve_out / "rd_curve_z.csv", Reference::Z, total_pixels);

    int64_t d_uz = std::llround(sat["d_uz_mse"].get<double>() * double(total_pixels));
    double d_best = double(curve_u.points.front().sse_vs_u);
    SaturationBounds bounds = make_bounds(double(d_uz), d_best);

    auto iz = detect_lambda_z_index(curve_z, bounds);
    REQUIRE(iz.has_value());
    CHECK(curve_z.lambda_grid[*iz] == sat["lambda_star_z"].get<double>());
    int64_t rate = curve_z.points[*iz].total_rate_bits;
    CHECK(double(rate) / double(total_pixels) == sat["saturation_rate_bpp"].get<double>());

    auto iu = detect_lambda_u_index(curve_u, rate);
    REQUIRE(iu.has_value());
    CHECK(curve_u.lambda_grid[*iu] == sat["lambda_star_u"].get<double>());
    CHECK(lambda_to_qp(curve_u.lambda_grid[*iu]) == sat["qp_star"].get<int>());
}

TEST_CASE("exit codes distinguish verdicts from operational errors") {
    TempDir tmp("exitcodes");
    fs::path ugc_dir = tmp.path / "ugc";
    write_frames(fixtures::robust_ugc(), ugc_dir);
    std::string patch_flags = " --patch-width 480 --patch-height 360 --jobs 1 -o ";

    CHECK(run_cli("detect " + q(ugc_dir) + " --denoiser gaussian:0" + patch_flags +
                  q(tmp.path / "degenerate")) == 3);
    CHECK(read_json(tmp.path / "degenerate" / "saturation.json")["verdict"] ==
          "degenerate-reference");

    fs::path mild_dir = tmp.path / "mild";
    write_frames(fixtures::degrade(fixtures::e2e_pristine(), 100, 0.0), mild_dir);
    CHECK(run_cli("detect " + q(mild_dir) + " --denoiser gaussian:3 --jobs 1 -o " +
                  q(tmp.path / "nosat")) == 2);
    CHECK(read_json(tmp.path / "nosat" / "saturation.json")["verdict"] ==
          "no-saturation-in-range");

    CHECK(run_cli("detect " + q(tmp.path / "missing") + " -o " + q(tmp.path / "err")) == 1);
    CHECK(run_cli("detect " + q(ugc_dir) + " --denoiser median:3" + patch_flags +
                  q(tmp.path / "err2")) == 1);
}

TEST_CASE("encode reconstructs blockwise-constant frames exactly") {
    TempDir tmp("encode");
    fs::path in_dir = tmp.path / "in";
    fs::path out_dir = tmp.path / "out";
    write_frames(make_frame_set({Frame(48, 40, uint8_t(128)), Frame(48, 40, uint8_t(200))}),
                 in_dir);

    CHECK(run_cli("encode " + q(in_dir) + " --qv 50 --dump-bitstreams --jobs 1 -o " +
                  q(out_dir)) == 0);

    // Constant frames survive qv 50 untouched, and both writers emit the same
    // header, so the files must match byte for byte.
    CHECK(read_file(out_dir / "recon_00000.pgm") == read_file(in_dir / "frame_00000.pgm"));
    CHECK(read_file(out_dir / "recon_00001.pgm") == read_file(in_dir / "frame_00001.pgm"));

    std::istringstream stats(read_file(out_dir / "stats.csv"));
    std::string line;
    std::getline(stats, line);
    CHECK(line == "frame,rate_bits,rate_bpp,mse_vs_input");
    std::getline(stats, line);
    // 30 blocks, 6 bits each: size-0 DC plus end-of-block.
    CHECK(line.substr(0, 6) == "0,180,");
    CHECK(line.substr(line.size() - 2) == ",0");
    std::getline(stats, line);
    CHECK(line.substr(line.size() - 2) == ",0");

    CHECK(fs::file_size(out_dir / "bits_00000.bin") == (180 + 7) / 8);
}

TEST_CASE("raw luma input needs explicit dimensions") {
    TempDir tmp("raw");
    fs::path raw = tmp.path / "frame.y8";
    {
        std::ofstream out(raw, std::ios::binary);
        std::vector<char> bytes(48 * 40, char(78));
        out.write(bytes.data(), std::streamsize(bytes.size()));
    }

    CHECK(run_cli("encode " + q(raw) + " --qv 50 -o " + q(tmp.path / "noflags")) == 1);

    fs::path out_dir = tmp.path / "out";
    CHECK(run_cli("encode " + q(raw) + " --width 48 --height 40 --qv 50 -o " + q(out_dir)) ==
          0);
    Frame recon = load_frame(out_dir / "recon_00000.pgm", FrameFormat::Pgm);
    CHECK(recon == Frame(48, 40, uint8_t(78)));
}

TEST_CASE("generate-ugc is seed-deterministic and bounded at severity 100") {
    TempDir tmp("ugc");
    fs::path in_dir = tmp.path / "in";
    std::vector<Frame> frames;
    for (int i = 0; i < 3; ++i) frames.push_back(fixtures::textured_frame(48, 40, 4242, i));
    FrameSet pristine = make_frame_set(std::move(frames));
    write_frames(pristine, in_dir);

    CHECK(run_cli("generate-ugc " + q(in_dir) + " " + q(tmp.path / "best") +
                  " --severity 100 --jobs 1") == 0);
    FrameSet best = read_frames(tmp.path / "best");
    for (int i = 0; i < 3; ++i)
        for (int y = 0; y < 40; ++y)
            for (int x = 0; x < 48; ++x)
                CHECK(std::abs(int(best.frames[size_t(i)].at(x, y)) -
                               int(pristine.frames[size_t(i)].at(x, y))) <= 1);

    std::string noisy = " --severity 40 --noise-sigma 2 --jobs 1 --seed ";
    CHECK(run_cli("generate-ugc " + q(in_dir) + " " + q(tmp.path / "a") + noisy + "11") == 0);
    CHECK(run_cli("generate-ugc " + q(in_dir) + " " + q(tmp.path / "b") + noisy + "11") == 0);
    CHECK(run_cli("generate-ugc " + q(in_dir) + " " + q(tmp.path / "c") + noisy + "12") == 0);

    FrameSet a = read_frames(tmp.path / "a");
    FrameSet b = read_frames(tmp.path / "b");
    FrameSet c = read_frames(tmp.path / "c");
    CHECK(a.frames == b.frames);
    CHECK(a.frames != c.frames);
}
