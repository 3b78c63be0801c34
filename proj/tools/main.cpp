#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "satrdo/codec.hpp"
#include "satrdo/denoise.hpp"
#include "satrdo/frame_io.hpp"
#include "satrdo/parallel.hpp"
#include "satrdo/rdo.hpp"
#include "satrdo/saturation.hpp"
#include "satrdo/ugc_synth.hpp"

namespace fs = std::filesystem;
using namespace satrdo;

namespace {

struct InputOpts {
    std::vector<std::string> inputs;
    int width = 0;
    int height = 0;
};

struct GridOpts {
    int sample_count = 5;
    bool sample_count_set = false;
    int patch_width = 48;
    int patch_height = 40;
    int qv_min = 19;
    int qv_max = 95;
    int qv_step = 4;
    std::vector<double> lambda_grid;
};

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string lower_ext(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return ext;
}

bool is_pgm(const fs::path& p) { return lower_ext(p) == ".pgm"; }

bool is_frame_file(const fs::path& p) {
    std::string ext = lower_ext(p);
    return ext == ".pgm" || ext == ".y8" || ext == ".raw" || ext == ".yuv";
}

// Each argument is a frame file or a directory expanded to its sorted frame
// files. Expansion filters by extension so sidecar files (manifests, stats)
// living next to the frames are ignored; explicitly named files are not
// filtered.
std::vector<fs::path> resolve_inputs(const std::vector<std::string>& inputs) {
    std::vector<fs::path> files;
    for (const auto& arg : inputs) {
        fs::path p(arg);
        if (fs::is_directory(p)) {
            std::vector<fs::path> entries;
            for (const auto& e : fs::directory_iterator(p))
                if (e.is_regular_file() && is_frame_file(e.path())) entries.push_back(e.path());
            if (entries.empty())
                throw std::runtime_error("no frame files in directory: " + arg);
            std::sort(entries.begin(), entries.end());
            files.insert(files.end(), entries.begin(), entries.end());
        } else if (fs::is_regular_file(p)) {
            files.push_back(p);
        } else {
            throw std::runtime_error("input not found: " + arg);
        }
    }
    if (files.empty()) throw std::runtime_error("no input frames");
    return files;
}

FrameSet load_frames(const std::vector<fs::path>& files, const InputOpts& in) {
    std::vector<Frame> frames;
    frames.reserve(files.size());
    for (const auto& f : files) {
        if (is_pgm(f)) {
            frames.push_back(load_frame(f, FrameFormat::Pgm));
        } else {
            if (in.width <= 0 || in.height <= 0)
                throw std::runtime_error("raw input " + f.string() +
                                         " requires --width and --height");
            frames.push_back(load_frame(f, FrameFormat::RawY8, in.width, in.height));
        }
    }
    return make_frame_set(std::move(frames));
}

std::vector<int> make_qv_grid(const GridOpts& g) {
    if (g.qv_min > g.qv_max) throw std::runtime_error("--qv-min must be <= --qv-max");
    std::vector<int> qvs;
    for (int qv = g.qv_min; qv <= g.qv_max; qv += g.qv_step) qvs.push_back(qv);
    return qvs;
}

int effective_sample_count(const GridOpts& g, int total) {
    if (g.sample_count_set) return g.sample_count;
    return std::min(g.sample_count, total);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

nlohmann::json manifest_base(const std::string& command, const std::vector<fs::path>& files,
                             const InputOpts& in, int jobs) {
    nlohmann::json m;
    m["command"] = command;
    std::vector<std::string> resolved;
    for (const auto& f : files) resolved.push_back(f.string());
    m["inputs"] = resolved;
    if (in.width > 0) m["width"] = in.width;
    if (in.height > 0) m["height"] = in.height;
    m["jobs"] = jobs;
    return m;
}

void add_detect_config(nlohmann::json& m, const DetectConfig& cfg, const std::string& denoiser,
                       const FrameSet& frames) {
    m["sample_count"] = cfg.sample_count;
    m["patch_width"] = cfg.patch_width;
    m["patch_height"] = cfg.patch_height;
    m["qv_grid"] = cfg.qv_grid;
    m["lambda_grid"] = cfg.lambda_grid;
    m["denoiser"] = denoiser;
    m["bound_source"] = cfg.bound_source == BoundSource::USweep ? "u-sweep" : "z-sweep";
    m["frames_loaded"] = frames.count();
    m["frame_width"] = frames.width();
    m["frame_height"] = frames.height();
    m["total_pixels"] =
        int64_t(cfg.sample_count) * frames.width() * frames.height();
}

DetectConfig build_config(const GridOpts& g, BoundSource bound_source, int jobs, int total) {
    DetectConfig cfg;
    cfg.sample_count = effective_sample_count(g, total);
    cfg.patch_width = g.patch_width;
    cfg.patch_height = g.patch_height;
    cfg.qv_grid = make_qv_grid(g);
    if (!g.lambda_grid.empty()) cfg.lambda_grid = g.lambda_grid;
    cfg.bound_source = bound_source;
    cfg.jobs = jobs;
    return cfg;
}

int run_detect(const InputOpts& in, const GridOpts& grid, const std::string& denoiser_text,
               BoundSource bound_source, int jobs, const fs::path& out_dir, bool curves_only) {
    auto files = resolve_inputs(in.inputs);
    FrameSet frames = load_frames(files, in);
    DenoiserSpec denoiser = parse_denoiser_spec(denoiser_text);
    DetectConfig cfg = build_config(grid, bound_source, jobs, frames.count());

    DetectionRun run = run_detection(frames, denoiser, cfg);

    fs::create_directories(out_dir);
    write_rd_curve_csv(out_dir / "rd_curve_u.csv", run.curve_u, run.total_pixels);
    write_rd_curve_csv(out_dir / "rd_curve_z.csv", run.curve_z, run.total_pixels);

    nlohmann::json manifest =
        manifest_base(curves_only ? "rd-curve" : "detect", files, in, jobs);
    add_detect_config(manifest, cfg, to_string(denoiser), frames);
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");

    if (curves_only) {
        std::cout << "wrote " << (out_dir / "rd_curve_u.csv").string() << " and "
                  << (out_dir / "rd_curve_z.csv").string() << "\n";
        return 0;
    }

    const SaturationResult& res = run.result;
    write_text(out_dir / "saturation.json",
               saturation_result_to_json(res, cfg.lambda_grid, to_string(denoiser),
                                         run.total_pixels));

    std::cout << "verdict: " << to_string(res.verdict) << "\n";
    double px = double(run.total_pixels);
    std::cout << "d_uz_mse: " << fmt(res.bounds.d_uz / px)
              << "  d_best_mse: " << fmt(res.bounds.d_best / px) << "\n";
    if (res.lambda_star_z)
        std::cout << "lambda_star_z: " << fmt(*res.lambda_star_z) << "  saturation_rate_bpp: "
                  << fmt(double(*res.saturation_rate_bits) / px) << "\n";
    if (res.lambda_star_u)
        std::cout << "lambda_star_u: " << fmt(*res.lambda_star_u) << "  qp_star: " << *res.qp_star
                  << "\n";
    std::cout << "transition_lambda: " << fmt(run.transition_lambda) << "\n";

    switch (res.verdict) {
        case Verdict::Detected: return 0;
        case Verdict::NoSaturationInRange: return 2;
        case Verdict::DegenerateReference: return 3;
    }
    return 1;
}

int run_generate_ugc(const InputOpts& in, const SynthSpec& spec, int jobs,
                     const fs::path& out_dir) {
    auto files = resolve_inputs(in.inputs);
    FrameSet pristine = load_frames(files, in);
    FrameSet ugc = synthesize_ugc(pristine, spec, jobs);

    fs::create_directories(out_dir);
    std::vector<std::string> outputs;
    for (int i = 0; i < ugc.count(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%05d.pgm", i);
        fs::path p = out_dir / name;
        save_frame(ugc.frames[size_t(i)], p, FrameFormat::Pgm);
        outputs.push_back(p.string());
    }

    nlohmann::json manifest = manifest_base("generate-ugc", files, in, jobs);
    manifest["severity"] = spec.severity_qv;
    manifest["noise_sigma"] = spec.noise_sigma;
    manifest["seed"] = spec.seed;
    manifest["outputs"] = outputs;
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");

    std::cout << "wrote " << ugc.count() << " frames to " << out_dir.string() << "\n";
    return 0;
}

int run_encode(const InputOpts& in, int qv, bool dump_bitstreams, int jobs,
               const fs::path& out_dir) {
    auto files = resolve_inputs(in.inputs);
    FrameSet frames = load_frames(files, in);

    std::vector<EncodedPatch> coded(size_t(frames.count()));
    parallel_for(frames.count(), jobs, [&](int64_t begin, int64_t end) {
        for (int64_t i = begin; i < end; ++i)
            coded[size_t(i)] = encode_patch(frame_as_patch(frames.frames[size_t(i)]), qv);
    });

    fs::create_directories(out_dir);
    std::string stats = "frame,rate_bits,rate_bpp,mse_vs_input\n";
    for (int i = 0; i < frames.count(); ++i) {
        const EncodedPatch& e = coded[size_t(i)];
        char name[32];
        std::snprintf(name, sizeof name, "recon_%05d.pgm", i);
        save_frame(patch_to_frame(e.recon), out_dir / name, FrameFormat::Pgm);
        if (dump_bitstreams) {
            std::snprintf(name, sizeof name, "bits_%05d.bin", i);
            std::ofstream bits(out_dir / name, std::ios::binary);
            bits.write(reinterpret_cast<const char*>(e.bitstream.data()),
                       std::streamsize(e.bitstream.size()));
            if (!bits) throw std::runtime_error("write failed: bitstream dump");
        }
        double px = double(frames.frames[size_t(i)].pixel_count());
        int64_t d = sse(e.recon, frame_as_patch(frames.frames[size_t(i)]));
        stats += std::to_string(i) + "," + std::to_string(e.rate_bits) + "," +
                 fmt(double(e.rate_bits) / px) + "," + fmt(double(d) / px) + "\n";
    }
    write_text(out_dir / "stats.csv", stats);

    nlohmann::json manifest = manifest_base("encode", files, in, jobs);
    manifest["qv"] = qv;
    manifest["dump_bitstreams"] = dump_bitstreams;
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");

    std::cout << "encoded " << frames.count() << " frames at qv " << qv << "\n";
    return 0;
}

void add_input_flags(CLI::App* cmd, InputOpts& in) {
    cmd->add_option("inputs", in.inputs, "Frame files or directories (.pgm or raw luma)")
        ->required();
    cmd->add_option("--width", in.width, "Frame width for raw inputs");
    cmd->add_option("--height", in.height, "Frame height for raw inputs");
}

void add_grid_flags(CLI::App* cmd, GridOpts& g) {
    cmd->add_option("--sample-count", g.sample_count,
                    "Frames to sample uniformly (default 5, capped at the input size)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--patch-width", g.patch_width, "Patch width (default 48)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--patch-height", g.patch_height, "Patch height (default 40)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--qv-min", g.qv_min, "Lowest quality value (default 19)")
        ->check(CLI::Range(1, 100));
    cmd->add_option("--qv-max", g.qv_max, "Highest quality value (default 95)")
        ->check(CLI::Range(1, 100));
    cmd->add_option("--qv-step", g.qv_step, "Quality grid step (default 4)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--lambda-grid", g.lambda_grid,
                    "Comma-separated lambda grid override (default: QP 0..51 mapped)")
        ->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quality-saturation detector for re-encoding previously compressed frames"};
    app.require_subcommand(1);

    InputOpts in;
    GridOpts grid;
    std::string denoiser_text = "deblock:20";
    std::string bound_text = "u-sweep";
    std::string out_dir = ".";
    int jobs = hardware_jobs();
    SynthSpec synth;
    std::string ugc_out;
    int qv = 50;
    bool dump_bitstreams = false;

    auto add_jobs = [&](CLI::App* cmd) {
        cmd->add_option("--jobs", jobs, "Worker threads (default: available cores)")
            ->envname("SATRDO_JOBS")
            ->check(CLI::PositiveNumber);
    };
    auto add_out = [&](CLI::App* cmd) {
        cmd->add_option("-o,--output", out_dir, "Output directory (default .)");
    };

    CLI::App* detect = app.add_subcommand(
        "detect", "Find the saturation lambda and QP for previously compressed frames");
    add_input_flags(detect, in);
    add_grid_flags(detect, grid);
    detect->add_option("--denoiser", denoiser_text,
                       "deblock:<strength> | gaussian:<sigma> | external:<dir> (default deblock:20)");
    detect
        ->add_option("--bound-source", bound_text,
                     "Sweep supplying the d_best bound (default u-sweep)")
        ->check(CLI::IsMember({"u-sweep", "z-sweep"}));
    add_jobs(detect);
    add_out(detect);

    CLI::App* rd_curve =
        app.add_subcommand("rd-curve", "Write both RD sweeps as CSV without detection");
    add_input_flags(rd_curve, in);
    add_grid_flags(rd_curve, grid);
    rd_curve->add_option("--denoiser", denoiser_text,
                         "deblock:<strength> | gaussian:<sigma> | external:<dir>");
    rd_curve
        ->add_option("--bound-source", bound_text,
                     "Kept for config parity; the CSVs are bound-independent")
        ->check(CLI::IsMember({"u-sweep", "z-sweep"}));
    add_jobs(rd_curve);
    add_out(rd_curve);

    CLI::App* gen = app.add_subcommand("generate-ugc",
                                       "Degrade pristine frames with noise plus compression");
    std::string ugc_in;
    gen->add_option("input", ugc_in, "Pristine frame file or directory")->required();
    gen->add_option("output", ugc_out, "Output directory")->required();
    gen->add_option("--width", in.width, "Frame width for raw inputs");
    gen->add_option("--height", in.height, "Frame height for raw inputs");
    gen->add_option("--severity", synth.severity_qv,
                    "Compression quality value, lower = heavier artifacts (default 25)")
        ->check(CLI::Range(1, 100));
    gen->add_option("--noise-sigma", synth.noise_sigma, "Gaussian noise sigma (default 0)")
        ->check(CLI::NonNegativeNumber);
    gen->add_option("--seed", synth.seed, "Noise seed (default 0)");
    add_jobs(gen);

    CLI::App* encode = app.add_subcommand("encode", "Code frames at one quality value");
    add_input_flags(encode, in);
    encode->add_option("--qv", qv, "Quality value (default 50)")->check(CLI::Range(1, 100));
    encode->add_flag("--dump-bitstreams", dump_bitstreams, "Also write raw bitstreams");
    add_jobs(encode);
    add_out(encode);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    grid.sample_count_set = detect->count("--sample-count") > 0 ||
                            rd_curve->count("--sample-count") > 0;
    BoundSource bound_source =
        bound_text == "z-sweep" ? BoundSource::ZSweep : BoundSource::USweep;

    try {
        if (app.got_subcommand(detect))
            return run_detect(in, grid, denoiser_text, bound_source, jobs, out_dir, false);
        if (app.got_subcommand(rd_curve))
            return run_detect(in, grid, denoiser_text, bound_source, jobs, out_dir, true);
        if (app.got_subcommand(gen)) {
            in.inputs = {ugc_in};
            return run_generate_ugc(in, synth, jobs, ugc_out);
        }
        if (app.got_subcommand(encode))
            return run_encode(in, qv, dump_bitstreams, jobs, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
