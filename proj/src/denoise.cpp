#include "satrdo/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "satrdo/parallel.hpp"

namespace satrdo {

namespace {

Frame deblock_frame(const Frame& in, double strength) {
    int w = in.width();
    int h = in.height();
    std::vector<uint8_t> px = in.samples();

    // Across vertical boundaries: pairs (x-1, x) at x = 8, 16, ...
    for (int y = 0; y < h; ++y) {
        for (int x = 8; x < w; x += 8) {
            int a = px[size_t(y) * w + x - 1];
            int b = px[size_t(y) * w + x];
            if (std::abs(a - b) < strength) {
                px[size_t(y) * w + x - 1] = uint8_t((3 * a + b + 2) / 4);
                px[size_t(y) * w + x] = uint8_t((a + 3 * b + 2) / 4);
            }
        }
    }
    // Across horizontal boundaries: pairs (y-1, y) at y = 8, 16, ...
    for (int y = 8; y < h; y += 8) {
        for (int x = 0; x < w; ++x) {
            int a = px[size_t(y - 1) * w + x];
            int b = px[size_t(y) * w + x];
            if (std::abs(a - b) < strength) {
                px[size_t(y - 1) * w + x] = uint8_t((3 * a + b + 2) / 4);
                px[size_t(y) * w + x] = uint8_t((a + 3 * b + 2) / 4);
            }
        }
    }
    return Frame(w, h, std::move(px));
}

// Symmetric reflection including the edge sample: -1 -> 0, n -> n-1.
int reflect(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - i - 1;
    }
    return i;
}

Frame gaussian_frame(const Frame& in, double sigma) {
    if (sigma == 0.0) return in;
    int w = in.width();
    int h = in.height();
    int radius = int(std::ceil(3.0 * sigma));

    std::vector<double> kernel(size_t(radius) + 1);
    double sum = 0;
    for (int i = 0; i <= radius; ++i) {
        kernel[size_t(i)] = std::exp(-0.5 * (double(i) * i) / (sigma * sigma));
        sum += i == 0 ? kernel[size_t(i)] : 2 * kernel[size_t(i)];
    }
    for (double& v : kernel) v /= sum;

    std::vector<double> rows(size_t(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = kernel[0] * in.at(x, y);
            for (int i = 1; i <= radius; ++i)
                acc += kernel[size_t(i)] *
                       (in.at(reflect(x - i, w), y) + in.at(reflect(x + i, w), y));
            rows[size_t(y) * w + x] = acc;
        }
    }
    std::vector<uint8_t> px(size_t(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = kernel[0] * rows[size_t(y) * w + x];
            for (int i = 1; i <= radius; ++i)
                acc += kernel[size_t(i)] * (rows[size_t(reflect(y - i, h)) * w + x] +
                                            rows[size_t(reflect(y + i, h)) * w + x]);
            long v = std::lround(acc);
            px[size_t(y) * w + x] = uint8_t(v < 0 ? 0 : (v > 255 ? 255 : v));
        }
    }
    return Frame(w, h, std::move(px));
}

FrameFormat format_for(const std::filesystem::path& p) {
    return p.extension() == ".pgm" ? FrameFormat::Pgm : FrameFormat::RawY8;
}

FrameSet external_frames(const FrameSet& in, const std::vector<std::filesystem::path>& paths) {
    if (paths.empty()) throw std::invalid_argument("external denoiser has no files");
    size_t n = size_t(in.count());
    std::vector<std::filesystem::path> picked;
    if (paths.size() == n) {
        picked = paths;
    } else {
        // A listing of the full original sequence: select at source_indices.
        for (int idx : in.source_indices) {
            if (idx < 0 || size_t(idx) >= paths.size()) {
                std::ostringstream msg;
                msg << "external denoiser: " << paths.size() << " files cannot cover "
                    << n << " frames with source index " << idx;
                throw std::invalid_argument(msg.str());
            }
            picked.push_back(paths[size_t(idx)]);
        }
    }
    FrameSet out;
    out.source_indices = in.source_indices;
    for (const auto& p : picked) {
        Frame f = load_frame(p, format_for(p), in.width(), in.height());
        if (f.width() != in.width() || f.height() != in.height()) {
            std::ostringstream msg;
            msg << p.string() << ": " << f.width() << "x" << f.height()
                << " does not match input frames " << in.width() << "x" << in.height();
            throw std::invalid_argument(msg.str());
        }
        out.frames.push_back(std::move(f));
    }
    return out;
}

std::string trim_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

DenoiserSpec parse_denoiser_spec(const std::string& text) {
    auto colon = text.find(':');
    std::string kind = text.substr(0, colon);
    std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);

    DenoiserSpec spec;
    if (kind == "deblock" || kind == "gaussian") {
        spec.kind = kind == "deblock" ? DenoiserKind::Deblock : DenoiserKind::Gaussian;
        if (arg.empty()) throw std::invalid_argument("denoiser '" + kind + "' needs a strength");
        size_t used = 0;
        spec.strength = std::stod(arg, &used);
        if (used != arg.size())
            throw std::invalid_argument("bad denoiser strength '" + arg + "'");
    } else if (kind == "external") {
        spec.kind = DenoiserKind::External;
        if (arg.empty()) throw std::invalid_argument("external denoiser needs a directory");
        std::filesystem::path dir(arg);
        if (!std::filesystem::is_directory(dir))
            throw std::invalid_argument("external denoiser: not a directory: " + arg);
        for (const auto& e : std::filesystem::directory_iterator(dir))
            if (e.is_regular_file()) spec.external_paths.push_back(e.path());
        std::sort(spec.external_paths.begin(), spec.external_paths.end());
        if (spec.external_paths.empty())
            throw std::invalid_argument("external denoiser: no files in " + arg);
    } else {
        throw std::invalid_argument("unknown denoiser '" + text +
                                    "' (expected deblock:S | gaussian:S | external:<dir>)");
    }
    return spec;
}

std::string to_string(const DenoiserSpec& spec) {
    switch (spec.kind) {
        case DenoiserKind::Deblock:
            return "deblock:" + trim_number(spec.strength);
        case DenoiserKind::Gaussian:
            return "gaussian:" + trim_number(spec.strength);
        case DenoiserKind::External:
            return "external:" + std::to_string(spec.external_paths.size()) + "-files";
    }
    return "?";
}

FrameSet denoise(const FrameSet& frames, const DenoiserSpec& spec, int jobs) {
    validate_frame_set(frames);
    if (spec.kind == DenoiserKind::External) return external_frames(frames, spec.external_paths);
    if (!(spec.strength >= 0) || !std::isfinite(spec.strength))
        throw std::invalid_argument("denoiser strength must be finite and >= 0");

    FrameSet out;
    out.source_indices = frames.source_indices;
    out.frames.resize(frames.frames.size());
    parallel_for(int64_t(frames.frames.size()), jobs, [&](int64_t begin, int64_t end) {
        for (int64_t i = begin; i < end; ++i) {
            const Frame& f = frames.frames[size_t(i)];
            out.frames[size_t(i)] = spec.kind == DenoiserKind::Deblock
                                        ? deblock_frame(f, spec.strength)
                                        : gaussian_frame(f, spec.strength);
        }
    });
    return out;
}

}  // namespace satrdo
