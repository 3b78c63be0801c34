#include "satrdo/frame_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace satrdo {

void validate_frame_dims(int width, int height) {
    if (width < 8 || height < 8 || width % 8 != 0 || height % 8 != 0) {
        std::ostringstream msg;
        msg << "frame dimensions " << width << "x" << height
            << " rejected: each must be >= 8 and divisible by 8";
        throw std::invalid_argument(msg.str());
    }
}

Frame::Frame(int width, int height, std::vector<uint8_t> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
    validate_frame_dims(width, height);
    if (samples_.size() != size_t(pixel_count())) {
        std::ostringstream msg;
        msg << "sample count " << samples_.size() << " does not match " << width
            << "x" << height << " = " << pixel_count();
        throw std::invalid_argument(msg.str());
    }
}

Frame::Frame(int width, int height, uint8_t fill)
    : Frame(width, height, std::vector<uint8_t>(size_t(width) * height, fill)) {}

FrameSet make_frame_set(std::vector<Frame> frames) {
    FrameSet set;
    set.frames = std::move(frames);
    set.source_indices.resize(set.frames.size());
    for (size_t i = 0; i < set.frames.size(); ++i) set.source_indices[i] = int(i);
    validate_frame_set(set);
    return set;
}

void validate_frame_set(const FrameSet& set) {
    if (set.frames.empty()) throw std::invalid_argument("frame set is empty");
    if (set.source_indices.size() != set.frames.size())
        throw std::invalid_argument("source_indices length does not match frame count");
    int w = set.frames.front().width();
    int h = set.frames.front().height();
    for (const Frame& f : set.frames) {
        if (f.width() != w || f.height() != h)
            throw std::invalid_argument("frames in a set must share dimensions");
    }
    for (size_t i = 1; i < set.source_indices.size(); ++i) {
        if (set.source_indices[i] <= set.source_indices[i - 1])
            throw std::invalid_argument("source_indices must be strictly increasing");
    }
}

namespace {

// Reads the next PGM header token, skipping whitespace and '#' comments.
std::string next_pgm_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(char(c));
    }
    return tok;
}

int parse_header_int(const std::string& tok, const char* what) {
    if (tok.empty()) throw std::runtime_error(std::string("pgm header: missing ") + what);
    for (char c : tok) {
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw std::runtime_error(std::string("pgm header: bad ") + what + " '" + tok + "'");
    }
    return std::stoi(tok);
}

Frame load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string magic = next_pgm_token(in);
    if (magic != "P5") throw std::runtime_error(path.string() + ": not a binary PGM (P5)");
    int w = parse_header_int(next_pgm_token(in), "width");
    int h = parse_header_int(next_pgm_token(in), "height");
    int maxval = parse_header_int(next_pgm_token(in), "maxval");
    if (maxval != 255)
        throw std::runtime_error(path.string() + ": maxval must be 255, got " + std::to_string(maxval));
    validate_frame_dims(w, h);
    std::vector<uint8_t> px(size_t(w) * h);
    in.read(reinterpret_cast<char*>(px.data()), std::streamsize(px.size()));
    if (in.gcount() != std::streamsize(px.size()))
        throw std::runtime_error(path.string() + ": truncated pixel data");
    if (in.get() != EOF)
        throw std::runtime_error(path.string() + ": trailing bytes after pixel data");
    return Frame(w, h, std::move(px));
}

Frame load_raw_y8(const std::filesystem::path& path, int width, int height) {
    if (width <= 0 || height <= 0)
        throw std::invalid_argument("raw-y8 load requires explicit positive dimensions");
    validate_frame_dims(width, height);
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    auto bytes = int64_t(in.tellg());
    int64_t expected = int64_t(width) * height;
    if (bytes != expected) {
        std::ostringstream msg;
        msg << path.string() << ": " << bytes << " bytes but " << width << "x" << height
            << " requires exactly " << expected;
        throw std::runtime_error(msg.str());
    }
    in.seekg(0);
    std::vector<uint8_t> px(static_cast<size_t>(expected));
    in.read(reinterpret_cast<char*>(px.data()), std::streamsize(px.size()));
    if (in.gcount() != std::streamsize(px.size()))
        throw std::runtime_error(path.string() + ": short read");
    return Frame(width, height, std::move(px));
}

}  // namespace

Frame load_frame(const std::filesystem::path& path, FrameFormat format, int width, int height) {
    if (!std::filesystem::exists(path))
        throw std::runtime_error("no such file: " + path.string());
    switch (format) {
        case FrameFormat::Pgm:
            return load_pgm(path);
        case FrameFormat::RawY8:
            return load_raw_y8(path, width, height);
    }
    throw std::invalid_argument("unknown frame format");
}

void save_frame(const Frame& frame, const std::filesystem::path& path, FrameFormat format) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (format == FrameFormat::Pgm) {
        out << "P5\n" << frame.width() << " " << frame.height() << "\n255\n";
    }
    out.write(reinterpret_cast<const char*>(frame.samples().data()),
              std::streamsize(frame.samples().size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

FrameSet sample_frames(const FrameSet& set, int count) {
    validate_frame_set(set);
    int total = set.count();
    if (count <= 0 || count > total) {
        std::ostringstream msg;
        msg << "sample count " << count << " out of range [1, " << total << "]";
        throw std::invalid_argument(msg.str());
    }
    FrameSet out;
    out.frames.reserve(size_t(count));
    out.source_indices.reserve(size_t(count));
    for (int i = 0; i < count; ++i) {
        int pick = int((int64_t(i) * total) / count);
        out.frames.push_back(set.frames[size_t(pick)]);
        out.source_indices.push_back(set.source_indices[size_t(pick)]);
    }
    return out;
}

PatchGrid make_patch_grid(const FrameSet& set, int patch_width, int patch_height) {
    validate_frame_set(set);
    if (patch_width < 8 || patch_height < 8 || patch_width % 8 != 0 || patch_height % 8 != 0)
        throw std::invalid_argument("patch dimensions must be >= 8 and divisible by 8");
    if (set.width() % patch_width != 0 || set.height() % patch_height != 0) {
        std::ostringstream msg;
        msg << "patch size " << patch_width << "x" << patch_height
            << " does not divide frame size " << set.width() << "x" << set.height();
        throw std::invalid_argument(msg.str());
    }
    PatchGrid grid;
    grid.patch_width = patch_width;
    grid.patch_height = patch_height;
    grid.cols = set.width() / patch_width;
    grid.rows = set.height() / patch_height;
    grid.frame_count = set.count();
    return grid;
}

Patch extract_patch(const FrameSet& set, const PatchGrid& grid, int64_t k) {
    if (k < 0 || k >= grid.total_patches())
        throw std::out_of_range("patch index out of range");
    int ppf = grid.patches_per_frame();
    int frame = int(k / ppf);
    int rem = int(k % ppf);
    int row = rem / grid.cols;
    int col = rem % grid.cols;
    const Frame& f = set.frames[size_t(frame)];
    Patch p;
    p.width = grid.patch_width;
    p.height = grid.patch_height;
    p.px.resize(size_t(p.width) * p.height);
    int x0 = col * grid.patch_width;
    int y0 = row * grid.patch_height;
    for (int y = 0; y < p.height; ++y) {
        const uint8_t* src = f.samples().data() + size_t(y0 + y) * f.width() + x0;
        std::copy(src, src + p.width, p.px.begin() + size_t(y) * p.width);
    }
    return p;
}

Patch frame_as_patch(const Frame& frame) {
    Patch p;
    p.width = frame.width();
    p.height = frame.height();
    p.px = frame.samples();
    return p;
}

Frame patch_to_frame(const Patch& patch) {
    return Frame(patch.width, patch.height, patch.px);
}

int64_t sse(std::span<const uint8_t> a, std::span<const uint8_t> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("sse: size mismatch");
    int64_t acc = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        int d = int(a[i]) - int(b[i]);
        acc += int64_t(d) * d;
    }
    return acc;
}

int64_t sse(const Patch& a, const Patch& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("sse: patch shape mismatch");
    return sse(std::span<const uint8_t>(a.px), std::span<const uint8_t>(b.px));
}

int64_t sse(const FrameSet& a, const FrameSet& b) {
    if (a.count() != b.count() || a.width() != b.width() || a.height() != b.height())
        throw std::invalid_argument("sse: frame set shape mismatch");
    int64_t acc = 0;
    for (int i = 0; i < a.count(); ++i)
        acc += sse(std::span<const uint8_t>(a.frames[size_t(i)].samples()),
                   std::span<const uint8_t>(b.frames[size_t(i)].samples()));
    return acc;
}

}  // namespace satrdo
