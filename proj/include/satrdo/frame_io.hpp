#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace satrdo {

// Single-plane 8-bit luma image. Width and height must each be >= 8 and
// divisible by 8 (the DCT block size); anything else is rejected before any
// pixel data is touched.
class Frame {
public:
    Frame() = default;
    Frame(int width, int height, std::vector<uint8_t> samples);
    Frame(int width, int height, uint8_t fill);

    int width() const { return width_; }
    int height() const { return height_; }
    int64_t pixel_count() const { return int64_t(width_) * height_; }

    uint8_t at(int x, int y) const { return samples_[size_t(y) * width_ + x]; }
    const std::vector<uint8_t>& samples() const { return samples_; }

    bool operator==(const Frame&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<uint8_t> samples_;
};

// Throws std::invalid_argument unless both dimensions are >= 8 and multiples of 8.
void validate_frame_dims(int width, int height);

// Ordered list of same-sized frames plus the frame numbers they came from.
struct FrameSet {
    std::vector<Frame> frames;
    std::vector<int> source_indices;

    int width() const { return frames.front().width(); }
    int height() const { return frames.front().height(); }
    int count() const { return static_cast<int>(frames.size()); }
    int64_t pixel_count() const { return frames.front().pixel_count() * count(); }
};

// Wraps frames into a set with source indices 0..n-1. Throws on an empty list
// or mismatched dimensions.
FrameSet make_frame_set(std::vector<Frame> frames);

// Throws std::invalid_argument if the FrameSet invariants do not hold.
void validate_frame_set(const FrameSet& set);

enum class FrameFormat { Pgm, RawY8 };

// Loads one frame. Pgm: binary P5 with maxval 255, dimensions from the
// header. RawY8: headerless row-major luma bytes; width/height are required
// and must match the byte count exactly.
Frame load_frame(const std::filesystem::path& path, FrameFormat format,
                 int width = 0, int height = 0);

// Writes a frame losslessly; load_frame(save_frame(f)) == f bit for bit.
void save_frame(const Frame& frame, const std::filesystem::path& path, FrameFormat format);

// Picks `count` frames at indices floor(i * total / count), i = 0..count-1,
// recording where they came from. count must be in [1, total].
FrameSet sample_frames(const FrameSet& set, int count);

// Rectangular pixel block cut out of a frame.
struct Patch {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> px;

    bool operator==(const Patch&) const = default;
};

// Partition of a frame set into fixed-size patches. Patch k maps to
// (frame, row-block, col-block) in raster order:
//   k = frame * patches_per_frame() + row * cols + col.
struct PatchGrid {
    int patch_width = 0;
    int patch_height = 0;
    int cols = 0;
    int rows = 0;
    int frame_count = 0;

    int patches_per_frame() const { return cols * rows; }
    int64_t total_patches() const { return int64_t(patches_per_frame()) * frame_count; }
};

// Patch dims must divide the frame dims and be multiples of 8.
PatchGrid make_patch_grid(const FrameSet& set, int patch_width, int patch_height);

Patch extract_patch(const FrameSet& set, const PatchGrid& grid, int64_t k);

// Whole frame viewed as one patch (used for full-frame encodes).
Patch frame_as_patch(const Frame& frame);
Frame patch_to_frame(const Patch& patch);

// Sum of squared differences; integer-exact on 8-bit data.
int64_t sse(std::span<const uint8_t> a, std::span<const uint8_t> b);
int64_t sse(const Patch& a, const Patch& b);
int64_t sse(const FrameSet& a, const FrameSet& b);

}  // namespace satrdo
