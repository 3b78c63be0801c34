// Shared test fixtures: procedural content generators and the canned
// UGC sets used by the end-to-end and robustness tests.
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "satrdo/frame_io.hpp"
#include "satrdo/rdo.hpp"
#include "satrdo/saturation.hpp"
#include "satrdo/ugc_synth.hpp"

namespace fixtures {

namespace detail {

// Hash-based lattice noise in [-1, 1). Stable across platforms.
inline double lattice(uint64_t seed, int i, int j) {
    uint64_t h = seed;
    h ^= uint64_t(uint32_t(i)) * 0x9e3779b97f4a7c15ULL;
    h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
    h ^= uint64_t(uint32_t(j)) * 0x94d049bb133111ebULL;
    h = (h ^ (h >> 27)) * 0x2545f4914f6cdd1dULL;
    h ^= h >> 31;
    return double(h >> 11) * (2.0 / 9007199254740992.0) - 1.0;
}

// Smoothstep-interpolated value noise over a square cell grid.
inline double value_noise(uint64_t seed, double x, double y, double cell) {
    double fx = x / cell, fy = y / cell;
    int ix = int(std::floor(fx)), iy = int(std::floor(fy));
    double tx = fx - ix, ty = fy - iy;
    double sx = tx * tx * (3 - 2 * tx), sy = ty * ty * (3 - 2 * ty);
    double a = std::lerp(lattice(seed, ix, iy), lattice(seed, ix + 1, iy), sx);
    double b = std::lerp(lattice(seed, ix, iy + 1), lattice(seed, ix + 1, iy + 1), sx);
    return std::lerp(a, b, sy);
}

} // namespace detail

// Over-ranged smooth field, hard-clamped to [0, 255]. The amplitude is
// deliberately far beyond pixel range: large saturated regions separated
// by smooth ramps. Frames pan so each frame differs.
inline satrdo::Frame exposure_frame(int width, int height, uint64_t seed, int frame_index,
                                    double amp, double cell) {
    double ox = 5.0 * frame_index, oy = 3.0 * frame_index;
    std::vector<uint8_t> px(size_t(width) * height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double v = 128.0 + amp * detail::value_noise(seed ^ 0xA0, x + ox, y + oy, cell);
            px[size_t(y) * width + x] = uint8_t(std::lround(std::clamp(v, 0.0, 255.0)));
        }
    return satrdo::Frame(width, height, std::move(px));
}

// Layered field with mid-scale structure and fine texture; stays mostly
// in range. General-purpose content for codec/denoise/rdo tests.
inline satrdo::Frame textured_frame(int width, int height, uint64_t seed, int frame_index = 0) {
    double ox = 5.0 * frame_index, oy = 3.0 * frame_index;
    std::vector<uint8_t> px(size_t(width) * height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            double sx = x + ox, sy = y + oy;
            double v = 128.0;
            v += 64.0 * detail::value_noise(seed ^ 0xA0, sx, sy, 96.0);
            v += 28.0 * detail::value_noise(seed ^ 0xA1, sx, sy, 24.0);
            v += 12.0 * detail::value_noise(seed ^ 0xA2, sx, sy, 7.0);
            v += 4.0 * detail::value_noise(seed ^ (uint64_t(frame_index) << 32), sx, sy, 2.5);
            px[size_t(y) * width + x] = uint8_t(std::lround(std::clamp(v, 0.0, 255.0)));
        }
    return satrdo::Frame(width, height, std::move(px));
}

inline satrdo::Patch textured_patch(int width, int height, uint64_t seed) {
    return satrdo::frame_as_patch(textured_frame(width, height, seed));
}

// IID uniform pixels; worst case for the entropy coder.
inline satrdo::Patch random_patch(int width, int height, uint64_t seed) {
    satrdo::Patch p;
    p.width = width;
    p.height = height;
    p.px.resize(size_t(width) * height);
    for (size_t i = 0; i < p.px.size(); ++i)
        p.px[i] = uint8_t((detail::lattice(seed, int(i >> 8), int(i & 255)) * 0.5 + 0.5) * 256.0);
    return p;
}

inline constexpr int kFrameWidth = 480;
inline constexpr int kFrameHeight = 360;
inline constexpr int kFrameCount = 10;
inline constexpr uint64_t kContentSeed = 20260818;
inline constexpr int kSeverityQv = 25;
inline constexpr uint64_t kSynthSeed = 7;

// End-to-end fixture: heavily saturated smooth field. With the deblock
// denoiser and the default 48x40 patch grid the run detects saturation
// with an interior lambda*_U.
inline constexpr double kE2eAmp = 760.0;
inline constexpr double kE2eCell = 80.0;

// Robustness fixture: milder saturation, analyzed with frame-sized
// patches so both deblock and gaussian land within a few QP of each other.
inline constexpr double kRobustAmp = 480.0;
inline constexpr double kRobustCell = 88.0;

inline satrdo::FrameSet make_pristine(double amp, double cell) {
    std::vector<satrdo::Frame> frames;
    frames.reserve(kFrameCount);
    for (int f = 0; f < kFrameCount; ++f)
        frames.push_back(exposure_frame(kFrameWidth, kFrameHeight, kContentSeed, f, amp, cell));
    return satrdo::make_frame_set(std::move(frames));
}

inline satrdo::FrameSet e2e_pristine() { return make_pristine(kE2eAmp, kE2eCell); }
inline satrdo::FrameSet robust_pristine() { return make_pristine(kRobustAmp, kRobustCell); }

inline satrdo::FrameSet degrade(const satrdo::FrameSet& pristine, int severity_qv = kSeverityQv,
                                double noise_sigma = 0.0, int jobs = 1) {
    satrdo::SynthSpec spec;
    spec.severity_qv = severity_qv;
    spec.seed = kSynthSeed;
    spec.noise_sigma = noise_sigma;
    return satrdo::synthesize_ugc(pristine, spec, jobs);
}

inline satrdo::FrameSet e2e_ugc(int jobs = 1) { return degrade(e2e_pristine(), kSeverityQv, 0.0, jobs); }
inline satrdo::FrameSet robust_ugc(int jobs = 1) {
    return degrade(robust_pristine(), kSeverityQv, 0.0, jobs);
}

inline satrdo::DetectConfig robust_config(int jobs = 1) {
    satrdo::DetectConfig cfg;
    cfg.patch_width = kFrameWidth;
    cfg.patch_height = kFrameHeight;
    cfg.jobs = jobs;
    return cfg;
}

// Hand-built RD curve for detector unit tests.
inline satrdo::RDCurve make_curve(satrdo::Reference reference, const std::vector<double>& lambdas,
                                  const std::vector<int64_t>& rates,
                                  const std::vector<int64_t>& sse_u,
                                  const std::vector<int64_t>& sse_z) {
    satrdo::RDCurve c;
    c.reference = reference;
    c.lambda_grid = lambdas;
    for (size_t i = 0; i < lambdas.size(); ++i) {
        satrdo::RDPoint p;
        p.lambda = lambdas[i];
        p.total_rate_bits = rates[i];
        p.sse_vs_u = sse_u[i];
        p.sse_vs_z = sse_z[i];
        c.points.push_back(p);
    }
    return c;
}

} // namespace fixtures
