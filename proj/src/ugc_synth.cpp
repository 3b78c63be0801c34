#include "satrdo/ugc_synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "satrdo/codec.hpp"
#include "satrdo/parallel.hpp"

namespace satrdo {
namespace {

Frame degrade_frame(const Frame& frame, const SynthSpec& spec, int frame_index) {
    std::vector<uint8_t> px = frame.samples();
    if (spec.noise_sigma > 0) {
        std::seed_seq seq{uint32_t(spec.seed), uint32_t(spec.seed >> 32), uint32_t(frame_index)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> noise(0.0, spec.noise_sigma);
        for (auto& v : px) {
            double noisy = double(v) + noise(rng);
            v = uint8_t(std::clamp<long>(std::lround(noisy), 0, 255));
        }
    }
    Patch coded = frame_as_patch(Frame(frame.width(), frame.height(), std::move(px)));
    return patch_to_frame(encode_patch(coded, spec.severity_qv).recon);
}

}  // namespace

FrameSet synthesize_ugc(const FrameSet& pristine, const SynthSpec& spec, int jobs) {
    validate_frame_set(pristine);
    if (spec.severity_qv < 1 || spec.severity_qv > 100)
        throw std::invalid_argument("severity_qv must be in [1, 100]");
    if (!(spec.noise_sigma >= 0) || !std::isfinite(spec.noise_sigma))
        throw std::invalid_argument("noise_sigma must be >= 0");

    FrameSet out;
    out.frames.resize(pristine.frames.size());
    out.source_indices = pristine.source_indices;
    parallel_for(pristine.count(), jobs, [&](int64_t begin, int64_t end) {
        for (int64_t i = begin; i < end; ++i)
            out.frames[size_t(i)] = degrade_frame(pristine.frames[size_t(i)], spec, int(i));
    });
    return out;
}

}  // namespace satrdo
