#pragma once

#include <cstdint>
#include <vector>

#include "satrdo/frame_io.hpp"

namespace satrdo {

// Parameters for degrading pristine frames into UGC-like input: optional
// additive Gaussian noise (camera noise) followed by a full-frame
// encode/decode at severity_qv (previous compression). Lower severity_qv
// means heavier artifacts.
struct SynthSpec {
    int severity_qv = 25;
    uint64_t seed = 0;
    double noise_sigma = 0;
};

// Deterministic for a fixed (spec, input) and independent of jobs: the noise
// stream is derived per frame from (seed, frame index). Noise is added in the
// real domain, rounded and clamped to 8 bits, then the frame is coded as one
// patch. Source indices carry over from the input.
FrameSet synthesize_ugc(const FrameSet& pristine, const SynthSpec& spec, int jobs = 1);

}  // namespace satrdo
