#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "satrdo/frame_io.hpp"

namespace satrdo {

enum class DenoiserKind { Deblock, Gaussian, External };

// How to produce the denoised reference Z from the input U. strength is the
// boundary threshold for deblock and sigma for gaussian; external reads
// already-denoised frames from disk.
struct DenoiserSpec {
    DenoiserKind kind = DenoiserKind::Deblock;
    double strength = 0.0;
    std::vector<std::filesystem::path> external_paths;
};

// Parses "deblock:20", "gaussian:1.5" or "external:<dir>"; for external the
// directory is expanded to its sorted regular files.
DenoiserSpec parse_denoiser_spec(const std::string& text);

// Canonical one-token form of the spec ("deblock:20"), used in reports.
std::string to_string(const DenoiserSpec& spec);

// Produces Z with the same dimensions and count as `frames`. Deterministic
// for a fixed spec.
//
// deblock: one smoothing pass per orientation (across vertical block
//   boundaries first, then horizontal). For the pixel pair (a, b) straddling
//   an 8-aligned boundary, if |a - b| < strength both are replaced with
//   ((3a+b)/4, (a+3b)/4), rounded half-up.
// gaussian: separable blur with kernel radius ceil(3*sigma) and symmetric
//   edge reflection, rounded half-up to 8 bits. sigma = 0 is the identity.
// external: loads the files verbatim. The list must either match the frame
//   count one-to-one or cover the original sequence, in which case entries
//   are picked at source_indices.
FrameSet denoise(const FrameSet& frames, const DenoiserSpec& spec, int jobs = 1);

}  // namespace satrdo
