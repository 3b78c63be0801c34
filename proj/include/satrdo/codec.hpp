#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "satrdo/frame_io.hpp"

namespace satrdo {

// Quantization table in row-major order, entries in [1, 255].
struct QuantTable {
    std::array<int, 64> q{};
};

// Scales the standard luminance table by the libjpeg quality rule:
//   scale = 5000/qv (integer) for qv < 50, else 200 - 2*qv
//   entry = clamp((base*scale + 50) / 100, 1, 255)
// qv must be in [1, 100].
QuantTable quality_to_qtable(int qv);

// Orthonormal 2-D type-II DCT on an 8x8 block (row-major). A constant block
// of value c transforms to DC = 8c with all AC zero; inverse(forward) is the
// identity to ~1e-13 and Parseval holds to ~1e-15 relative.
void dct8x8_forward(const double in[64], double out[64]);
void dct8x8_inverse(const double in[64], double out[64]);

// One patch coded at a fixed quality value. rate_bits is the exact Huffman
// payload length; the bitstream is that payload zero-padded to a whole byte.
struct EncodedPatch {
    int qv = 0;
    int64_t rate_bits = 0;
    Patch recon;
    std::vector<uint8_t> bitstream;
};

// Codes a patch as independent 8x8 blocks in raster order: level shift by
// -128, forward DCT, quantization with round-half-away-from-zero, then
// baseline-style Huffman coding with the standard luminance tables. DC
// prediction is scoped to the patch, first DC predicted from 0, so patches
// are independently decodable. Patch dims must be multiples of 8.
EncodedPatch encode_patch(const Patch& patch, int qv);

// Decodes a bitstream produced by encode_patch with the same qv and dims;
// reproduces EncodedPatch::recon bit-exactly. Throws std::runtime_error on a
// truncated or malformed stream. If consumed_bits is non-null it receives an
// independent count of payload bits actually read.
Patch decode_patch(const std::vector<uint8_t>& bitstream, int qv, int width, int height,
                   int64_t* consumed_bits = nullptr);

// The QV sweep used for RD tables: 19, 23, ..., 95 (20 values).
std::vector<int> default_qv_grid();

}  // namespace satrdo
