#include "satrdo/codec.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace satrdo {

namespace {

// Standard luminance quantization table, row-major.
const int kBaseLuma[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,
    12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,
    14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,
    24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103, 99};

// Zig-zag scan: kZigZag[i] = row-major index of the i-th scanned coefficient.
const int kZigZag[64] = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

// Standard luminance Huffman specs: codes-per-length (1..16) and symbol order.
const uint8_t kDcBits[17] = {0, 0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
const uint8_t kDcVals[12] = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};

const uint8_t kAcBits[17] = {0, 0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d};
const uint8_t kAcVals[162] = {
    0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06,
    0x13, 0x51, 0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08,
    0x23, 0x42, 0xb1, 0xc1, 0x15, 0x52, 0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72,
    0x82, 0x09, 0x0a, 0x16, 0x17, 0x18, 0x19, 0x1a, 0x25, 0x26, 0x27, 0x28,
    0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44, 0x45,
    0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
    0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75,
    0x76, 0x77, 0x78, 0x79, 0x7a, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
    0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3,
    0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6,
    0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9,
    0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1, 0xe2,
    0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf1, 0xf2, 0xf3, 0xf4,
    0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa};

struct HuffEncoder {
    uint16_t code[256];
    uint8_t len[256];
};

// Canonical code assignment, shortest codes first in symbol order.
HuffEncoder build_encoder(const uint8_t bits[17], const uint8_t* vals, int nvals) {
    HuffEncoder enc{};
    std::memset(enc.len, 0, sizeof enc.len);
    int code = 0;
    int k = 0;
    for (int l = 1; l <= 16; ++l) {
        for (int i = 0; i < bits[l] && k < nvals; ++i, ++k) {
            enc.code[vals[k]] = uint16_t(code);
            enc.len[vals[k]] = uint8_t(l);
            ++code;
        }
        code <<= 1;
    }
    return enc;
}

struct HuffDecoder {
    // mincode/maxcode per length; valptr indexes into vals. maxcode = -1
    // marks an unused length.
    int32_t mincode[17];
    int32_t maxcode[17];
    int32_t valptr[17];
    const uint8_t* vals;
};

HuffDecoder build_decoder(const uint8_t bits[17], const uint8_t* vals) {
    HuffDecoder dec{};
    dec.vals = vals;
    int code = 0;
    int k = 0;
    for (int l = 1; l <= 16; ++l) {
        if (bits[l] == 0) {
            dec.mincode[l] = 0;
            dec.maxcode[l] = -1;
            dec.valptr[l] = 0;
        } else {
            dec.valptr[l] = k;
            dec.mincode[l] = code;
            code += bits[l];
            k += bits[l];
            dec.maxcode[l] = code - 1;
        }
        code <<= 1;
    }
    return dec;
}

const HuffEncoder& dc_encoder() {
    static const HuffEncoder e = build_encoder(kDcBits, kDcVals, 12);
    return e;
}
const HuffEncoder& ac_encoder() {
    static const HuffEncoder e = build_encoder(kAcBits, kAcVals, 162);
    return e;
}
const HuffDecoder& dc_decoder() {
    static const HuffDecoder d = build_decoder(kDcBits, kDcVals);
    return d;
}
const HuffDecoder& ac_decoder() {
    static const HuffDecoder d = build_decoder(kAcBits, kAcVals);
    return d;
}

// MSB-first bit writer; pads the final byte with zeros.
class BitWriter {
public:
    void put(uint32_t value, int nbits) {
        for (int i = nbits - 1; i >= 0; --i) put_bit((value >> i) & 1u);
    }
    void put_code(const HuffEncoder& enc, int symbol) {
        put(enc.code[symbol], enc.len[symbol]);
    }
    int64_t bit_count() const { return bits_; }
    std::vector<uint8_t> take() {
        if (fill_ > 0) {
            bytes_.push_back(uint8_t(acc_ << (8 - fill_)));
            fill_ = 0;
            acc_ = 0;
        }
        return std::move(bytes_);
    }

private:
    void put_bit(uint32_t b) {
        acc_ = (acc_ << 1) | b;
        if (++fill_ == 8) {
            bytes_.push_back(uint8_t(acc_));
            acc_ = 0;
            fill_ = 0;
        }
        ++bits_;
    }
    std::vector<uint8_t> bytes_;
    uint32_t acc_ = 0;
    int fill_ = 0;
    int64_t bits_ = 0;
};

class BitReader {
public:
    explicit BitReader(const std::vector<uint8_t>& bytes) : bytes_(bytes) {}

    int bit() {
        if (pos_ >= int64_t(bytes_.size()) * 8)
            throw std::runtime_error("bitstream truncated");
        int byte = bytes_[size_t(pos_ >> 3)];
        int b = (byte >> (7 - (pos_ & 7))) & 1;
        ++pos_;
        return b;
    }
    int bits(int n) {
        int v = 0;
        for (int i = 0; i < n; ++i) v = (v << 1) | bit();
        return v;
    }
    int decode(const HuffDecoder& dec) {
        int code = bit();
        for (int l = 1; l <= 16; ++l) {
            if (dec.maxcode[l] >= 0 && code <= dec.maxcode[l])
                return dec.vals[dec.valptr[l] + (code - dec.mincode[l])];
            code = (code << 1) | bit();
        }
        throw std::runtime_error("bitstream malformed: no Huffman code matched");
    }
    int64_t consumed() const { return pos_; }

private:
    const std::vector<uint8_t>& bytes_;
    int64_t pos_ = 0;
};

// Magnitude category: 0 for 0, else bit length of |v|.
int bit_category(int v) {
    int a = v < 0 ? -v : v;
    int n = 0;
    while (a) {
        ++n;
        a >>= 1;
    }
    return n;
}

// JPEG-style sign handling: negatives are sent as v + 2^size - 1.
int magnitude_bits(int v, int size) {
    return v < 0 ? v + (1 << size) - 1 : v;
}

int extend(int v, int size) {
    return (size > 0 && v < (1 << (size - 1))) ? v - (1 << size) + 1 : v;
}

// Basis c[u][x] = C(u) * cos((2x+1) u pi / 16) with C(0)=sqrt(1/8), C=1/2 else.
struct DctBasis {
    double c[8][8];
    DctBasis() {
        const double pi = 3.14159265358979323846;
        for (int u = 0; u < 8; ++u) {
            double cu = u == 0 ? std::sqrt(1.0 / 8.0) : 0.5;
            for (int x = 0; x < 8; ++x)
                c[u][x] = cu * std::cos((2 * x + 1) * u * pi / 16.0);
        }
    }
};
const DctBasis& basis() {
    static const DctBasis b;
    return b;
}

void validate_patch_dims(const Patch& p) {
    if (p.width <= 0 || p.height <= 0 || p.width % 8 != 0 || p.height % 8 != 0)
        throw std::invalid_argument("patch dimensions must be positive multiples of 8");
    if (p.px.size() != size_t(p.width) * p.height)
        throw std::invalid_argument("patch sample count does not match dimensions");
}

}  // namespace

QuantTable quality_to_qtable(int qv) {
    if (qv < 1 || qv > 100)
        throw std::invalid_argument("quality value " + std::to_string(qv) + " outside [1, 100]");
    int scale = qv < 50 ? 5000 / qv : 200 - 2 * qv;
    QuantTable t;
    for (int i = 0; i < 64; ++i) {
        int q = (kBaseLuma[i] * scale + 50) / 100;
        t.q[i] = q < 1 ? 1 : (q > 255 ? 255 : q);
    }
    return t;
}

void dct8x8_forward(const double in[64], double out[64]) {
    const auto& b = basis();
    double tmp[64];
    // rows: tmp[y][u] = sum_x in[y][x] c[u][x]
    for (int y = 0; y < 8; ++y) {
        for (int u = 0; u < 8; ++u) {
            double s = 0;
            for (int x = 0; x < 8; ++x) s += in[y * 8 + x] * b.c[u][x];
            tmp[y * 8 + u] = s;
        }
    }
    // columns: out[v][u] = sum_y tmp[y][u] c[v][y]
    for (int v = 0; v < 8; ++v) {
        for (int u = 0; u < 8; ++u) {
            double s = 0;
            for (int y = 0; y < 8; ++y) s += tmp[y * 8 + u] * b.c[v][y];
            out[v * 8 + u] = s;
        }
    }
}

void dct8x8_inverse(const double in[64], double out[64]) {
    const auto& b = basis();
    double tmp[64];
    // columns: tmp[y][u] = sum_v in[v][u] c[v][y]
    for (int y = 0; y < 8; ++y) {
        for (int u = 0; u < 8; ++u) {
            double s = 0;
            for (int v = 0; v < 8; ++v) s += in[v * 8 + u] * b.c[v][y];
            tmp[y * 8 + u] = s;
        }
    }
    // rows: out[y][x] = sum_u tmp[y][u] c[u][x]
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            double s = 0;
            for (int u = 0; u < 8; ++u) s += tmp[y * 8 + u] * b.c[u][x];
            out[y * 8 + x] = s;
        }
    }
}

EncodedPatch encode_patch(const Patch& patch, int qv) {
    validate_patch_dims(patch);
    QuantTable qt = quality_to_qtable(qv);

    EncodedPatch out;
    out.qv = qv;
    out.recon.width = patch.width;
    out.recon.height = patch.height;
    out.recon.px.resize(patch.px.size());

    BitWriter bw;
    const HuffEncoder& dc = dc_encoder();
    const HuffEncoder& ac = ac_encoder();

    int bw_blocks = patch.width / 8;
    int bh_blocks = patch.height / 8;
    int pred_dc = 0;
    double block[64], coef[64], deq[64], rec[64];

    for (int by = 0; by < bh_blocks; ++by) {
        for (int bx = 0; bx < bw_blocks; ++bx) {
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    block[y * 8 + x] =
                        double(patch.px[size_t(by * 8 + y) * patch.width + bx * 8 + x]) - 128.0;

            dct8x8_forward(block, coef);

            int q[64];
            for (int i = 0; i < 64; ++i)
                q[i] = int(std::lround(coef[i] / qt.q[i]));

            // DC: category of the prediction difference, then the difference bits.
            int diff = q[0] - pred_dc;
            pred_dc = q[0];
            int size = bit_category(diff);
            bw.put_code(dc, size);
            if (size > 0) bw.put(uint32_t(magnitude_bits(diff, size)), size);

            // AC in zig-zag order with (run, size) symbols, ZRL and EOB.
            int run = 0;
            for (int i = 1; i < 64; ++i) {
                int v = q[kZigZag[i]];
                if (v == 0) {
                    ++run;
                    continue;
                }
                while (run > 15) {
                    bw.put_code(ac, 0xf0);
                    run -= 16;
                }
                int s = bit_category(v);
                bw.put_code(ac, (run << 4) | s);
                bw.put(uint32_t(magnitude_bits(v, s)), s);
                run = 0;
            }
            if (run > 0) bw.put_code(ac, 0x00);

            for (int i = 0; i < 64; ++i) deq[i] = double(q[i]) * qt.q[i];
            dct8x8_inverse(deq, rec);
            for (int y = 0; y < 8; ++y) {
                for (int x = 0; x < 8; ++x) {
                    long p = std::lround(rec[y * 8 + x] + 128.0);
                    p = p < 0 ? 0 : (p > 255 ? 255 : p);
                    out.recon.px[size_t(by * 8 + y) * patch.width + bx * 8 + x] = uint8_t(p);
                }
            }
        }
    }

    out.rate_bits = bw.bit_count();
    out.bitstream = bw.take();
    return out;
}

Patch decode_patch(const std::vector<uint8_t>& bitstream, int qv, int width, int height,
                   int64_t* consumed_bits) {
    if (width <= 0 || height <= 0 || width % 8 != 0 || height % 8 != 0)
        throw std::invalid_argument("patch dimensions must be positive multiples of 8");
    QuantTable qt = quality_to_qtable(qv);

    Patch out;
    out.width = width;
    out.height = height;
    out.px.resize(size_t(width) * height);

    BitReader br(bitstream);
    const HuffDecoder& dc = dc_decoder();
    const HuffDecoder& ac = ac_decoder();

    int bw_blocks = width / 8;
    int bh_blocks = height / 8;
    int pred_dc = 0;
    double deq[64], rec[64];

    for (int by = 0; by < bh_blocks; ++by) {
        for (int bx = 0; bx < bw_blocks; ++bx) {
            int q[64] = {0};

            int size = br.decode(dc);
            int diff = size > 0 ? extend(br.bits(size), size) : 0;
            pred_dc += diff;
            q[0] = pred_dc;

            for (int i = 1; i < 64;) {
                int sym = br.decode(ac);
                if (sym == 0x00) break;  // EOB
                if (sym == 0xf0) {       // ZRL
                    i += 16;
                    if (i > 64) throw std::runtime_error("bitstream malformed: ZRL overrun");
                    continue;
                }
                int run = sym >> 4;
                int s = sym & 0x0f;
                if (s == 0) throw std::runtime_error("bitstream malformed: zero-size AC symbol");
                i += run;
                if (i >= 64) throw std::runtime_error("bitstream malformed: AC index overrun");
                q[kZigZag[i]] = extend(br.bits(s), s);
                ++i;
            }

            for (int i = 0; i < 64; ++i) deq[i] = double(q[i]) * qt.q[i];
            dct8x8_inverse(deq, rec);
            for (int y = 0; y < 8; ++y) {
                for (int x = 0; x < 8; ++x) {
                    long p = std::lround(rec[y * 8 + x] + 128.0);
                    p = p < 0 ? 0 : (p > 255 ? 255 : p);
                    out.px[size_t(by * 8 + y) * width + bx * 8 + x] = uint8_t(p);
                }
            }
        }
    }

    if (consumed_bits) *consumed_bits = br.consumed();
    return out;
}

std::vector<int> default_qv_grid() {
    std::vector<int> qvs;
    for (int qv = 19; qv <= 95; qv += 4) qvs.push_back(qv);
    return qvs;
}

}  // namespace satrdo
