#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "satrdo/codec.hpp"
#include "satrdo/frame_io.hpp"

namespace satrdo {

// Which frame set distortion is measured against.
enum class Reference { U, Z };

struct PatchRDEntry {
    int64_t rate_bits = 0;
    int64_t sse_u = 0;
    int64_t sse_z = 0;
};

// Exhaustive (patch, QV) measurements: exact coded bits plus SSE of the
// reconstruction against both the input and the denoised reference. Computed
// once per run; sweeps only read it.
struct PatchRDTable {
    std::vector<int> qvs;  // ascending
    int64_t patch_count = 0;
    std::vector<PatchRDEntry> entries;  // patch-major, patch_count * qvs.size()

    int qv_count() const { return int(qvs.size()); }
    const PatchRDEntry& at(int64_t patch, int qv_index) const {
        return entries[size_t(patch) * qvs.size() + size_t(qv_index)];
    }
};

// Encodes every patch of U at every QV and records rate and both SSEs.
// U and Z must have identical shape; qvs must be non-empty and ascending.
PatchRDTable build_rd_table(const FrameSet& u, const FrameSet& z, const PatchGrid& grid,
                            const std::vector<int>& qvs, int jobs = 1);

// One Lagrangian operating point: the per-patch choices minimizing
// d + lambda * r against the selected reference, and their totals.
struct RDPoint {
    double lambda = 0;
    int64_t total_rate_bits = 0;
    int64_t sse_vs_u = 0;
    int64_t sse_vs_z = 0;
    std::vector<int> choices;  // QV index per patch
};

// Shared by the solver and its brute-force test oracle so both sides round
// identically.
inline double lagrange_cost(int64_t distortion, int64_t rate_bits, double lambda) {
    return double(distortion) + lambda * double(rate_bits);
}

// Per-patch argmin of d + lambda*r; ties go to the smaller rate, then to the
// larger QV index. Separability makes the per-patch argmin globally optimal.
RDPoint solve_rdo(const PatchRDTable& table, double lambda, Reference reference);

struct RDCurve {
    Reference reference = Reference::U;
    std::vector<double> lambda_grid;  // strictly increasing
    std::vector<RDPoint> points;      // one per grid value
};

// Solves the RDO at every grid value. Rates are non-increasing and the
// optimized-reference SSE non-decreasing along the result.
RDCurve sweep(const PatchRDTable& table, const std::vector<double>& lambda_grid,
              Reference reference, int jobs = 1);

// Columns: lambda, rate_bits, rate_bpp, mse_vs_U, mse_vs_Z. Doubles are
// written as shortest round-trip decimals, so reading the file back
// reproduces the curve's lambdas, rates and SSEs exactly.
void write_rd_curve_csv(const std::filesystem::path& path, const RDCurve& curve,
                        int64_t total_pixels);
RDCurve read_rd_curve_csv(const std::filesystem::path& path, Reference reference,
                          int64_t total_pixels);

}  // namespace satrdo
