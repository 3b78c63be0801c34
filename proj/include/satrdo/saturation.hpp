#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "satrdo/denoise.hpp"
#include "satrdo/frame_io.hpp"
#include "satrdo/rdo.hpp"

namespace satrdo {

// lambda(QP) = 0.852 * 2^((QP - 12) / 3), QP in [0, 51].
double qp_to_lambda(int qp);
// Nearest QP for the given lambda, clamped to [0, 51]. Inverts qp_to_lambda
// exactly on the integer range.
int lambda_to_qp(double lambda);
// qp_to_lambda over QP 0..51: 52 strictly increasing values.
std::vector<double> default_lambda_grid();

// Squared distances anchoring the saturation band around the denoised
// reference:
//   d_uz           = ||U - Z||^2
//   d_best         = ||U_hat(lambda_min) - U||^2
//   delta_sq       = d_uz + d_best (outer radius squared)
//   small_delta_sq = d_uz - d_best (inner radius squared; negative means the
//                    inner circle is empty)
// Detection uses the two-sided deviation test, which subsumes both circles.
struct SaturationBounds {
    double d_uz = 0;
    double d_best = 0;
    double delta_sq = 0;
    double small_delta_sq = 0;
};

// d_uz and d_best must be finite and >= 0.
SaturationBounds make_bounds(double d_uz, double d_best);

enum class Verdict { Detected, NoSaturationInRange, DegenerateReference };

// "detected", "no-saturation-in-range", "degenerate-reference".
std::string to_string(Verdict verdict);

struct SaturationResult {
    Verdict verdict = Verdict::NoSaturationInRange;
    std::optional<double> lambda_star_z;          // grid member when present
    std::optional<int64_t> saturation_rate_bits;  // present iff lambda_star_z
    std::optional<double> lambda_star_u;          // grid member when present
    std::optional<int> qp_star;                   // present iff lambda_star_u
    SaturationBounds bounds;
};

// True iff |x_minus_z_sq - u_minus_z_sq| <= x_minus_u_sq
//          + 2*sqrt(x_minus_u_sq)*sqrt(u_minus_z_sq).
// Holds for any vector triple by the triangle inequality, so it serves as a
// consistency check over measured sweep data. Inputs are squared distances;
// negative or non-finite values throw.
bool geometric_bound(double x_minus_z_sq, double u_minus_z_sq, double x_minus_u_sq);

// Grid lambda whose input-reference SSE is closest to 4 * d_uz, i.e. where
// ||U_hat - U|| crosses 2 * ||U - Z||: the approximate boundary between the
// quadratic-decay and linear-decay rate regimes. Ties go to the smaller
// lambda. Diagnostic only.
double transition_estimate(const RDCurve& curve_u, double d_uz);

// Largest grid lambda such that every grid point from lambda_min up to it
// satisfies |sse_vs_z - d_uz| <= d_best; none if the first point already
// violates the band.
std::optional<size_t> detect_lambda_z_index(const RDCurve& curve_z,
                                            const SaturationBounds& bounds);
std::optional<double> detect_lambda_z(const RDCurve& curve_z, const SaturationBounds& bounds);

// Smallest grid lambda whose entire suffix keeps rate <= saturation_rate_bits;
// none if even the last point exceeds the threshold.
std::optional<size_t> detect_lambda_u_index(const RDCurve& curve_u,
                                            int64_t saturation_rate_bits);
std::optional<double> detect_lambda_u(const RDCurve& curve_u, int64_t saturation_rate_bits);

// Whole-image RD measurement at one quality value.
struct QvRDPoint {
    int qv = 0;
    int64_t rate_bits = 0;
    int64_t sse_vs_z = 0;
    int64_t sse_vs_u = 0;
};

// Per-QV variant of the detector: smallest QV whose entire suffix satisfies
// |sse_vs_z - d_uz| <= sse_vs_u at the largest QV. Points must be strictly
// ascending in QV and there must be at least two; none if nothing qualifies.
std::optional<int> detect_qv_star(std::span<const QvRDPoint> points, double d_uz);

// Where d_best comes from: the input-reference sweep (default; its lambda_min
// distortion lower-bounds the reference-side value, giving the stricter band)
// or the reference-side sweep.
enum class BoundSource { USweep, ZSweep };

struct DetectConfig {
    int sample_count = 5;
    int patch_width = 48;
    int patch_height = 40;
    std::vector<int> qv_grid = default_qv_grid();
    std::vector<double> lambda_grid = default_lambda_grid();
    BoundSource bound_source = BoundSource::USweep;
    int jobs = 1;
};

struct DetectionRun {
    SaturationResult result;
    RDCurve curve_u;
    RDCurve curve_z;
    int64_t total_pixels = 0;
    double transition_lambda = 0;  // diagnostic, see transition_estimate
};

// Full pipeline: sample frames, denoise, partition into patches, measure the
// per-patch RD table once, sweep it against both references, then extract the
// saturation point. Degenerate outcomes land in the verdict, not in throws.
DetectionRun run_detection(const FrameSet& u, const DenoiserSpec& denoiser,
                           const DetectConfig& config);

// JSON report. Distortions are reported per pixel (MSE) and the saturation
// rate in bits per pixel, so numbers are comparable across resolutions.
// Absent optionals serialize as null.
std::string saturation_result_to_json(const SaturationResult& result,
                                      const std::vector<double>& lambda_grid,
                                      const std::string& denoiser, int64_t total_pixels);

}  // namespace satrdo
