#include "satrdo/saturation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace satrdo {
namespace {

void require_points(const RDCurve& curve) {
    if (curve.points.empty()) throw std::invalid_argument("empty RD curve");
}

}  // namespace

double qp_to_lambda(int qp) {
    if (qp < 0 || qp > 51) throw std::invalid_argument("qp must be in [0, 51]");
    return 0.852 * std::exp2((qp - 12) / 3.0);
}

int lambda_to_qp(double lambda) {
    if (!(lambda > 0) || !std::isfinite(lambda))
        throw std::invalid_argument("lambda must be positive and finite");
    double qp = 12.0 + 3.0 * std::log2(lambda / 0.852);
    return int(std::clamp(std::lround(qp), 0L, 51L));
}

std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    grid.reserve(52);
    for (int qp = 0; qp <= 51; ++qp) grid.push_back(qp_to_lambda(qp));
    return grid;
}

SaturationBounds make_bounds(double d_uz, double d_best) {
    if (!(d_uz >= 0) || !std::isfinite(d_uz)) throw std::invalid_argument("d_uz must be >= 0");
    if (!(d_best >= 0) || !std::isfinite(d_best))
        throw std::invalid_argument("d_best must be >= 0");
    return {d_uz, d_best, d_uz + d_best, d_uz - d_best};
}

std::string to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::Detected: return "detected";
        case Verdict::NoSaturationInRange: return "no-saturation-in-range";
        case Verdict::DegenerateReference: return "degenerate-reference";
    }
    throw std::logic_error("unknown verdict");
}

bool geometric_bound(double x_minus_z_sq, double u_minus_z_sq, double x_minus_u_sq) {
    for (double v : {x_minus_z_sq, u_minus_z_sq, x_minus_u_sq})
        if (!(v >= 0) || !std::isfinite(v))
            throw std::invalid_argument("squared distances must be >= 0");
    return std::abs(x_minus_z_sq - u_minus_z_sq) <=
           x_minus_u_sq + 2.0 * std::sqrt(x_minus_u_sq) * std::sqrt(u_minus_z_sq);
}

double transition_estimate(const RDCurve& curve_u, double d_uz) {
    require_points(curve_u);
    double target = 4.0 * d_uz;
    size_t best = 0;
    double best_gap = std::abs(double(curve_u.points[0].sse_vs_u) - target);
    for (size_t i = 1; i < curve_u.points.size(); ++i) {
        double gap = std::abs(double(curve_u.points[i].sse_vs_u) - target);
        if (gap < best_gap) {
            best = i;
            best_gap = gap;
        }
    }
    return curve_u.points[best].lambda;
}

std::optional<size_t> detect_lambda_z_index(const RDCurve& curve_z,
                                            const SaturationBounds& bounds) {
    require_points(curve_z);
    std::optional<size_t> last;
    for (size_t i = 0; i < curve_z.points.size(); ++i) {
        if (std::abs(double(curve_z.points[i].sse_vs_z) - bounds.d_uz) > bounds.d_best) break;
        last = i;
    }
    return last;
}

std::optional<double> detect_lambda_z(const RDCurve& curve_z, const SaturationBounds& bounds) {
    auto i = detect_lambda_z_index(curve_z, bounds);
    if (!i) return std::nullopt;
    return curve_z.points[*i].lambda;
}

std::optional<size_t> detect_lambda_u_index(const RDCurve& curve_u,
                                            int64_t saturation_rate_bits) {
    require_points(curve_u);
    std::optional<size_t> first;
    for (size_t i = curve_u.points.size(); i-- > 0;) {
        if (curve_u.points[i].total_rate_bits > saturation_rate_bits) break;
        first = i;
    }
    return first;
}

std::optional<double> detect_lambda_u(const RDCurve& curve_u, int64_t saturation_rate_bits) {
    auto i = detect_lambda_u_index(curve_u, saturation_rate_bits);
    if (!i) return std::nullopt;
    return curve_u.points[*i].lambda;
}

std::optional<int> detect_qv_star(std::span<const QvRDPoint> points, double d_uz) {
    if (points.size() < 2) throw std::invalid_argument("need at least 2 per-QV points");
    for (size_t i = 1; i < points.size(); ++i)
        if (points[i].qv <= points[i - 1].qv)
            throw std::invalid_argument("per-QV points must be strictly ascending in QV");
    double bound = double(points.back().sse_vs_u);
    std::optional<int> qv_star;
    for (size_t i = points.size(); i-- > 0;) {
        if (std::abs(double(points[i].sse_vs_z) - d_uz) > bound) break;
        qv_star = points[i].qv;
    }
    return qv_star;
}

DetectionRun run_detection(const FrameSet& u, const DenoiserSpec& denoiser,
                           const DetectConfig& config) {
    validate_frame_set(u);
    if (config.sample_count < 1 || config.sample_count > u.count())
        throw std::invalid_argument("sample_count must be in [1, frame count]");

    FrameSet sampled = sample_frames(u, config.sample_count);
    FrameSet z = denoise(sampled, denoiser, config.jobs);
    PatchGrid grid = make_patch_grid(sampled, config.patch_width, config.patch_height);
    PatchRDTable table = build_rd_table(sampled, z, grid, config.qv_grid, config.jobs);

    DetectionRun run;
    run.curve_u = sweep(table, config.lambda_grid, Reference::U, config.jobs);
    run.curve_z = sweep(table, config.lambda_grid, Reference::Z, config.jobs);
    run.total_pixels = sampled.pixel_count();

    int64_t d_uz = sse(sampled, z);
    int64_t d_best = config.bound_source == BoundSource::USweep
                         ? run.curve_u.points.front().sse_vs_u
                         : run.curve_z.points.front().sse_vs_u;

    SaturationResult& res = run.result;
    res.bounds = make_bounds(double(d_uz), double(d_best));
    run.transition_lambda = transition_estimate(run.curve_u, double(d_uz));

    if (auto iz = detect_lambda_z_index(run.curve_z, res.bounds)) {
        res.lambda_star_z = run.curve_z.points[*iz].lambda;
        res.saturation_rate_bits = run.curve_z.points[*iz].total_rate_bits;
        auto iu = detect_lambda_u_index(run.curve_u, *res.saturation_rate_bits);
        // The saturation rate comes from a sweep of the same table, so some
        // suffix of the input-reference sweep must fit under it.
        if (!iu) throw std::logic_error("no input-sweep rate at or below the saturation rate");
        res.lambda_star_u = run.curve_u.points[*iu].lambda;
        res.qp_star = lambda_to_qp(*res.lambda_star_u);
    }

    if (d_uz == 0)
        res.verdict = Verdict::DegenerateReference;
    else
        res.verdict = res.lambda_star_z ? Verdict::Detected : Verdict::NoSaturationInRange;
    return run;
}

std::string saturation_result_to_json(const SaturationResult& result,
                                      const std::vector<double>& lambda_grid,
                                      const std::string& denoiser, int64_t total_pixels) {
    if (total_pixels <= 0) throw std::invalid_argument("total_pixels must be positive");
    double px = double(total_pixels);
    nlohmann::json j;
    j["verdict"] = to_string(result.verdict);
    j["lambda_star_z"] =
        result.lambda_star_z ? nlohmann::json(*result.lambda_star_z) : nlohmann::json(nullptr);
    j["lambda_star_u"] =
        result.lambda_star_u ? nlohmann::json(*result.lambda_star_u) : nlohmann::json(nullptr);
    j["qp_star"] = result.qp_star ? nlohmann::json(*result.qp_star) : nlohmann::json(nullptr);
    j["saturation_rate_bpp"] =
        result.saturation_rate_bits
            ? nlohmann::json(double(*result.saturation_rate_bits) / px)
            : nlohmann::json(nullptr);
    j["d_uz_mse"] = result.bounds.d_uz / px;
    j["d_best_mse"] = result.bounds.d_best / px;
    j["delta_sq"] = result.bounds.delta_sq / px;
    j["small_delta_sq"] = result.bounds.small_delta_sq / px;
    j["grid"] = lambda_grid;
    j["denoiser"] = denoiser;
    return j.dump(2) + "\n";
}

}  // namespace satrdo
