#include "satrdo/rdo.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "satrdo/parallel.hpp"

namespace satrdo {

namespace {

void validate_qvs(const std::vector<int>& qvs) {
    if (qvs.empty()) throw std::invalid_argument("QV list is empty");
    for (size_t i = 0; i < qvs.size(); ++i) {
        if (qvs[i] < 1 || qvs[i] > 100)
            throw std::invalid_argument("QV " + std::to_string(qvs[i]) + " outside [1, 100]");
        if (i > 0 && qvs[i] <= qvs[i - 1])
            throw std::invalid_argument("QV list must be strictly ascending");
    }
}

void validate_lambda_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("lambda grid is empty");
    for (size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0) || !std::isfinite(grid[i]))
            throw std::invalid_argument("lambda grid values must be positive and finite");
        if (i > 0 && grid[i] <= grid[i - 1])
            throw std::invalid_argument("lambda grid must be strictly increasing");
    }
}

// Shortest decimal that round-trips to the same double.
std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

PatchRDTable build_rd_table(const FrameSet& u, const FrameSet& z, const PatchGrid& grid,
                            const std::vector<int>& qvs, int jobs) {
    validate_frame_set(u);
    validate_frame_set(z);
    if (u.count() != z.count() || u.width() != z.width() || u.height() != z.height())
        throw std::invalid_argument("U and Z must have identical shape");
    validate_qvs(qvs);

    PatchRDTable table;
    table.qvs = qvs;
    table.patch_count = grid.total_patches();
    table.entries.resize(size_t(table.patch_count) * qvs.size());

    parallel_for(table.patch_count, jobs, [&](int64_t begin, int64_t end) {
        for (int64_t k = begin; k < end; ++k) {
            Patch pu = extract_patch(u, grid, k);
            Patch pz = extract_patch(z, grid, k);
            for (size_t n = 0; n < qvs.size(); ++n) {
                EncodedPatch ep = encode_patch(pu, qvs[n]);
                PatchRDEntry& e = table.entries[size_t(k) * qvs.size() + n];
                e.rate_bits = ep.rate_bits;
                e.sse_u = sse(ep.recon, pu);
                e.sse_z = sse(ep.recon, pz);
            }
        }
    });
    return table;
}

RDPoint solve_rdo(const PatchRDTable& table, double lambda, Reference reference) {
    if (!(lambda > 0) || !std::isfinite(lambda))
        throw std::invalid_argument("lambda must be positive and finite");
    if (table.patch_count <= 0 || table.qvs.empty())
        throw std::invalid_argument("empty RD table");

    RDPoint pt;
    pt.lambda = lambda;
    pt.choices.resize(size_t(table.patch_count));
    int nq = table.qv_count();

    for (int64_t k = 0; k < table.patch_count; ++k) {
        int best = 0;
        const PatchRDEntry* be = &table.at(k, 0);
        double best_cost = lagrange_cost(
            reference == Reference::U ? be->sse_u : be->sse_z, be->rate_bits, lambda);
        for (int n = 1; n < nq; ++n) {
            const PatchRDEntry& e = table.at(k, n);
            int64_t d = reference == Reference::U ? e.sse_u : e.sse_z;
            double cost = lagrange_cost(d, e.rate_bits, lambda);
            // Ties: smaller rate, then larger QV index (ascending scan, so a
            // cost+rate tie replaces the earlier choice).
            if (cost < best_cost || (cost == best_cost && e.rate_bits <= be->rate_bits)) {
                best = n;
                be = &e;
                best_cost = cost;
            }
        }
        pt.choices[size_t(k)] = best;
        pt.total_rate_bits += be->rate_bits;
        pt.sse_vs_u += be->sse_u;
        pt.sse_vs_z += be->sse_z;
    }
    return pt;
}

RDCurve sweep(const PatchRDTable& table, const std::vector<double>& lambda_grid,
              Reference reference, int jobs) {
    validate_lambda_grid(lambda_grid);
    RDCurve curve;
    curve.reference = reference;
    curve.lambda_grid = lambda_grid;
    curve.points.resize(lambda_grid.size());
    parallel_for(int64_t(lambda_grid.size()), jobs, [&](int64_t begin, int64_t end) {
        for (int64_t i = begin; i < end; ++i)
            curve.points[size_t(i)] = solve_rdo(table, lambda_grid[size_t(i)], reference);
    });
    return curve;
}

void write_rd_curve_csv(const std::filesystem::path& path, const RDCurve& curve,
                        int64_t total_pixels) {
    if (total_pixels <= 0) throw std::invalid_argument("total_pixels must be positive");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "lambda,rate_bits,rate_bpp,mse_vs_U,mse_vs_Z\n";
    for (const RDPoint& p : curve.points) {
        out << format_double(p.lambda) << ',' << p.total_rate_bits << ','
            << format_double(double(p.total_rate_bits) / double(total_pixels)) << ','
            << format_double(double(p.sse_vs_u) / double(total_pixels)) << ','
            << format_double(double(p.sse_vs_z) / double(total_pixels)) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

RDCurve read_rd_curve_csv(const std::filesystem::path& path, Reference reference,
                          int64_t total_pixels) {
    if (total_pixels <= 0) throw std::invalid_argument("total_pixels must be positive");
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "lambda,rate_bits,rate_bpp,mse_vs_U,mse_vs_Z")
        throw std::runtime_error(path.string() + ": unexpected CSV header");

    RDCurve curve;
    curve.reference = reference;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        double vals[5];
        for (int i = 0; i < 5; ++i) {
            if (!std::getline(row, field, ','))
                throw std::runtime_error(path.string() + ": short CSV row");
            const char* b = field.data();
            auto res = std::from_chars(b, b + field.size(), vals[i]);
            if (res.ec != std::errc() || res.ptr != b + field.size())
                throw std::runtime_error(path.string() + ": bad CSV number '" + field + "'");
        }
        RDPoint p;
        p.lambda = vals[0];
        p.total_rate_bits = int64_t(std::llround(vals[1]));
        p.sse_vs_u = int64_t(std::llround(vals[3] * double(total_pixels)));
        p.sse_vs_z = int64_t(std::llround(vals[4] * double(total_pixels)));
        curve.lambda_grid.push_back(p.lambda);
        curve.points.push_back(std::move(p));
    }
    if (curve.points.empty()) throw std::runtime_error(path.string() + ": no data rows");
    return curve;
}

}  // namespace satrdo
