#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cmmd/errors.hpp"
#include "cmmd/linalg.hpp"

namespace cmmd {

/// Experimental-design data: N design points, each carrying its replicated
/// simulator outputs.
struct Dataset {
    std::vector<Vector> design_points;          // N inputs
    std::vector<std::vector<Vector>> replications;  // outputs per design point
    std::string simulator;                      // provenance
    std::uint64_t seed = 0;

    std::size_t input_dim() const {
        return design_points.empty() ? 0 : design_points.front().size();
    }
    std::size_t output_dim() const {
        for (const auto& reps : replications)
            if (!reps.empty()) return reps.front().size();
        return 0;
    }
    std::size_t total_rows() const {
        std::size_t n = 0;
        for (const auto& reps : replications) n += reps.size();
        return n;
    }

    /// Flattens to one (x, y) pair per replication, in design order.
    void flatten(std::vector<Vector>& xs, std::vector<Vector>& ys) const {
        xs.clear();
        ys.clear();
        for (std::size_t i = 0; i < design_points.size(); ++i)
            for (const auto& y : replications[i]) {
                xs.push_back(design_points[i]);
                ys.push_back(y);
            }
    }
};

/// Per-coordinate affine map v -> (v - shift) / scale.
struct AffineTransform {
    Vector shift;
    Vector scale;

    std::size_t dim() const { return shift.size(); }

    Vector apply(const Vector& v) const {
        if (v.size() != shift.size()) throw DimensionMismatch("transform: dimension mismatch");
        Vector out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - shift[i]) / scale[i];
        return out;
    }

    Vector invert(const Vector& v) const {
        if (v.size() != shift.size()) throw DimensionMismatch("transform: dimension mismatch");
        Vector out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * scale[i] + shift[i];
        return out;
    }

    static AffineTransform identity(std::size_t dim) {
        return AffineTransform{Vector(dim, 0.0), Vector(dim, 1.0)};
    }
};

struct StandardizeResult {
    AffineTransform transform;
    std::vector<std::size_t> degenerate_columns;  // zero-variance, scale forced to 1
};

/// Zero-mean unit-variance standardizer over the given rows. A zero-variance
/// coordinate keeps scale 1 and is reported rather than rejected.
inline StandardizeResult fit_standardizer(const std::vector<Vector>& rows) {
    if (rows.empty()) throw EmptySample("standardize: no rows");
    const std::size_t dim = rows.front().size();
    StandardizeResult res;
    res.transform.shift.assign(dim, 0.0);
    res.transform.scale.assign(dim, 1.0);
    const double n = static_cast<double>(rows.size());
    for (std::size_t c = 0; c < dim; ++c) {
        double mean = 0.0;
        for (const auto& r : rows) mean += r[c];
        mean /= n;
        double var = 0.0;
        for (const auto& r : rows) var += (r[c] - mean) * (r[c] - mean);
        var /= n;
        res.transform.shift[c] = mean;
        if (var > 0.0 && std::isfinite(var)) {
            res.transform.scale[c] = std::sqrt(var);
        } else {
            res.degenerate_columns.push_back(c);
        }
    }
    return res;
}

}  // namespace cmmd
