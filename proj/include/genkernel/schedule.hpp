#pragma once

#include <cmath>
#include <vector>

#include "genkernel/errors.hpp"
#include "genkernel/types.hpp"

namespace genkernel {

// finite decreasing sample of the regularization parameter
struct EpsilonSchedule {
    std::vector<Real> values;

    explicit EpsilonSchedule(std::vector<Real> v) : values(std::move(v)) {
        if (values.size() < 4) throw ArgumentError("schedule: need at least 4 values");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!(values[i] > 0.0) || values[i] > 1.0)
                throw ArgumentError("schedule: values must lie in (0,1]");
            if (i > 0 && !(values[i] < values[i - 1]))
                throw ArgumentError("schedule: values must be strictly decreasing");
        }
    }

    int size() const { return static_cast<int>(values.size()); }
    Real operator[](int i) const { return values[i]; }
    Real smallest() const { return values.back(); }
};

inline EpsilonSchedule make_schedule(int k_min, int k_max, Real base) {
    if (k_min < 0 || k_min >= k_max) throw ArgumentError("make_schedule: need 0 <= k_min < k_max");
    if (!(base > 1.0)) throw ArgumentError("make_schedule: base must exceed 1");
    std::vector<Real> v;
    for (int k = k_min; k <= k_max; ++k) v.push_back(std::pow(base, -k));
    return EpsilonSchedule(std::move(v));
}

inline EpsilonSchedule default_schedule() { return make_schedule(4, 14, 2.0); }

} // namespace genkernel
