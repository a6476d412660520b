#ifndef LBL_BARRIERS_HPP
#define LBL_BARRIERS_HPP

#include <string>

#include "error.hpp"

namespace lbl {

/// Periodic barrier pair: pay down to b1 when the surplus exceeds b2 at an observation time.
struct Barriers {
    double b1 = 0.0;
    double b2 = 0.0;
};

inline void require_ordered(const Barriers& b)
{
    if (!(b.b1 >= 0.0) || !(b.b2 > b.b1)) throw validation_error("barriers must satisfy 0 <= b1 < b2");
}

enum class BarrierCase { InteriorFirstOrder, BoundaryZero };

inline const char* to_string(BarrierCase c)
{
    return c == BarrierCase::InteriorFirstOrder ? "InteriorFirstOrder" : "BoundaryZero";
}

struct BarrierCandidate {
    double b1_star = 0.0;
    double b2_star = 0.0;
    BarrierCase kind = BarrierCase::BoundaryZero;
    double smooth_fit_residual = 0.0;
    /// |v'(b1*) - 1| in the interior case, v'(0+) - 1 (negative) otherwise.
    double first_order_residual = 0.0;
    double b_star_r = 0.0;
    double a_star = 0.0;
    double u_star = 0.0;

    Barriers barriers() const { return {b1_star, b2_star}; }
};

} // namespace lbl

#endif
