#pragma once

#include <complex>
#include <Eigen/Dense>

namespace genkernel {

using Real = double;
using Cplx = std::complex<double>;

using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using IVec = Eigen::VectorXi;

// d-dimensional evaluation point and derivative multi-index
using Point = Eigen::VectorXd;
using MultiIndex = Eigen::VectorXi;

inline Point point1(Real x) {
    Point p(1);
    p[0] = x;
    return p;
}

inline Point point2(Real x, Real y) {
    Point p(2);
    p[0] = x;
    p[1] = y;
    return p;
}

inline MultiIndex zero_alpha(int dim) { return MultiIndex::Zero(dim); }

inline MultiIndex unit_alpha(int dim, int axis, int order = 1) {
    MultiIndex a = MultiIndex::Zero(dim);
    a[axis] = order;
    return a;
}

inline int alpha_order(const MultiIndex& a) { return a.sum(); }

} // namespace genkernel
