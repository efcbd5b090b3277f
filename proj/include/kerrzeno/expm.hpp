#pragma once

// Dense matrix exponential by scaling and squaring with diagonal Pade
// approximants of degree 3, 5, 7, 9 or 13 (Higham 2005 selection table).

#include <cmath>
#include <complex>
#include <type_traits>

#include <Eigen/Core>
#include <Eigen/LU>

namespace kz {

namespace detail {

template <typename T>
struct real_of {
    using type = T;
};
template <typename T>
struct real_of<std::complex<T>> {
    using type = T;
};

template <typename MatrixType>
void pade_terms(const MatrixType& a, int degree, MatrixType& u, MatrixType& v)
{
    using Real = typename real_of<typename MatrixType::Scalar>::type;
    const auto n = a.rows();
    const MatrixType id = MatrixType::Identity(n, n);
    const MatrixType a2 = a * a;

    switch (degree) {
    case 3: {
        const Real b[] = {120, 60, 12, 1};
        u.noalias() = a * (b[3] * a2 + b[1] * id);
        v = b[2] * a2 + b[0] * id;
        return;
    }
    case 5: {
        const Real b[] = {30240, 15120, 3360, 420, 30, 1};
        const MatrixType a4 = a2 * a2;
        u.noalias() = a * (b[5] * a4 + b[3] * a2 + b[1] * id);
        v = b[4] * a4 + b[2] * a2 + b[0] * id;
        return;
    }
    case 7: {
        const Real b[] = {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1};
        const MatrixType a4 = a2 * a2;
        const MatrixType a6 = a4 * a2;
        u.noalias() = a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
        v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
        return;
    }
    case 9: {
        const Real b[] = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                          2162160.,     110880.,     3960.,       90.,        1.};
        const MatrixType a4 = a2 * a2;
        const MatrixType a6 = a4 * a2;
        const MatrixType a8 = a6 * a2;
        u.noalias() = a * (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
        v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
        return;
    }
    default: {
        const Real b[] = {64764752532480000., 32382376266240000., 7771770303897600.,
                          1187353796428800.,  129060195264000.,   10559470521600.,
                          670442572800.,      33522128640.,       1323241920.,
                          40840800.,          960960.,            16380.,
                          182.,               1.};
        const MatrixType a4 = a2 * a2;
        const MatrixType a6 = a4 * a2;
        MatrixType tmp = b[13] * a6 + b[11] * a4 + b[9] * a2;
        u.noalias() = a6 * tmp;
        u += b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
        u = (a * u).eval();
        tmp = b[12] * a6 + b[10] * a4 + b[8] * a2;
        v.noalias() = a6 * tmp;
        v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
        return;
    }
    }
}

}  // namespace detail

/// exp(A) for a square dense matrix. Accurate to roughly unit roundoff
/// times the condition of the exponential.
template <typename Derived>
typename Derived::PlainObject expm(const Eigen::MatrixBase<Derived>& a_in)
{
    using MatrixType = typename Derived::PlainObject;
    using Real = typename detail::real_of<typename MatrixType::Scalar>::type;
    static_assert(std::is_floating_point_v<Real>, "expm requires a floating-point scalar");

    const MatrixType a = a_in;
    eigen_assert(a.rows() == a.cols());
    if (a.rows() == 0)
        return a;

    const Real norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    constexpr Real theta[] = {1.495585217958292e-2, 2.539398330063230e-1, 9.504178996162932e-1,
                              2.097847961257068e0, 5.371920351148152e0};
    constexpr int degrees[] = {3, 5, 7, 9, 13};

    int degree = 13;
    int squarings = 0;
    for (int i = 0; i < 4; ++i) {
        if (norm1 <= theta[i]) {
            degree = degrees[i];
            break;
        }
    }
    MatrixType scaled = a;
    if (degree == 13 && norm1 > theta[4]) {
        squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta[4]))));
        scaled = a * std::ldexp(Real(1), -squarings);
    }

    MatrixType u(a.rows(), a.cols());
    MatrixType v(a.rows(), a.cols());
    detail::pade_terms(scaled, degree, u, v);
    MatrixType result = (v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < squarings; ++i)
        result = (result * result).eval();
    return result;
}

}  // namespace kz
