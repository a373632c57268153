#include "phenokg/expm.hpp"

#include <Eigen/LU>
#include <cmath>

namespace phenokg {

namespace {

// Degrees 3/5/7/9 share the same evaluation shape: U = A * (odd terms),
// V = even terms, exp(A) ~= (V - U)^{-1} (V + U).
Matrix pade_low(const Matrix& a, const double* b, int m) {
    const auto n = a.rows();
    Matrix a2 = a * a;
    Matrix pow = Matrix::Identity(n, n);  // a^{2k}
    Matrix u = b[1] * pow;
    Matrix v = b[0] * pow;
    for (int k = 1; 2 * k <= m; ++k) {
        pow = pow * a2;
        v += b[2 * k] * pow;
        if (2 * k + 1 <= m) u += b[2 * k + 1] * pow;
    }
    u = a * u;
    Matrix num = v + u;
    Matrix den = v - u;
    return den.partialPivLu().solve(num);
}

Matrix pade13(const Matrix& a) {
    static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};
    const auto n = a.rows();
    Matrix a2 = a * a;
    Matrix a4 = a2 * a2;
    Matrix a6 = a4 * a2;
    Matrix i = Matrix::Identity(n, n);
    Matrix u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                    b[3] * a2 + b[1] * i);
    Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
               b[2] * a2 + b[0] * i;
    Matrix num = v + u;
    Matrix den = v - u;
    return den.partialPivLu().solve(num);
}

double one_norm(const Matrix& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace

Matrix expm(const Matrix& a) {
    if (a.rows() != a.cols()) throw DimensionMismatch("expm requires a square matrix");
    if (!a.allFinite()) throw NonFinite("expm input has non-finite entries");
    const double norm = one_norm(a);

    static const double b3[] = {120.0, 60.0, 12.0, 1.0};
    static const double b5[] = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
    static const double b7[] = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                25200.0,    1512.0,    56.0,      1.0};
    static const double b9[] = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
                                30270240.0,    2162160.0,    110880.0,     3960.0,
                                90.0,          1.0};

    Matrix e;
    if (norm <= 1.495585217958292e-2) {
        e = pade_low(a, b3, 3);
    } else if (norm <= 2.539398330063230e-1) {
        e = pade_low(a, b5, 5);
    } else if (norm <= 9.504178996162932e-1) {
        e = pade_low(a, b7, 7);
    } else if (norm <= 2.097847961257068e0) {
        e = pade_low(a, b9, 9);
    } else {
        const double theta13 = 5.371920351148152e0;
        int s = 0;
        if (norm > theta13) s = static_cast<int>(std::ceil(std::log2(norm / theta13)));
        Matrix scaled = a / std::pow(2.0, s);
        e = pade13(scaled);
        for (int k = 0; k < s; ++k) e = e * e;
    }
    if (!e.allFinite()) throw NonFinite("expm overflow");
    return e;
}

}  // namespace phenokg
