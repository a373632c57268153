#pragma once

#include "phenokg/common.hpp"

namespace phenokg {

// Matrix exponential via Pade approximation with norm-based scaling and
// squaring (Higham 2005 coefficients). Throws NonFinite if the result
// overflows.
Matrix expm(const Matrix& a);

}  // namespace phenokg
