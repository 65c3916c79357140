#pragma once

#include "tdbem/types.hpp"

namespace tdbem {

// Values of sn, cn, dn at one argument.
template <typename T>
struct JacobiTriple {
  T sn;
  T cn;
  T dn;
};

// Complete elliptic integral of the first kind K(m), parameter m in [0,1).
double elliptic_k(double m);

// Jacobi elliptic functions for real u and parameter m in [0,1].
JacobiTriple<double> jacobi_real(double u, double m);

// Complex argument u + iv with |v| < K(1-m); uses the addition formulas
// with the imaginary transformation to the complementary parameter.
JacobiTriple<Complex> jacobi_complex(Complex z, double m);

}  // namespace tdbem
