#pragma once

// Golden matrices of the worked random-walk examples, as printed (2 or 3
// decimals). Shared between the unit tests and the acceptance suite.

#include "stinla/types.hpp"

namespace golden {

using stinla::Matrix;
using stinla::Vector;

// pseudo-inverse of the RW1 structure on 6 nodes
inline Matrix rw1_6_pinv() {
  Matrix m(6, 6);
  m << 1.53, 0.69, 0.03, -0.47, -0.81, -0.97,      //
      0.69, 0.86, 0.19, -0.31, -0.64, -0.81,       //
      0.03, 0.19, 0.53, 0.03, -0.31, -0.47,        //
      -0.47, -0.31, 0.03, 0.53, 0.19, 0.03,        //
      -0.81, -0.64, -0.31, 0.19, 0.86, 0.69,       //
      -0.97, -0.81, -0.47, 0.03, 0.69, 1.53;
  return m;
}

// pseudo-inverse of the RW1 structure on 4 nodes
inline Matrix rw1_4_pinv() {
  Matrix m(4, 4);
  m << 0.875, 0.125, -0.375, -0.625,  //
      0.125, 0.375, -0.125, -0.375,   //
      -0.375, -0.125, 0.375, 0.125,   //
      -0.625, -0.375, 0.125, 0.875;
  return m;
}

// worked example: mapping matrix, likelihood curvature, and the resulting
// covariances (uncorrected, then conditioned on the sum-to-zero constraint)
inline Matrix example_mapping() {
  Matrix a(3, 4);
  a << 1, 1, 0, 0,  //
      1, 0, 1, 0,   //
      1, 0, 0, 1;
  return a;
}

inline Vector example_curvature() { return (Vector(3) << 1.796, 2.033, 0.896).finished(); }

inline Matrix example_cov_uncorrected() {
  Matrix m(4, 4);
  m << 0.350, -0.150, -0.293, -0.320,  //
      -0.150, 0.350, 0.207, 0.180,     //
      -0.293, 0.207, 0.554, 0.430,     //
      -0.320, 0.180, 0.430, 0.905;
  return m;
}

inline Matrix example_cov_corrected() {
  Matrix m(4, 4);
  m << 0.274, -0.044, -0.129, -0.102,  //
      -0.044, 0.198, -0.025, -0.129,   //
      -0.129, -0.025, 0.198, -0.044,   //
      -0.102, -0.129, -0.044, 0.274;
  return m;
}

}  // namespace golden
