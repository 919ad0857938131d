#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "fusegraph/error.hpp"

namespace fusegraph {

enum class Wavelet {
  Haar,    // orthonormal: low = (a+b)/sqrt2, high = (a-b)/sqrt2
  Bior22,  // LeGall 5/3 lifting with periodic extension
};

inline Wavelet parse_wavelet(const std::string& name) {
  if (name == "haar") return Wavelet::Haar;
  if (name == "bior2.2") return Wavelet::Bior22;
  throw ConfigError("unknown wavelet '" + name + "' (expected haar or bior2.2)");
}

inline std::string wavelet_name(Wavelet w) { return w == Wavelet::Haar ? "haar" : "bior2.2"; }

template <typename Scalar>
using Grid = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Signal = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// One level of a separable 2-D decomposition. LH is low-pass along rows followed by
/// high-pass along columns; HL is the transpose convention.
template <typename Scalar>
struct Subbands2D {
  Grid<Scalar> ll, lh, hl, hh;
};

namespace detail {

template <typename Scalar>
void analyze(const Signal<Scalar>& x, Signal<Scalar>& low, Signal<Scalar>& high, Wavelet w) {
  using std::sqrt;
  const Eigen::Index half = x.size() / 2;
  low.resize(half);
  high.resize(half);
  const Scalar root2 = sqrt(Scalar(2));
  if (w == Wavelet::Haar) {
    for (Eigen::Index k = 0; k < half; ++k) {
      low(k) = (x(2 * k) + x(2 * k + 1)) / root2;
      high(k) = (x(2 * k) - x(2 * k + 1)) / root2;
    }
    return;
  }
  for (Eigen::Index k = 0; k < half; ++k) {
    const Scalar next_even = x((2 * k + 2) % x.size());
    high(k) = x(2 * k + 1) - (x(2 * k) + next_even) / Scalar(2);
  }
  for (Eigen::Index k = 0; k < half; ++k) {
    const Scalar prev_detail = high((k + half - 1) % half);
    low(k) = x(2 * k) + (prev_detail + high(k)) / Scalar(4);
  }
  low *= root2;
  high /= root2;
}

template <typename Scalar>
Signal<Scalar> synthesize(const Signal<Scalar>& low_in, const Signal<Scalar>& high_in, Wavelet w) {
  using std::sqrt;
  const Eigen::Index half = low_in.size();
  Signal<Scalar> x(2 * half);
  const Scalar root2 = sqrt(Scalar(2));
  if (w == Wavelet::Haar) {
    for (Eigen::Index k = 0; k < half; ++k) {
      x(2 * k) = (low_in(k) + high_in(k)) / root2;
      x(2 * k + 1) = (low_in(k) - high_in(k)) / root2;
    }
    return x;
  }
  const Signal<Scalar> low = low_in / root2;
  const Signal<Scalar> high = high_in * root2;
  for (Eigen::Index k = 0; k < half; ++k) x(2 * k) = low(k) - (high((k + half - 1) % half) + high(k)) / Scalar(4);
  for (Eigen::Index k = 0; k < half; ++k) x(2 * k + 1) = high(k) + (x(2 * k) + x((2 * k + 2) % x.size())) / Scalar(2);
  return x;
}

}  // namespace detail

template <typename Derived>
Subbands2D<typename Derived::Scalar> dwt2_level(const Eigen::MatrixBase<Derived>& image, Wavelet w) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index rows = image.rows();
  const Eigen::Index cols = image.cols();
  if (rows < 2 || cols < 2 || rows % 2 || cols % 2) throw DataError("dwt2: image dimensions must be even");
  Grid<Scalar> low_rows(rows, cols / 2), high_rows(rows, cols / 2);
  Signal<Scalar> lo, hi;
  for (Eigen::Index r = 0; r < rows; ++r) {
    detail::analyze<Scalar>(image.row(r).transpose(), lo, hi, w);
    low_rows.row(r) = lo.transpose();
    high_rows.row(r) = hi.transpose();
  }
  Subbands2D<Scalar> out;
  out.ll.resize(rows / 2, cols / 2);
  out.lh.resize(rows / 2, cols / 2);
  out.hl.resize(rows / 2, cols / 2);
  out.hh.resize(rows / 2, cols / 2);
  for (Eigen::Index c = 0; c < cols / 2; ++c) {
    detail::analyze<Scalar>(low_rows.col(c), lo, hi, w);
    out.ll.col(c) = lo;
    out.lh.col(c) = hi;
    detail::analyze<Scalar>(high_rows.col(c), lo, hi, w);
    out.hl.col(c) = lo;
    out.hh.col(c) = hi;
  }
  return out;
}

template <typename Scalar>
Grid<Scalar> idwt2_level(const Subbands2D<Scalar>& bands, Wavelet w) {
  const Eigen::Index half_rows = bands.ll.rows();
  const Eigen::Index half_cols = bands.ll.cols();
  Grid<Scalar> low_rows(2 * half_rows, half_cols), high_rows(2 * half_rows, half_cols);
  for (Eigen::Index c = 0; c < half_cols; ++c) {
    low_rows.col(c) = detail::synthesize<Scalar>(bands.ll.col(c), bands.lh.col(c), w);
    high_rows.col(c) = detail::synthesize<Scalar>(bands.hl.col(c), bands.hh.col(c), w);
  }
  Grid<Scalar> image(2 * half_rows, 2 * half_cols);
  for (Eigen::Index r = 0; r < 2 * half_rows; ++r)
    image.row(r) = detail::synthesize<Scalar>(low_rows.row(r).transpose(), high_rows.row(r).transpose(), w).transpose();
  return image;
}

/// Final-level sub-bands of an L-level decomposition (each level splits the previous LL).
template <typename Derived>
Subbands2D<typename Derived::Scalar> dwt2(const Eigen::MatrixBase<Derived>& image, int levels, Wavelet w) {
  using Scalar = typename Derived::Scalar;
  if (levels < 1) throw ConfigError("dwt2: at least one level is required");
  const Eigen::Index block = Eigen::Index{1} << levels;
  if (image.rows() % block || image.cols() % block || image.rows() < block || image.cols() < block)
    throw DataError("dwt2: image size " + std::to_string(image.rows()) + "x" + std::to_string(image.cols()) +
                    " is not divisible by 2^" + std::to_string(levels));
  Subbands2D<Scalar> bands = dwt2_level(image, w);
  for (int level = 1; level < levels; ++level) bands = dwt2_level(bands.ll, w);
  return bands;
}

}  // namespace fusegraph
