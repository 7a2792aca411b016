#pragma once

#include "eot/measures.hpp"
#include "eot/random.hpp"

#include <cmath>
#include <initializer_list>

namespace eot::test {

using Vec = Vector<double>;
using Mat = Matrix<double>;
using Inst = Instance<double>;

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Index>(xs.size()));
  Index k = 0;
  for (double x : xs) v(k++) = x;
  return v;
}

// 1-D measure from points and weights.
inline DiscreteMeasure<double> line(std::initializer_list<double> pts, std::initializer_list<double> w) {
  Mat p(static_cast<Index>(pts.size()), 1);
  Index k = 0;
  for (double x : pts) p(k++, 0) = x;
  return DiscreteMeasure<double>(p, vec(w));
}

inline DiscreteMeasure<double> uniform_line(Index n) {
  Mat p(n, 1);
  for (Index i = 0; i < n; ++i) p(i, 0) = double(i);
  return DiscreteMeasure<double>(p, Vec::Constant(n, 1.0 / double(n)));
}

// Instance with an explicit cost matrix on uniform 1-D supports.
inline Inst with_cost(const Mat& c, double eps) {
  return Inst(uniform_line(c.rows()), uniform_line(c.cols()), c, eps);
}

inline Inst zero_cost(Index n, Index m, std::uint64_t seed = 1) {
  auto rng = stream_for(seed, 77);
  return Inst(random_measure<double>(rng, n, 2), random_measure<double>(rng, m, 2), Mat::Zero(n, m), 0.5);
}

inline Inst random_inst(std::uint64_t seed, Index n, Index m, double eps = 0.5) {
  auto rng = stream_for(seed, 0);
  return random_instance<double>(rng, n, m, eps);
}

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace eot::test
