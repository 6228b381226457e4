#pragma once

#include <Eigen/Dense>

namespace cmc {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// The two graph geometries the solver handles.
enum class ModelKind { Minkowski, Euclidean };

inline const char* to_string(ModelKind m) {
    return m == ModelKind::Minkowski ? "minkowski" : "euclidean";
}

} // namespace cmc
