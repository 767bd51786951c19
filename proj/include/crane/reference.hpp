#pragma once

#include <Eigen/Core>

namespace crane {

/// Position/velocity/acceleration sample of a planar reference signal.
struct Reference {
    Eigen::Vector2d pos = Eigen::Vector2d::Zero();
    Eigen::Vector2d vel = Eigen::Vector2d::Zero();
    Eigen::Vector2d acc = Eigen::Vector2d::Zero();
};

} // namespace crane
