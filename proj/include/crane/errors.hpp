// Exception types shared by the crane library.
#pragma once

#include <stdexcept>
#include <string>

namespace crane {

/// Payload at or above the horizontal plane through the suspension point
/// (vertical cable projection L_z no longer positive).
class CableSingularity : public std::runtime_error {
public:
    explicit CableSingularity(const std::string &what)
        : std::runtime_error("cable singularity: " + what) {}
};

/// The Euler-angle Jacobian A is (numerically) singular: c_x or c_y near 0.
class JacobianSingularity : public std::runtime_error {
public:
    explicit JacobianSingularity(const std::string &what)
        : std::runtime_error("jacobian singularity: " + what) {}
};

class DimensionMismatch : public std::invalid_argument {
public:
    DimensionMismatch(const std::string &where, long expected, long got);
};

} // namespace crane
