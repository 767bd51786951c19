#include "crane/errors.hpp"

namespace crane {

DimensionMismatch::DimensionMismatch(const std::string &where, long expected,
                                     long got)
    : std::invalid_argument(where + ": expected dimension " +
                            std::to_string(expected) + ", got " +
                            std::to_string(got)) {}

} // namespace crane
