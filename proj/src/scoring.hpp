#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "geoldp/functionals.hpp"
#include "geoldp/spatial.hpp"

namespace geoldp::detail {

// Receives lexicographically ordered members and the G vector of every tuple
// with a nonzero score before isolation.
using ScoredTupleVisitor = std::function<void(std::span<const std::uint32_t>, std::span<const double>)>;

void scan_scored_tuples(const PointCloud& cloud, const ScoreFunction& score, const ScoredTupleVisitor& visit,
                        const ScanOptions& options = {});

bool empty_open_circumdisk(std::span<const std::uint32_t> members, const PointCloud& cloud, const GridIndex& grid,
                           double radius_offset = 0.0);

}  // namespace geoldp::detail
