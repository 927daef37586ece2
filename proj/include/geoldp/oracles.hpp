#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "geoldp/functionals.hpp"
#include "geoldp/pointproc.hpp"

// Quadratic-or-worse reference implementations used by the test suite and by
// `validate`. They share no code with the grid paths beyond the score kernels.
namespace geoldp::oracle {

// Every k-subset (ascending indices) with all pairwise distances <= r * L.
std::vector<std::vector<std::uint32_t>> all_local_tuples(const PointCloud& cloud, int k, double L);

// c_n by a full scan over the cloud.
bool isolated(const PointCloud& cloud, std::span<const std::uint32_t> members, double t);

// No cloud point strictly inside the circumdisk of the three members.
bool empty_circumdisk(const PointCloud& cloud, std::span<const std::uint32_t> members);

// T summed over all k-subsets with linear-scan isolation.
StatisticVector brute_force_T(const PointCloud& cloud, const ScoreFunction& score);

// Number of isolated local tuples (the xi-process count).
std::size_t brute_force_xi_count(const PointCloud& cloud, double t, double L, int k);

}  // namespace geoldp::oracle
