#pragma once

#include <string>

#include "lrbgk/lowrank.hpp"
#include "lrbgk/maxwell_moments.hpp"

namespace lrbgk {

/// Everything needed to restart or compare a run. A fluid snapshot has rank 0
/// and an empty velocity grid.
struct Snapshot {
  double time = 0.0;
  MomentState mom;
  LowRankState state;
};

void write_snapshot(const std::string& path, const Snapshot& s);
Snapshot read_snapshot(const std::string& path);

/// Raw little-endian doubles at path plus a text header at path + ".hdr".
void write_field_dump(const std::string& path, const SpatialGrid& g, const Field& f, double time,
                      const std::string& name);
void write_field_dump(const std::string& path, const VelocityGrid& g, const Field& f, double time,
                      const std::string& name);

/// Values of a field on the nodes of a coarser grid whose counts divide the
/// fine counts. Both grids must cover the same box.
Field restrict_to(const SpatialGrid& fine, const Field& f, const SpatialGrid& coarse);

/// max(|rho - rho_ref|_inf, |rho u - rho_ref u_ref|_inf), sampled on the
/// coarser of the two grids.
double moment_error(const SpatialGrid& ga, const MomentState& a, const SpatialGrid& gb, const MomentState& b);

}  // namespace lrbgk
