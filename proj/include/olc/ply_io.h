// SPDX-License-Identifier: Apache-2.0

#ifndef OLC_PLY_IO_H
#define OLC_PLY_IO_H

#include <string>

#include "olc/point_cloud.h"

namespace olc {

// Reads vertex x/y/z from ascii or binary_little_endian PLY. Non-vertex
// elements and extra vertex properties are skipped (a warning goes to
// stderr). Throws PlyParseError on malformed input.
PointCloud loadPly(const std::string& path);

// Writes x/y/z as double properties so a write/read cycle is bit-exact.
void savePly(const std::string& path, const PointCloud& pc, bool binary = false);

}  // namespace olc

#endif
