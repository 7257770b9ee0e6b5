#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "heatlab/assembly.hpp"
#include "heatlab/spectral.hpp"

namespace heatlab::estimators {

using mesh::Point;

enum class ProbeKind { eigenmodes, random, nodal_spikes, corner_bumps, checkerboard };

std::string to_string(ProbeKind kind);

struct Probe {
  std::string id;
  Eigen::VectorXd coeffs;  ///< free coefficients, never identically zero
};

struct ProbeFamily {
  ProbeKind kind = ProbeKind::random;
  int count = 0;
  std::uint64_t seed = 0;
  std::vector<Probe> probes;
};

/// Deterministic for a fixed seed. Eigenmodes need the decomposition.
ProbeFamily make_probe_family(ProbeKind kind, const fem::FeSystem& sys, const spectral::SpectralDecomposition* spec,
                              int count, std::uint64_t seed);

/// Structured mesh of "square" or "lshape" with n = 2^level cells per unit length.
std::shared_ptr<const mesh::TriMesh> make_mesh(const std::string& domain, int level);

/// Worst-case corner of the domain: the reentrant vertex of the L-shape, (0,0) of the square.
Point critical_corner(const mesh::PolygonalDomain& domain);

/// Incenters of the level-2 mesh of the same domain plus the three incenters of
/// `mesh` nearest to the critical corner.
std::vector<Point> kernel_probe_points(const mesh::TriMesh& mesh);

/// Interior nodes of the level-3 mesh with their lumped-mass weights.
struct WeightedPoints {
  std::vector<Point> points;
  std::vector<double> weights;
};
WeightedPoints maximal_function_grid(const std::string& domain);

}  // namespace heatlab::estimators
