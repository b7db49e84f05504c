#pragma once

#include <cmath>
#include <vector>

#include "declo/core/geometry.hpp"
#include "declo/core/neighbor_index.hpp"
#include "declo/ingest/kitti_io.hpp"

namespace declo {

/// Eigen-decomposition of a symmetric 3x3 matrix, eigenvalues ascending.
/// Closed-form (trigonometric) eigenvalues, eigenvectors from row cross
/// products with the better-separated extreme computed first.
struct SymEig3 {
  Vec3 values;
  Mat3 vectors;  // columns, matching values
};

namespace detail {

// Sign convention: flip so the first nonzero component is positive.
inline Vec3 lex_canonical(const Vec3& v) {
  for (int i = 0; i < 3; ++i) {
    if (v[i] > 0.0) return v;
    if (v[i] < 0.0) return -v;
  }
  return v;
}

inline Vec3 isolated_eigenvector(const Mat3& a, double lambda) {
  Mat3 m = a - lambda * Mat3::Identity();
  const Vec3 c01 = m.row(0).cross(m.row(1));
  const Vec3 c02 = m.row(0).cross(m.row(2));
  const Vec3 c12 = m.row(1).cross(m.row(2));
  const double n01 = c01.squaredNorm(), n02 = c02.squaredNorm(), n12 = c12.squaredNorm();
  Vec3 best = c01;
  double nbest = n01;
  if (n02 > nbest) { best = c02; nbest = n02; }
  if (n12 > nbest) { best = c12; nbest = n12; }
  if (nbest <= 0.0) return Vec3(1, 0, 0);  // (near) repeated eigenvalue
  return best / std::sqrt(nbest);
}

// Eigenvector for the middle eigenvalue, constrained orthogonal to `w`.
inline Vec3 middle_eigenvector(const Mat3& a, double lambda, const Vec3& w) {
  // Orthonormal basis {u, v} of the plane orthogonal to w.
  int smallest = 0;
  w.cwiseAbs().minCoeff(&smallest);
  Vec3 u = Vec3::Unit(smallest) - w[smallest] * w;
  u.normalize();
  const Vec3 v = w.cross(u);
  const double m00 = u.dot(a * u) - lambda;
  const double m01 = u.dot(a * v);
  const double m11 = v.dot(a * v) - lambda;
  // Null vector of the 2x2 projected system, using the better-conditioned row.
  if (std::max(std::abs(m00), std::abs(m01)) >= std::max(std::abs(m11), std::abs(m01))) {
    if (std::abs(m00) > 0.0 || std::abs(m01) > 0.0)
      return (m01 * u - m00 * v).normalized();
  } else {
    if (std::abs(m11) > 0.0 || std::abs(m01) > 0.0)
      return (m11 * u - m01 * v).normalized();
  }
  return u;
}

}  // namespace detail

inline SymEig3 sym_eig3(const Mat3& a) {
  SymEig3 out;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) {
    out.values = Vec3::Zero();
    out.vectors = Mat3::Identity();
    return out;
  }
  const Mat3 b = a / scale;
  const double off2 = b(0, 1) * b(0, 1) + b(0, 2) * b(0, 2) + b(1, 2) * b(1, 2);

  double e0, e1, e2;  // ascending
  if (off2 == 0.0) {
    double d[3] = {b(0, 0), b(1, 1), b(2, 2)};
    int order[3] = {0, 1, 2};
    std::sort(order, order + 3, [&](int i, int j) {
      return d[i] != d[j] ? d[i] < d[j] : i < j;
    });
    out.values = Vec3(d[order[0]], d[order[1]], d[order[2]]) * scale;
    out.vectors.col(0) = Vec3::Unit(order[0]);
    out.vectors.col(1) = Vec3::Unit(order[1]);
    out.vectors.col(2) = Vec3::Unit(order[2]);
    return out;
  }

  const double q = b.trace() / 3.0;
  const double p2 = (b(0, 0) - q) * (b(0, 0) - q) + (b(1, 1) - q) * (b(1, 1) - q) +
                    (b(2, 2) - q) * (b(2, 2) - q) + 2.0 * off2;
  const double p = std::sqrt(p2 / 6.0);
  const Mat3 c = (b - q * Mat3::Identity()) / p;
  const double r = std::clamp(c.determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  e2 = q + 2.0 * p * std::cos(phi);
  e0 = q + 2.0 * p * std::cos(phi + 2.0 * kPi / 3.0);
  e1 = 3.0 * q - e0 - e2;

  Vec3 v0, v1, v2;
  if (e1 - e0 >= e2 - e1) {
    v0 = detail::isolated_eigenvector(b, e0);
    v1 = detail::middle_eigenvector(b, e1, v0);
    v2 = v0.cross(v1);
  } else {
    v2 = detail::isolated_eigenvector(b, e2);
    v1 = detail::middle_eigenvector(b, e1, v2);
    v0 = v1.cross(v2);
  }
  out.values = Vec3(e0, e1, e2) * scale;
  out.vectors.col(0) = detail::lex_canonical(v0);
  out.vectors.col(1) = detail::lex_canonical(v1);
  out.vectors.col(2) = detail::lex_canonical(v2);
  return out;
}

/// Unit surface normals paired with their source points and the PCA
/// curvature lambda0 / (lambda0 + lambda1 + lambda2).
struct NormalCloud {
  std::vector<UnitVec3> normals;
  std::vector<Vec3> source_points;
  std::vector<double> curvature;

  std::size_t size() const { return normals.size(); }
};

/// PCA normal per point over its k nearest neighbors, oriented toward the
/// sensor origin. Covariance is accumulated in query-relative coordinates,
/// which keeps the result independent of a rigid shift of the scan.
inline NormalCloud estimate_normals(const Scan& scan, int k,
                                    const NeighborIndex* prebuilt = nullptr) {
  if (k < 3) throw std::invalid_argument("k must be >= 3");
  if (scan.points.size() < static_cast<std::size_t>(k))
    throw std::runtime_error("insufficient points");

  NeighborIndex local;
  const NeighborIndex* index = prebuilt;
  if (!index) {
    local = NeighborIndex(scan.points);
    index = &local;
  }

  NormalCloud nc;
  const std::size_t n = scan.points.size();
  nc.normals.reserve(n);
  nc.source_points = scan.points;
  nc.curvature.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    const Vec3& p = scan.points[i];
    const std::vector<Neighbor> nbrs = index->knn(p, k);

    Vec3 mean = Vec3::Zero();
    std::vector<Vec3> rel(nbrs.size());
    for (std::size_t j = 0; j < nbrs.size(); ++j) {
      rel[j] = scan.points[nbrs[j].index] - p;
      mean += rel[j];
    }
    mean /= static_cast<double>(nbrs.size());

    Mat3 cov = Mat3::Zero();
    for (const Vec3& d : rel) {
      const Vec3 c = d - mean;
      cov += c * c.transpose();
    }
    cov /= static_cast<double>(nbrs.size());

    const SymEig3 eig = sym_eig3(cov);
    Vec3 normal = eig.vectors.col(0);
    if (normal.dot(-p) < 0.0) normal = -normal;  // face the sensor

    const double total = eig.values.sum();
    double curv = total > 0.0 ? eig.values[0] / total : 0.0;
    nc.normals.push_back(UnitVec3(normal));
    nc.curvature.push_back(std::clamp(curv, 0.0, 1.0 / 3.0));
  }
  return nc;
}

/// Bilateral smoothing of normals: Gaussian in spatial distance and in
/// angle between normals, support truncated at 3 sigma_s.
inline NormalCloud bilateral_filter_normals(const NormalCloud& nc,
                                            const NeighborIndex& index,
                                            double sigma_s, double sigma_n) {
  if (sigma_s <= 0.0 || sigma_n <= 0.0)
    throw std::invalid_argument("bilateral sigmas must be > 0");

  NormalCloud out;
  out.source_points = nc.source_points;
  out.curvature = nc.curvature;
  out.normals.reserve(nc.size());

  const double inv2ss = 1.0 / (2.0 * sigma_s * sigma_s);
  const double inv2sn = 1.0 / (2.0 * sigma_n * sigma_n);

  for (std::size_t i = 0; i < nc.size(); ++i) {
    const Vec3& p = nc.source_points[i];
    const UnitVec3& ni = nc.normals[i];
    Vec3 acc = Vec3::Zero();
    for (int j : index.radius(p, 3.0 * sigma_s)) {
      const double d2 = (nc.source_points[j] - p).squaredNorm();
      const double theta = ni.angle_to(nc.normals[j]);
      acc += std::exp(-d2 * inv2ss) * std::exp(-theta * theta * inv2sn) *
             nc.normals[j].vec();
    }
    // Antipodal cancellation: keep the input normal.
    out.normals.push_back(acc.norm() > 1e-12 ? UnitVec3(acc) : ni);
  }
  return out;
}

/// The normal directions as points on the unit sphere.
inline std::vector<UnitVec3> to_sphere(const NormalCloud& nc) { return nc.normals; }

}  // namespace declo
