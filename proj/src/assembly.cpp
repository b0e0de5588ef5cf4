#include "fetilab/assembly.hpp"

#include <array>
#include <cmath>
#include <string>

namespace fetilab {

namespace {

constexpr double kGauss = 0.57735026918962576451;  // 1/sqrt(3)

// Reference-node signs of the Q1 element, matching the mesh connectivity.
constexpr std::array<std::array<double, 3>, 8> kRef{{
    {-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
    {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1},
}};

Mat constitutive_matrix(int dimension, double E, double nu) {
  if (dimension == 2) {
    const double c = E / ((1.0 + nu) * (1.0 - 2.0 * nu));
    Mat D(3, 3);
    D << c * (1.0 - nu), c * nu, 0.0,
         c * nu, c * (1.0 - nu), 0.0,
         0.0, 0.0, c * (1.0 - 2.0 * nu) / 2.0;
    return D;
  }
  const double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  const double mu = E / (2.0 * (1.0 + nu));
  Mat D = Mat::Zero(6, 6);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) D(i, j) = lambda;
    D(i, i) += 2.0 * mu;
    D(i + 3, i + 3) = mu;
  }
  return D;
}

}  // namespace

void MaterialField::validate() const {
  if (!(e1 > 0.0) || !(e2 > 0.0)) throw ConfigError("material moduli must be positive");
  if (!(nu >= 0.0 && nu < 0.5)) throw ConfigError("Poisson ratio must lie in [0, 0.5)");
  if (layer_axis < 0 || layer_axis > 2) throw ConfigError("layer axis must be 0, 1 or 2");
}

double MaterialField::modulus(const GridIndex& block) const {
  switch (pattern) {
    case MaterialPattern::uniform:
      return e1;
    case MaterialPattern::checkerboard:
      return (block[0] + block[1] + block[2]) % 2 == 0 ? e1 : e2;
    case MaterialPattern::layers:
      return block[static_cast<std::size_t>(layer_axis)] % 2 == 0 ? e1 : e2;
  }
  return e1;
}

Mat element_stiffness(Physics physics, int dimension, std::span<const Point> coords,
                      double modulus, double nu) {
  const int nn = dimension == 2 ? 4 : 8;
  if (static_cast<int>(coords.size()) != nn) throw ConfigError("Q1 element needs 4 (2D) or 8 (3D) nodes");
  const int nc = components_for(physics, dimension);
  Mat Ke = Mat::Zero(nn * nc, nn * nc);
  const Mat D = physics == Physics::elasticity ? constitutive_matrix(dimension, modulus, nu) : Mat();

  const int npts = dimension == 2 ? 4 : 8;
  for (int q = 0; q < npts; ++q) {
    const double xi[3] = {kRef[static_cast<std::size_t>(q)][0] * kGauss, kRef[static_cast<std::size_t>(q)][1] * kGauss,
                          kRef[static_cast<std::size_t>(q)][2] * kGauss};
    Mat dN(dimension, nn);  // reference derivatives
    for (int a = 0; a < nn; ++a) {
      const auto& r = kRef[static_cast<std::size_t>(a)];
      if (dimension == 2) {
        dN(0, a) = 0.25 * r[0] * (1.0 + r[1] * xi[1]);
        dN(1, a) = 0.25 * r[1] * (1.0 + r[0] * xi[0]);
      } else {
        dN(0, a) = 0.125 * r[0] * (1.0 + r[1] * xi[1]) * (1.0 + r[2] * xi[2]);
        dN(1, a) = 0.125 * r[1] * (1.0 + r[0] * xi[0]) * (1.0 + r[2] * xi[2]);
        dN(2, a) = 0.125 * r[2] * (1.0 + r[0] * xi[0]) * (1.0 + r[1] * xi[1]);
      }
    }
    Mat X(nn, dimension);
    for (int a = 0; a < nn; ++a)
      for (int d = 0; d < dimension; ++d) X(a, d) = coords[static_cast<std::size_t>(a)][static_cast<std::size_t>(d)];
    const Mat J = dN * X;
    const double det = J.determinant();
    if (!(det > 0.0)) throw NumericalError("degenerate element: non-positive Jacobian " + std::to_string(det));
    const Mat dNdx = J.inverse() * dN;  // physical derivatives

    if (physics == Physics::scalar) {
      Ke.noalias() += modulus * det * (dNdx.transpose() * dNdx);
      continue;
    }
    const int nstrain = dimension == 2 ? 3 : 6;
    Mat Bm = Mat::Zero(nstrain, nn * nc);
    for (int a = 0; a < nn; ++a) {
      const double gx = dNdx(0, a), gy = dNdx(1, a);
      if (dimension == 2) {
        Bm(0, 2 * a) = gx;
        Bm(1, 2 * a + 1) = gy;
        Bm(2, 2 * a) = gy;
        Bm(2, 2 * a + 1) = gx;
      } else {
        const double gz = dNdx(2, a);
        Bm(0, 3 * a) = gx;
        Bm(1, 3 * a + 1) = gy;
        Bm(2, 3 * a + 2) = gz;
        Bm(3, 3 * a) = gy;
        Bm(3, 3 * a + 1) = gx;
        Bm(4, 3 * a + 1) = gz;
        Bm(4, 3 * a + 2) = gy;
        Bm(5, 3 * a) = gz;
        Bm(5, 3 * a + 2) = gx;
      }
    }
    Ke.noalias() += det * (Bm.transpose() * D * Bm);
  }
  return 0.5 * (Ke + Ke.transpose());
}

Vec nodal_loads(const Mesh& mesh, Physics physics, const LoadSpec& load) {
  const int dim = mesh.dimension;
  const int nc = components_for(physics, dim);
  Vec f = Vec::Zero(mesh.num_nodes() * nc);
  if (load.kind == LoadKind::none) return f;
  if (load.axis < 0 || load.axis >= dim) throw ConfigError("load axis out of range");
  const int axis = load.axis;

  if (load.kind == LoadKind::body) {
    for (const auto& conn : mesh.elements) {
      std::vector<Point> xs;
      for (int n : conn) xs.push_back(mesh.coordinates[static_cast<std::size_t>(n)]);
      const int nn = static_cast<int>(conn.size());
      const int npts = dim == 2 ? 4 : 8;
      for (int q = 0; q < npts; ++q) {
        Vec N(nn);
        Mat dN(dim, nn);
        for (int a = 0; a < nn; ++a) {
          const auto& r = kRef[static_cast<std::size_t>(a)];
          const auto& g = kRef[static_cast<std::size_t>(q)];
          double w = 1.0;
          for (int d = 0; d < dim; ++d) w *= 0.5 * (1.0 + r[d] * g[d] * kGauss);
          N[a] = w;
          for (int d = 0; d < dim; ++d) {
            double v = 0.5 * r[d];
            for (int e = 0; e < dim; ++e)
              if (e != d) v *= 0.5 * (1.0 + r[e] * g[e] * kGauss);
            dN(d, a) = v;
          }
        }
        Mat X(nn, dim);
        for (int a = 0; a < nn; ++a)
          for (int d = 0; d < dim; ++d) X(a, d) = xs[static_cast<std::size_t>(a)][static_cast<std::size_t>(d)];
        const double det = (dN * X).determinant();
        for (int a = 0; a < nn; ++a) {
          const double v = load.magnitude * N[a] * det;
          if (physics == Physics::scalar) f[conn[static_cast<std::size_t>(a)]] += v;
          else f[conn[static_cast<std::size_t>(a)] * nc + axis] -= v;
        }
      }
    }
    return f;
  }

  // Face load on the face at the maximum index of `axis`.
  const int last = mesh.nodes_per_axis[static_cast<std::size_t>(axis)] - 1;
  std::vector<int> tang;
  for (int d = 0; d < dim; ++d)
    if (d != axis) tang.push_back(d);
  for (int el = 0; el < mesh.num_elements(); ++el) {
    const GridIndex eg = mesh.element_grid_index(el);
    if (eg[static_cast<std::size_t>(axis)] != last - 1) continue;
    // Face nodes ordered as a cycle in the tangential index directions.
    std::vector<int> face;
    if (dim == 2) {
      GridIndex a = eg, b = eg;
      a[static_cast<std::size_t>(axis)] = last;
      b[static_cast<std::size_t>(axis)] = last;
      b[static_cast<std::size_t>(tang[0])] += 1;
      face = {mesh.node_index(a[0], a[1]), mesh.node_index(b[0], b[1])};
    } else {
      const int offs[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
      for (const auto& o : offs) {
        GridIndex g = eg;
        g[static_cast<std::size_t>(axis)] = last;
        g[static_cast<std::size_t>(tang[0])] += o[0];
        g[static_cast<std::size_t>(tang[1])] += o[1];
        face.push_back(mesh.node_index(g[0], g[1], g[2]));
      }
    }
    auto X = [&](int a) {
      const auto& p = mesh.coordinates[static_cast<std::size_t>(face[static_cast<std::size_t>(a)])];
      return Eigen::Vector3d(p[0], p[1], p[2]);
    };
    const int npts = dim == 2 ? 2 : 4;
    for (int q = 0; q < npts; ++q) {
      const double s = (q == 0 || q == 3) ? -kGauss : kGauss;
      const double t = q < 2 ? -kGauss : kGauss;
      Eigen::Vector3d normal;  // area-weighted normal per unit reference measure
      std::vector<double> N;
      if (dim == 2) {
        N = {0.5 * (1.0 - s), 0.5 * (1.0 + s)};
        const Eigen::Vector3d tv = 0.5 * (X(1) - X(0));
        normal = Eigen::Vector3d(tv[1], -tv[0], 0.0);
      } else {
        N = {0.25 * (1 - s) * (1 - t), 0.25 * (1 + s) * (1 - t), 0.25 * (1 + s) * (1 + t), 0.25 * (1 - s) * (1 + t)};
        const Eigen::Vector3d ts = 0.25 * ((1 - t) * (X(1) - X(0)) + (1 + t) * (X(2) - X(3)));
        const Eigen::Vector3d tt = 0.25 * ((1 - s) * (X(3) - X(0)) + (1 + s) * (X(2) - X(1)));
        normal = ts.cross(tt);
      }
      if (normal[axis] < 0.0) normal = -normal;  // outward
      for (std::size_t a = 0; a < face.size(); ++a) {
        const int node = face[a];
        if (physics == Physics::scalar) {
          f[node] += load.magnitude * N[a] * normal.norm();
        } else {
          for (int c = 0; c < dim; ++c) f[node * nc + c] -= load.magnitude * N[a] * normal[c];
        }
      }
    }
  }
  return f;
}

Mat geometric_modes(Physics physics, int dimension, std::span<const Point> dof_coords,
                    std::span<const int> dof_component, const Point& center) {
  const auto n = static_cast<Eigen::Index>(dof_coords.size());
  if (physics == Physics::scalar) return Mat::Ones(n, 1);
  const int nmodes = dimension == 2 ? 3 : 6;
  Mat R = Mat::Zero(n, nmodes);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = dof_component[static_cast<std::size_t>(i)];
    const double x = dof_coords[static_cast<std::size_t>(i)][0] - center[0];
    const double y = dof_coords[static_cast<std::size_t>(i)][1] - center[1];
    const double z = dof_coords[static_cast<std::size_t>(i)][2] - center[2];
    R(i, c) = 1.0;
    if (dimension == 2) {
      R(i, 2) = c == 0 ? -y : x;
    } else {
      // rotations about z, x, y
      R(i, 3) = c == 0 ? -y : (c == 1 ? x : 0.0);
      R(i, 4) = c == 1 ? -z : (c == 2 ? y : 0.0);
      R(i, 5) = c == 2 ? -x : (c == 0 ? z : 0.0);
    }
  }
  return R;
}

Mat rigid_body_modes(const SpMat& K, const Mat& candidates) {
  if (candidates.cols() == 0 || K.rows() == 0) return Mat(K.rows(), 0);
  Eigen::HouseholderQR<Mat> qr(candidates);
  const Mat Q = qr.householderQ() * Mat::Identity(candidates.rows(), candidates.cols());
  const Mat KQ = K * Q;
  // Minimize ||K Q c|| over unit c: right singular vectors with small singular values.
  Eigen::JacobiSVD<Mat> svd(KQ, Eigen::ComputeFullV);
  const double bound = 1e-8 * K.norm();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < Q.cols(); ++k) {
    const double sigma = k < svd.singularValues().size() ? svd.singularValues()[k] : 0.0;
    if (sigma <= bound) keep.push_back(k);
  }
  Mat R(K.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) R.col(static_cast<Eigen::Index>(k)) = Q * svd.matrixV().col(keep[k]);
  if (R.cols() > 0) {
    Eigen::HouseholderQR<Mat> qr2(R);
    R = qr2.householderQ() * Mat::Identity(R.rows(), R.cols());
    // Deterministic sign: make the largest entry of each column positive.
    for (Eigen::Index c = 0; c < R.cols(); ++c) {
      Eigen::Index at = 0;
      R.col(c).cwiseAbs().maxCoeff(&at);
      if (R(at, c) < 0.0) R.col(c) = -R.col(c);
    }
  }
  return R;
}

}  // namespace fetilab
