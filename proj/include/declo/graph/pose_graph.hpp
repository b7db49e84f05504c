#pragma once

#include <fstream>
#include <queue>
#include <string>
#include <vector>

#include "declo/graph/twist.hpp"

namespace declo {

struct PoseGraphEdge {
  int from = 0;
  int to = 0;
  RigidTransform measurement;  // expected pose_from^-1 * pose_to
  Mat6 information = Mat6::Identity();
};

struct OptimizeResult {
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;                  // accepted LM steps
  std::vector<double> accepted_costs;  // initial cost, then after each step
};

/// Pose graph over absolute poses with relative-transform constraints.
/// Node 0 is the gauge and never moves.
class PoseGraph {
 public:
  explicit PoseGraph(const RigidTransform& initial = RigidTransform::identity()) {
    nodes_.push_back(initial);
  }

  int node_count() const { return static_cast<int>(nodes_.size()); }
  const RigidTransform& pose(int i) const { return nodes_.at(i); }
  const std::vector<RigidTransform>& poses() const { return nodes_; }
  const std::vector<PoseGraphEdge>& edges() const { return edges_; }

  /// Extends the chain: creates node `frame` at pose(frame-1) * measurement.
  void add_sequential_edge(int frame, const RigidTransform& measurement,
                           const Mat6& information = Mat6::Identity()) {
    if (frame < node_count()) throw std::runtime_error("duplicate frame");
    if (frame != node_count()) throw std::runtime_error("missing predecessor node");
    check_information(information);
    nodes_.push_back(compose(nodes_[frame - 1], measurement));
    edges_.push_back(PoseGraphEdge{frame - 1, frame, measurement, information});
  }

  /// Constraint between non-adjacent existing nodes; poses are untouched
  /// until optimize runs.
  void add_skip_edge(int from, int to, const RigidTransform& measurement,
                     const Mat6& information = Mat6::Identity()) {
    if (from < 0 || from >= node_count() || to < 0 || to >= node_count())
      throw std::runtime_error("missing node");
    if (to - from < 2) throw std::invalid_argument("skip edge must span >= 2 frames");
    check_information(information);
    edges_.push_back(PoseGraphEdge{from, to, measurement, information});
  }

  /// Constraint violation in twist coordinates; zero iff the relative pose
  /// equals the measurement.
  Vec6 edge_residual(const PoseGraphEdge& edge) const {
    return residual(edge, nodes_);
  }

  double cost() const { return cost_of(nodes_); }

  /// Levenberg-Marquardt over all poses but node 0. Numeric central
  /// Jacobians on the twist parameterization; damping scales diag(H),
  /// growing tenfold on a rejected step and shrinking tenfold on an
  /// accepted one.
  OptimizeResult optimize(int max_iter, double tol) {
    require_connected();

    OptimizeResult result;
    double current = cost_of(nodes_);
    result.initial_cost = current;
    result.accepted_costs.push_back(current);
    if (node_count() <= 1 || edges_.empty() || current < 1e-24) {
      result.final_cost = current;
      return result;
    }

    const int dims = 6 * (node_count() - 1);
    double lambda = 1e-4;

    for (int iter = 0; iter < max_iter; ++iter) {
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dims, dims);
      Eigen::VectorXd b = Eigen::VectorXd::Zero(dims);
      accumulate_normal_equations(h, b);

      bool accepted = false;
      std::vector<RigidTransform> candidate;
      double candidate_cost = current;
      while (true) {
        Eigen::MatrixXd damped = h;
        damped.diagonal() += lambda * h.diagonal();
        const Eigen::VectorXd delta = damped.ldlt().solve(-b);
        if (!delta.allFinite()) {
          lambda *= 10.0;
          if (lambda > 1e8) throw std::runtime_error("optimization stalled");
          continue;
        }
        candidate = apply_delta(delta);
        candidate_cost = cost_of(candidate);
        if (candidate_cost < current) {
          accepted = true;
          lambda /= 10.0;
          break;
        }
        lambda *= 10.0;
        if (lambda > 1e8) break;  // no descent direction left
      }
      if (!accepted) break;

      nodes_ = std::move(candidate);
      ++result.iterations;
      result.accepted_costs.push_back(candidate_cost);
      const double decrease = current - candidate_cost;
      current = candidate_cost;
      if (decrease < tol * std::max(current + decrease, 1e-300)) break;
    }
    result.final_cost = current;
    return result;
  }

 private:
  static void check_information(const Mat6& info) {
    if ((info - info.transpose()).cwiseAbs().maxCoeff() > 1e-9)
      throw std::invalid_argument("information matrix not symmetric");
    Eigen::LLT<Mat6> llt(info);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("information matrix not positive definite");
  }

  static Vec6 residual(const PoseGraphEdge& edge,
                       const std::vector<RigidTransform>& nodes) {
    const RigidTransform rel =
        compose(nodes[edge.from].inverse(), nodes[edge.to]);
    return Twist6::from_transform(compose(edge.measurement.inverse(), rel)).vector();
  }

  double cost_of(const std::vector<RigidTransform>& nodes) const {
    double sum = 0.0;
    for (const PoseGraphEdge& e : edges_) {
      const Vec6 r = residual(e, nodes);
      sum += r.dot(e.information * r);
    }
    return sum;
  }

  std::vector<RigidTransform> apply_delta(const Eigen::VectorXd& delta) const {
    std::vector<RigidTransform> out = nodes_;
    for (int i = 1; i < node_count(); ++i) {
      const Vec6 d = delta.segment<6>(6 * (i - 1));
      out[i] = compose(out[i], Twist6::from_vector(d).to_transform());
    }
    return out;
  }

  // Central-difference Jacobian of one edge residual w.r.t. one endpoint.
  Eigen::Matrix<double, 6, 6> edge_jacobian(const PoseGraphEdge& edge,
                                            int node) const {
    constexpr double kStep = 1e-6;
    Eigen::Matrix<double, 6, 6> jac;
    std::vector<RigidTransform> work = nodes_;
    const RigidTransform saved = work[node];
    for (int j = 0; j < 6; ++j) {
      Vec6 d = Vec6::Zero();
      d[j] = kStep;
      work[node] = compose(saved, Twist6::from_vector(d).to_transform());
      const Vec6 plus = residual(edge, work);
      d[j] = -kStep;
      work[node] = compose(saved, Twist6::from_vector(d).to_transform());
      const Vec6 minus = residual(edge, work);
      work[node] = saved;
      jac.col(j) = (plus - minus) / (2.0 * kStep);
    }
    return jac;
  }

  void accumulate_normal_equations(Eigen::MatrixXd& h, Eigen::VectorXd& b) const {
    for (const PoseGraphEdge& e : edges_) {
      const Vec6 r = residual(e, nodes_);
      const int bf = 6 * (e.from - 1);
      const int bt = 6 * (e.to - 1);
      Eigen::Matrix<double, 6, 6> jf, jt;
      if (e.from > 0) jf = edge_jacobian(e, e.from);
      if (e.to > 0) jt = edge_jacobian(e, e.to);

      if (e.from > 0) {
        h.block<6, 6>(bf, bf) += jf.transpose() * e.information * jf;
        b.segment<6>(bf) += jf.transpose() * e.information * r;
      }
      if (e.to > 0) {
        h.block<6, 6>(bt, bt) += jt.transpose() * e.information * jt;
        b.segment<6>(bt) += jt.transpose() * e.information * r;
      }
      if (e.from > 0 && e.to > 0) {
        const Eigen::Matrix<double, 6, 6> cross = jf.transpose() * e.information * jt;
        h.block<6, 6>(bf, bt) += cross;
        h.block<6, 6>(bt, bf) += cross.transpose();
      }
    }
  }

  void require_connected() const {
    std::vector<char> seen(node_count(), 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    while (!frontier.empty()) {
      const int n = frontier.front();
      frontier.pop();
      for (const PoseGraphEdge& e : edges_) {
        const int other = e.from == n ? e.to : (e.to == n ? e.from : -1);
        if (other >= 0 && !seen[other]) {
          seen[other] = 1;
          frontier.push(other);
        }
      }
    }
    for (char s : seen)
      if (!s) throw std::invalid_argument("graph not connected to node 0");
  }

  std::vector<RigidTransform> nodes_;
  std::vector<PoseGraphEdge> edges_;
};

/// Plain-text dump: one `EDGE from to tx ty tz rx ry rz` line per edge,
/// followed by the 21 upper-triangular information entries.
inline void write_graph(const PoseGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write graph file: " + path);
  char buf[32];
  for (const PoseGraphEdge& e : g.edges()) {
    out << "EDGE " << e.from << ' ' << e.to;
    const Twist6 t = Twist6::from_transform(e.measurement);
    const double meas[6] = {t.translation.x(), t.translation.y(), t.translation.z(),
                            t.rotation.x(), t.rotation.y(), t.rotation.z()};
    for (double v : meas) {
      std::snprintf(buf, sizeof(buf), "%.12g", v);
      out << ' ' << buf;
    }
    for (int i = 0; i < 6; ++i)
      for (int j = i; j < 6; ++j) {
        std::snprintf(buf, sizeof(buf), "%.12g", e.information(i, j));
        out << ' ' << buf;
      }
    out << '\n';
  }
}

}  // namespace declo
