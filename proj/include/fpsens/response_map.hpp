#pragma once

// What the estimators need from a linear system: component responses
// r_{k,i}(x) = a_{k,i}·x, their parameter derivatives b_{p,k,i}·x and the
// norms ‖a_{k,i}‖. Two implementations: ExplicitResponseMap (dynamics, in
// etdm.hpp) and HyperplaneMap below (fixed hyperplanes, one time step).

#include <concepts>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fpsens {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

template <class M>
concept LinearResponseMap = requires(const M& m, typename M::Workspace& ws, const VectorXd& x, Index j) {
  { m.observer_count() } -> std::convertible_to<Index>;
  { m.step_count() } -> std::convertible_to<Index>;
  { m.dim() } -> std::convertible_to<Index>;
  { m.parameter_count() } -> std::convertible_to<Index>;
  { m.parameter_name(j) } -> std::convertible_to<std::string>;
  { m.norms() } -> std::convertible_to<const MatrixXd&>;
  { m.coefficient_vector(j, j) } -> std::convertible_to<VectorXd>;
  { m.response(j, j, x) } -> std::convertible_to<double>;
  { m.make_workspace() } -> std::same_as<typename M::Workspace>;
  m.project(x, ws);
  { ws.responses } -> std::convertible_to<const MatrixXd&>;
  { m.sensitivity_dot(ws, j, j, j) } -> std::convertible_to<double>;
};

/// m fixed hyperplanes in d dimensions: observer k has the single response
/// a_k·x; parameter p contributes b_{p,k}·x.
class HyperplaneMap {
 public:
  struct Workspace {
    MatrixXd responses;  // m × 1
    VectorXd x;
  };

  explicit HyperplaneMap(MatrixXd a, std::vector<std::string> names = {},
                         std::vector<MatrixXd> b = {})
      : a_(std::move(a)), names_(std::move(names)), b_(std::move(b)) {
    if (a_.rows() < 1 || a_.cols() < 1) throw std::invalid_argument("hyperplane map: empty coefficient matrix");
    if (names_.size() != b_.size())
      throw std::invalid_argument("hyperplane map: parameter names and derivatives differ in count");
    for (const auto& bp : b_)
      if (bp.rows() != a_.rows() || bp.cols() != a_.cols())
        throw std::invalid_argument("hyperplane map: derivative shape must match coefficients");
    norms_ = a_.rowwise().norm();
  }

  Index observer_count() const { return a_.rows(); }
  Index step_count() const { return 1; }
  Index dim() const { return a_.cols(); }
  Index parameter_count() const { return static_cast<Index>(names_.size()); }
  const std::string& parameter_name(Index p) const { return names_[p]; }
  const MatrixXd& norms() const { return norms_; }
  const MatrixXd& coefficients() const { return a_; }

  VectorXd coefficient_vector(Index k, Index) const { return a_.row(k).transpose(); }
  double response(Index k, Index, const VectorXd& x) const { return a_.row(k).dot(x); }

  Workspace make_workspace() const { return {MatrixXd(a_.rows(), 1), VectorXd(a_.cols())}; }

  void project(const VectorXd& x, Workspace& ws) const {
    if (x.size() != dim()) throw std::invalid_argument("hyperplane map: dimension mismatch");
    ws.x = x;
    ws.responses.noalias() = a_ * x;
  }

  double sensitivity_dot(const Workspace& ws, Index p, Index k, Index) const {
    return b_[p].row(k).dot(ws.x);
  }

 private:
  MatrixXd a_;
  std::vector<std::string> names_;
  std::vector<MatrixXd> b_;
  MatrixXd norms_;
};

static_assert(LinearResponseMap<HyperplaneMap>);

}  // namespace fpsens
