#pragma once

#include <optional>
#include <string>

#include "otmap/assignment.hpp"
#include "otmap/experiments.hpp"
#include "otmap/mlp.hpp"
#include "otmap/semidual.hpp"

namespace otmap {

// A fitted transport map of any estimator family, as saved/loaded by the CLI.
struct TransportModel {
  std::string kind;  // "fourier" | "nn" | "nnplan" | "linear"
  int data_dim = 0;  // column count of the fitting data

  std::optional<SemidualFit> fourier;
  std::optional<NnFit> nn;
  struct PlanModel {
    TransportPlan plan;
    Mat X, Y;
  };
  std::optional<PlanModel> plan;
  std::optional<LinearOtMap> linear;

  static TransportModel from_fourier(SemidualFit fit);
  static TransportModel from_nn(NnFit fit, int data_dim);
  static TransportModel from_plan(TransportPlan plan, Mat X, Mat Y);
  static TransportModel from_linear(LinearOtMap lin, int data_dim);

  Vec transport(const Vec& x) const;
  TransportFn fn() const;
};

}  // namespace otmap
