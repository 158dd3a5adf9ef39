#include "otmap/transport_model.hpp"

namespace otmap {

TransportModel TransportModel::from_fourier(SemidualFit fit) {
  TransportModel m;
  m.kind = "fourier";
  m.data_dim = fit.potential.ambient_dim();
  m.fourier = std::move(fit);
  return m;
}

TransportModel TransportModel::from_nn(NnFit fit, int data_dim) {
  TransportModel m;
  m.kind = "nn";
  m.data_dim = data_dim;
  m.nn = std::move(fit);
  return m;
}

TransportModel TransportModel::from_plan(TransportPlan plan, Mat X, Mat Y) {
  TransportModel m;
  m.kind = "nnplan";
  m.data_dim = int(X.cols());
  m.plan = PlanModel{std::move(plan), std::move(X), std::move(Y)};
  return m;
}

TransportModel TransportModel::from_linear(LinearOtMap lin, int data_dim) {
  TransportModel m;
  m.kind = "linear";
  m.data_dim = data_dim;
  m.linear = std::move(lin);
  return m;
}

Vec TransportModel::transport(const Vec& x) const {
  if (fourier) return fourier_transport(*fourier, x);
  if (nn) return transport_nn(nn->net, x);
  if (plan) return nn_transport(plan->plan, plan->X, plan->Y, x);
  if (linear) return linear->apply(x);
  throw UsageError("TransportModel: empty model");
}

TransportFn TransportModel::fn() const {
  return [this](const Vec& x) { return transport(x); };
}

}  // namespace otmap
