#include "tmm/adam.hpp"

#include <cmath>

#include "tmm/error.hpp"

namespace tmm {

AdamState AdamState::for_params(std::span<Tensor* const> params, const AdamHyper& hyper) {
  AdamState state;
  state.hyper = hyper;
  for (const Tensor* p : params) {
    state.first_moment.emplace_back(p->shape());
    state.second_moment.emplace_back(p->shape());
  }
  return state;
}

void adam_step(std::span<Tensor* const> params, AdamState& state) {
  if (params.size() != state.first_moment.size() || params.size() != state.second_moment.size()) {
    throw Error(ErrorKind::ShapeMismatch, "optimizer state tracks " + std::to_string(state.first_moment.size()) +
                                              " arrays, got " + std::to_string(params.size()));
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Tensor& p = *params[k];
    if (state.first_moment[k].shape() != p.shape() || state.second_moment[k].shape() != p.shape()) {
      throw Error(ErrorKind::ShapeMismatch, "moment shape " + shape_string(state.first_moment[k].shape()) +
                                                " vs parameter " + shape_string(p.shape()));
    }
    if (!p.has_grad()) {
      throw Error(ErrorKind::ShapeMismatch, "parameter " + std::to_string(k) + " has no gradient");
    }
    for (double g : p.grad()) {
      if (!std::isfinite(g)) {
        throw Error(ErrorKind::NonFiniteGradient, "gradient of parameter " + std::to_string(k) + " is not finite");
      }
    }
  }

  const AdamHyper& h = state.hyper;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(h.beta1, t);
  const double correction2 = 1.0 - std::pow(h.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    auto g = p.grad();
    auto m = state.first_moment[k].values();
    auto v = state.second_moment[k].values();
    auto theta = p.values();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
      v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      theta[i] -= h.learning_rate * m_hat / (std::sqrt(v_hat) + h.epsilon);
    }
  }
}

double clip_grad_norm(std::span<Tensor* const> params, double max_norm) {
  double squared = 0.0;
  for (Tensor* p : params) {
    for (double g : p->grad()) squared += g * g;
  }
  const double norm = std::sqrt(squared);
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (Tensor* p : params) {
      for (double& g : p->grad()) g *= factor;
    }
  }
  return norm;
}

}  // namespace tmm
