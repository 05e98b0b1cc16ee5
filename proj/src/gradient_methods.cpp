#include <algorithm>
#include <cmath>
#include <string>

#include "inspire/errors.hpp"
#include "inspire/optimizers.hpp"
#include "run_recorder.hpp"

namespace inspire {

std::string to_string(GradientMethod m) {
  switch (m) {
    case GradientMethod::adam: return "adam";
    case GradientMethod::nesterov: return "nesterov";
    case GradientMethod::lbfgs: return "lbfgs";
  }
  return "unknown";
}

void GradientMethodConfig::validate() const {
  if (!(base_step > 0.0)) throw ValidationError("base_step must be positive");
  if (!(decay_factor > 0.0)) throw ValidationError("decay_factor must be positive");
  if (lbfgs_memory == 0) throw ValidationError("lbfgs_memory must be positive");
  if (gradient_surcharge < 1) throw ValidationError("gradient_surcharge must be at least 1");
  double prev = 0.0;
  for (double f : decay_points) {
    if (!(f > prev) || !(f < 1.0)) throw ValidationError("decay points must be strictly increasing in (0, 1)");
    prev = f;
  }
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

bool frozen_at(const std::vector<bool>& frozen, std::size_t i) { return !frozen.empty() && frozen[i]; }

// Standard L-BFGS two-loop recursion, H0 = gamma * I with gamma = s^T y / y^T y
// from the newest pair.
Vector lbfgs_direction(const std::deque<CurvaturePair>& history, std::span<const double> grad) {
  Vector q(grad.begin(), grad.end());
  std::vector<double> alpha(history.size());
  for (std::size_t k = history.size(); k-- > 0;) {
    const auto& p = history[k];
    alpha[k] = p.rho * dot(p.s, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * p.y[i];
  }
  double gamma = 1.0;
  if (!history.empty()) {
    const auto& last = history.back();
    gamma = dot(last.s, last.y) / dot(last.y, last.y);
  }
  for (double& v : q) v *= gamma;
  for (std::size_t k = 0; k < history.size(); ++k) {
    const auto& p = history[k];
    const double beta = p.rho * dot(p.y, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += (alpha[k] - beta) * p.s[i];
  }
  return q;
}

}  // namespace

GradientUpdate gradient_update(const GradientMethodConfig& cfg, const GradientState& state, std::span<const double> z,
                               std::span<const double> grad, double step, const std::vector<bool>& frozen) {
  if (z.size() != grad.size()) throw DimensionError("gradient_update: z and grad sizes differ");
  if (!frozen.empty() && frozen.size() != z.size()) throw DimensionError("gradient_update: mask size mismatch");
  Vector g(grad.begin(), grad.end());
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) throw NumericError("non-finite gradient at coordinate " + std::to_string(i));
    if (frozen_at(frozen, i)) g[i] = 0.0;
  }
  const std::size_t n = z.size();
  GradientUpdate out{Vector(z.begin(), z.end()), state};
  GradientState& st = out.state;
  Vector direction(n, 0.0);

  switch (cfg.method) {
    case GradientMethod::adam: {
      if (st.first_moment.size() != n) {
        st.first_moment.assign(n, 0.0);
        st.second_moment.assign(n, 0.0);
        st.adam_steps = 0;
      }
      ++st.adam_steps;
      const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(st.adam_steps));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(st.adam_steps));
      for (std::size_t i = 0; i < n; ++i) {
        st.first_moment[i] = b1 * st.first_moment[i] + (1.0 - b1) * g[i];
        st.second_moment[i] = b2 * st.second_moment[i] + (1.0 - b2) * g[i] * g[i];
        const double m_hat = st.first_moment[i] / c1;
        const double v_hat = st.second_moment[i] / c2;
        direction[i] = m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
      }
      break;
    }
    case GradientMethod::nesterov: {
      if (st.velocity.size() != n) st.velocity.assign(n, 0.0);
      const double mu = cfg.nesterov_momentum;
      for (std::size_t i = 0; i < n; ++i) {
        st.velocity[i] = mu * st.velocity[i] + g[i];
        direction[i] = g[i] + mu * st.velocity[i];
      }
      break;
    }
    case GradientMethod::lbfgs: {
      if (st.previous_z.size() == n) {
        CurvaturePair p;
        p.s.resize(n);
        p.y.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          p.s[i] = z[i] - st.previous_z[i];
          p.y[i] = g[i] - st.previous_grad[i];
        }
        const double sy = dot(p.s, p.y);
        if (sy > cfg.lbfgs_curvature_eps) {
          p.rho = 1.0 / sy;
          st.history.push_back(std::move(p));
          while (st.history.size() > cfg.lbfgs_memory) st.history.pop_front();
        }
      }
      direction = lbfgs_direction(st.history, g);
      st.previous_z.assign(z.begin(), z.end());
      st.previous_grad = g;
      break;
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    if (!frozen_at(frozen, i)) out.z[i] -= step * direction[i];
  return out;
}

std::vector<std::int64_t> decay_iterations(const GradientMethodConfig& cfg, std::int64_t iterations) {
  std::vector<std::int64_t> out;
  for (double f : cfg.decay_points) {
    // Small slack so that e.g. (1/3) * 90 lands on 30 and not 29.
    const auto k = static_cast<std::int64_t>(std::floor(f * static_cast<double>(iterations) + 1e-9));
    if (k > 0 && k < iterations) out.push_back(k);
  }
  return out;
}

RunTrace run_gradient_method(const Objective& problem, const GradientMethodConfig& cfg, std::int64_t budget,
                             std::uint64_t seed, const IterationObserver& observer) {
  cfg.validate();
  if (!problem.differentiable()) throw CapabilityError(to_string(cfg.method) + ": objective is not differentiable");
  const std::int64_t iterations = budget / cfg.gradient_surcharge;
  if (iterations < 1)
    throw ValidationError(to_string(cfg.method) + ": budget " + std::to_string(budget) +
                          " is below one gradient iteration");

  detail::RunRecorder rec(problem, budget, cfg.gradient_surcharge, seed, to_string(cfg.method));
  Rng rng(seed);
  Vector z = detail::sample_free_normal(problem, rng);
  Vector grad(z.size());
  GradientState state;
  double step = cfg.base_step;
  const auto decays = decay_iterations(cfg, iterations);

  for (std::int64_t t = 0; t < iterations; ++t) {
    if (std::find(decays.begin(), decays.end(), t) != decays.end()) {
      step /= cfg.decay_factor;
      z = rec.best_x();
      state = GradientState{};
    }
    const double loss = rec.evaluate_with_gradient(z, grad);
    if (observer) observer(IterationEvent{t, step, z, loss});
    if (!std::isfinite(loss)) throw NumericError(to_string(cfg.method) + ": non-finite loss at iteration " + std::to_string(t));
    auto next = gradient_update(cfg, state, z, grad, step, problem.frozen_mask());
    z = std::move(next.z);
    state = std::move(next.state);
  }
  return rec.finish();
}

}  // namespace inspire
