#include "qeff/nelder_mead.hpp"

#include "qeff/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qeff {

namespace {
struct BudgetExhausted {};
}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& steps,
                             const NelderMeadOptions& opts) {
  const Eigen::Index n = x0.size();
  if (n < 1) throw InvalidInput("nelder_mead needs at least one parameter");
  if (steps.size() != n) throw InvalidInput("nelder_mead step vector size mismatch");
  if ((steps.array() == 0.0).any()) throw InvalidInput("nelder_mead steps must be nonzero");
  if (opts.max_evals < static_cast<int>(n) + 2) {
    throw InvalidInput("nelder_mead eval budget too small for the initial simplex");
  }

  NelderMeadResult res;
  const auto eval = [&](const Eigen::VectorXd& x) {
    if (res.evaluations >= opts.max_evals) throw BudgetExhausted{};
    const double fx = f(x);
    if (std::isnan(fx)) throw InvalidInput("nelder_mead objective returned NaN");
    ++res.evaluations;
    res.history.push_back({x, fx});
    return fx;
  };

  std::vector<Eigen::VectorXd> simplex(n + 1, x0);
  std::vector<double> fval(n + 1);
  std::vector<std::size_t> order(n + 1);
  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  const auto best_of_simplex = [&]() {
    const std::size_t b = static_cast<std::size_t>(
        std::min_element(fval.begin(), fval.end()) - fval.begin());
    res.x = simplex[b];
    res.fx = fval[b];
  };

  try {
    fval[0] = eval(simplex[0]);
    for (Eigen::Index i = 0; i < n; ++i) {
      simplex[i + 1](i) += steps(i);
      fval[i + 1] = eval(simplex[i + 1]);
    }

    while (true) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return fval[a] < fval[b]; });
      const std::size_t best = order.front();
      const std::size_t worst = order.back();
      const std::size_t second_worst = order[n - 1];

      if (fval[worst] - fval[best] < opts.spread_tol) {
        res.converged = true;
        res.x = simplex[best];
        res.fx = fval[best];
        return res;
      }

      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
      for (std::size_t i = 0; i <= static_cast<std::size_t>(n); ++i) {
        if (i != worst) centroid += simplex[i];
      }
      centroid /= static_cast<double>(n);

      const Eigen::VectorXd reflected = centroid + kReflect * (centroid - simplex[worst]);
      const double f_reflect = eval(reflected);

      if (f_reflect < fval[best]) {
        const Eigen::VectorXd expanded = centroid + kExpand * (reflected - centroid);
        const double f_expand = eval(expanded);
        if (f_expand < f_reflect) {
          simplex[worst] = expanded;
          fval[worst] = f_expand;
        } else {
          simplex[worst] = reflected;
          fval[worst] = f_reflect;
        }
        continue;
      }
      if (f_reflect < fval[second_worst]) {
        simplex[worst] = reflected;
        fval[worst] = f_reflect;
        continue;
      }

      bool contracted_ok = false;
      if (f_reflect < fval[worst]) {
        const Eigen::VectorXd contracted = centroid + kContract * (reflected - centroid);
        const double f_contract = eval(contracted);
        if (f_contract <= f_reflect) {
          simplex[worst] = contracted;
          fval[worst] = f_contract;
          contracted_ok = true;
        }
      } else {
        const Eigen::VectorXd contracted = centroid + kContract * (simplex[worst] - centroid);
        const double f_contract = eval(contracted);
        if (f_contract < fval[worst]) {
          simplex[worst] = contracted;
          fval[worst] = f_contract;
          contracted_ok = true;
        }
      }
      if (contracted_ok) continue;

      for (std::size_t i = 0; i <= static_cast<std::size_t>(n); ++i) {
        if (i == best) continue;
        simplex[i] = simplex[best] + kShrink * (simplex[i] - simplex[best]);
        fval[i] = eval(simplex[i]);
      }
    }
  } catch (const BudgetExhausted&) {
    best_of_simplex();
    res.converged = false;
    return res;
  }
}

}  // namespace qeff
