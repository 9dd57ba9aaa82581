#include "stinla/likelihood.hpp"

#include <cmath>

namespace stinla {

void CountData::validate() const {
  if (y.size() != expected.size()) throw InvalidData("y and E length mismatch");
  if (!obs.empty() && Index(obs.size()) != y.size()) throw InvalidData("obs index length mismatch");
  for (Index k = 0; k < y.size(); ++k) {
    if (!(y(k) >= 0) || y(k) != std::floor(y(k))) throw InvalidData("counts must be nonnegative integers");
    if (!(expected(k) > 0)) throw InvalidData("expected counts must be positive");
  }
}

LikelihoodTerms poisson_terms(const Vector& eta, const CountData& data) {
  if (eta.size() != data.y.size()) throw InvalidData("eta length does not match data");
  LikelihoodTerms out;
  out.grad.resize(eta.size());
  out.neg_hess_diag.resize(eta.size());
  double loglik = 0.0;
  for (Index k = 0; k < eta.size(); ++k) {
    if (eta(k) > 700.0)
      throw NumericalFailure("poisson_terms: exp overflow at index " + std::to_string(k) +
                             " (eta = " + std::to_string(eta(k)) + ")");
    const double mean = data.expected(k) * std::exp(eta(k));
    loglik += data.y(k) * eta(k) - mean - std::lgamma(data.y(k) + 1.0);
    out.grad(k) = data.y(k) - mean;
    out.neg_hess_diag(k) = mean;
  }
  if (!std::isfinite(loglik)) throw NumericalFailure("poisson_terms: non-finite log-likelihood");
  out.loglik = loglik;
  return out;
}

}  // namespace stinla
