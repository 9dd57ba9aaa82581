#pragma once

#include <vector>

#include "stinla/model.hpp"

namespace stinla {

/// Observed counts with expected-count offsets E, so y_k ~ Poisson(E_k e^eta_k).
struct CountData {
  Vector y;
  Vector expected;
  std::vector<ObsIndex> obs;

  void validate() const;
  Index size() const { return y.size(); }
};

struct LikelihoodTerms {
  double loglik = 0.0;
  Vector grad;           // d log pi(y|eta) / d eta
  Vector neg_hess_diag;  // -d^2 log pi(y|eta) / d eta^2 (diagonal likelihoods)
};

/// A likelihood enters the engine only through this triple, evaluated at a
/// linear predictor. Keeps the door open for a binomial variant.
class Likelihood {
 public:
  virtual ~Likelihood() = default;
  virtual LikelihoodTerms terms(const Vector& eta) const = 0;
  virtual Index size() const = 0;
};

LikelihoodTerms poisson_terms(const Vector& eta, const CountData& data);

class PoissonLikelihood final : public Likelihood {
 public:
  explicit PoissonLikelihood(CountData data) : data_(std::move(data)) { data_.validate(); }
  LikelihoodTerms terms(const Vector& eta) const override { return poisson_terms(eta, data_); }
  Index size() const override { return data_.size(); }
  const CountData& data() const { return data_; }

 private:
  CountData data_;
};

}  // namespace stinla
