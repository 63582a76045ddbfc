#include "shilnikov/system.hpp"

namespace shilnikov {

ModelSpec ModelSpec::linear(Dims d, double lambda) {
  ModelSpec s;
  s.dims = d;
  s.lambda.push_back({std::vector<int>(d.manifold(), 0), lambda});
  return s;
}

namespace {

std::vector<PolyTerm> model_terms(const ModelSpec& spec) {
  const Dims& d = spec.dims;
  if (spec.lambda.empty()) throw SpecError("model lambda is empty");
  std::vector<PolyTerm> out;
  for (const auto& lt : spec.lambda) {
    if (static_cast<int>(lt.exp.size()) != d.manifold())
      throw SpecError("lambda term must have 2m exponents");
    for (int i = 0; i < d.k; ++i) {
      PolyTerm t;
      t.exp.assign(d.phase(), 0);
      std::copy(lt.exp.begin(), lt.exp.end(), t.exp.begin());
      t.exp[d.q0() + i] += 1;
      t.exp[d.p0() + i] += 1;
      t.coeff = -lt.coeff;
      out.push_back(t);
    }
  }
  for (const auto& ct : spec.cubic) {
    if (static_cast<int>(ct.exp.size()) != d.fiber())
      throw SpecError("perturbation term must have 2k exponents");
    int qdeg = 0, pdeg = 0;
    for (int i = 0; i < d.k; ++i) {
      qdeg += ct.exp[i];
      pdeg += ct.exp[d.k + i];
    }
    if (qdeg < 1 || pdeg < 1)
      throw SpecError("perturbation monomial must contain both a q and a p factor");
    if (qdeg + pdeg < 3) throw SpecError("perturbation monomial must have degree >= 3");
    PolyTerm t;
    t.exp.assign(d.phase(), 0);
    std::copy(ct.exp.begin(), ct.exp.end(), t.exp.begin() + d.q0());
    t.coeff = ct.coeff;
    out.push_back(t);
  }
  return out;
}

}  // namespace

ModelSystem::ModelSystem(ModelSpec spec)
    : PolynomialSystem(spec.dims, model_terms(spec), "model"), spec_(std::move(spec)) {}

std::shared_ptr<ModelSystem> build_model(const ModelSpec& spec) {
  return std::make_shared<ModelSystem>(spec);
}

}  // namespace shilnikov
