#include "spellkit/methods.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spellkit/errors.hpp"

namespace spellkit {

const char* method_name(Method m) { return m == Method::dm ? "dm" : "im"; }

const VariableModel& ModelBundle::operator[](Variable v) const {
  switch (v) {
    case Variable::it: return it;
    case Variable::ws: return ws;
    case Variable::ds: return ds;
    case Variable::wch: return wch;
    case Variable::dch: return dch;
  }
  throw std::invalid_argument("unknown variable");
}

VariableModel& ModelBundle::operator[](Variable v) {
  return const_cast<VariableModel&>(
      static_cast<const ModelBundle&>(*this)[v]);
}

double dm_ws_continuation(const LerchDist& it_model) {
  const double p1 = it_model.pmf(1);
  if (!(p1 < 1.0 - 1e-12))
    throw std::invalid_argument("dm_ws_continuation: p_it(1) >= 1 (degenerate law)");
  return p1;
}

PmfTable dm_derive_ws(const LerchDist& it_model, double tail_eps) {
  const double p1 = dm_ws_continuation(it_model);
  return LerchDist(LerchParams::geometric(p1)).table(tail_eps);
}

PmfTable dm_derive_ds(const LerchDist& it_model, double tail_eps) {
  const double p1 = dm_ws_continuation(it_model);
  const double scale = 1.0 / (1.0 - p1);
  if (!std::isfinite(scale))
    throw NonConvergenceError("dm_derive_ds: 1 - p_it(1) too small", p1, 0.0);
  // Need the it table out to survival < tail_eps * (1 - p1) so the scaled
  // dry-spell tail lands below tail_eps.
  const PmfTable it_tab =
      it_model.table(std::max(tail_eps * (1.0 - p1), 1e-300));
  std::vector<double> probs;
  probs.reserve(static_cast<std::size_t>(it_tab.max_k()) - 1);
  for (int k = 2; k <= it_tab.max_k(); ++k) probs.push_back(it_tab.at(k) * scale);
  if (probs.empty()) probs.push_back(0.0);
  return PmfTable(std::move(probs), it_tab.tail_mass() * scale);
}

namespace {

PmfTable chain_pmf_impl(const PmfTable& inner, double p_break, int m_max,
                        bool parallel) {
  if (!(p_break >= 0.0 && p_break < 1.0))
    throw std::invalid_argument("chain_pmf: p_break must be in [0, 1)");
  if (m_max < 1) throw std::invalid_argument("chain_pmf: m_max must be >= 1");

  const int k_inner = inner.max_k();
  std::vector<double> chain(static_cast<std::size_t>(m_max), 0.0);

  // k = 1 term: the inner law itself, weighted by the stop probability.
  std::vector<double> conv(static_cast<std::size_t>(m_max), 0.0);
  for (int m = 1; m <= std::min(m_max, k_inner); ++m)
    conv[static_cast<std::size_t>(m) - 1] = inner.at(m);
  double weight = 1.0 - p_break;
  for (int m = 0; m < m_max; ++m)
    chain[static_cast<std::size_t>(m)] = weight * conv[static_cast<std::size_t>(m)];

  // Higher k: iterated convolutions; conv_k(m) = 0 for m < k, so k never
  // needs to exceed m_max, and the geometric weights make the remaining
  // contribution certifiably negligible long before that.
  double weight_rest = p_break;  // total weight of all terms beyond current k
  std::vector<double> next(static_cast<std::size_t>(m_max), 0.0);
  for (int k = 2; k <= m_max && weight_rest > 1e-16; ++k) {
    const int m_lo = k;  // first reachable chain length with k spells
    if (parallel) {
#pragma omp parallel for schedule(static)
      for (int m = m_lo; m <= m_max; ++m) {
        double acc = 0.0;
        const int j_hi = std::min(k_inner, m - (k - 1));
        for (int j = 1; j <= j_hi; ++j)
          acc += inner.at(j) * conv[static_cast<std::size_t>(m - j) - 1];
        next[static_cast<std::size_t>(m) - 1] = acc;
      }
    } else {
      for (int m = m_lo; m <= m_max; ++m) {
        double acc = 0.0;
        const int j_hi = std::min(k_inner, m - (k - 1));
        for (int j = 1; j <= j_hi; ++j)
          acc += inner.at(j) * conv[static_cast<std::size_t>(m - j) - 1];
        next[static_cast<std::size_t>(m) - 1] = acc;
      }
    }
    std::fill(next.begin(), next.begin() + (m_lo - 1), 0.0);
    std::swap(conv, next);
    weight = std::pow(p_break, k - 1) * (1.0 - p_break);
    for (int m = m_lo; m <= m_max; ++m)
      chain[static_cast<std::size_t>(m) - 1] += weight * conv[static_cast<std::size_t>(m) - 1];
    weight_rest *= p_break;
  }

  double mass = 0.0;
  for (double p : chain) mass += p;
  return PmfTable(std::move(chain), std::max(0.0, 1.0 - mass));
}

}  // namespace

PmfTable chain_pmf(const PmfTable& inner, double p_break, int m_max) {
  return chain_pmf_impl(inner, p_break, m_max, true);
}

PmfTable chain_pmf_serial(const PmfTable& inner, double p_break, int m_max) {
  return chain_pmf_impl(inner, p_break, m_max, false);
}

PmfTable chain_pmf_auto(const PmfTable& inner, double p_break, double tail_eps) {
  constexpr int kCap = 1 << 16;
  int m_max = std::min(kCap, std::max(2 * inner.max_k() + 32, 64));
  for (;;) {
    PmfTable t = chain_pmf(inner, p_break, m_max);
    if (t.tail_mass() < tail_eps || m_max >= kCap) return t;
    m_max = std::min(kCap, 2 * m_max);
  }
}

double dm_wch_binomial(const LerchDist& it_model, int k) {
  if (k < 1) throw std::invalid_argument("dm_wch_binomial: k must be >= 1");
  const double p1 = it_model.pmf(1);
  const double p2 = it_model.pmf(2);
  const double head = std::max(0.0, 1.0 - p1 - p2);  // = P(it > 2)
  if (k == 1) return head;
  // sum_j C(k-1, j) p1^(k-1-j) p2^j via the term ratio
  // t_{j+1}/t_j = (k-1-j)/(j+1) * (p2/p1).
  double sum;
  if (p1 > 0.0) {
    double t = std::pow(p1, k - 1);
    sum = t;
    for (int j = 0; j < k - 1; ++j) {
      t *= static_cast<double>(k - 1 - j) / static_cast<double>(j + 1) * (p2 / p1);
      sum += t;
    }
  } else {
    sum = std::pow(p2, k - 1);  // only the j = k-1 term survives
  }
  return head * sum;
}

PmfTable im_recover_it(const LerchDist& ws_model, const LerchDist& ds_model,
                       double tail_eps) {
  const double e_ws = ws_model.mean();
  if (!std::isfinite(e_ws) || e_ws < 1.0)
    throw std::invalid_argument("im_recover_it: E[ws] must be finite and >= 1");
  const double p1 = (e_ws - 1.0) / e_ws;

  const PmfTable ds_tab = ds_model.table(tail_eps);
  std::vector<double> probs(static_cast<std::size_t>(ds_tab.max_k()) + 1);
  probs[0] = p1;
  for (int k = 1; k <= ds_tab.max_k(); ++k)
    probs[static_cast<std::size_t>(k)] = (1.0 - p1) * ds_tab.at(k);
  return PmfTable(std::move(probs), (1.0 - p1) * ds_tab.tail_mass());
}

namespace {

// Inner tables feeding the chain convolution carry a tighter tail so the
// lost inner mass stays well below the chain tail target.
constexpr double kChainInnerEps = 1e-12;

}  // namespace

ModelBundle run_dm(const SpellSample& it_sample, const MethodOptions& opt) {
  if (it_sample.variable != Variable::it)
    throw std::invalid_argument("run_dm: expected an inter-arrival sample");

  ModelBundle b;
  b.method = Method::dm;

  SelectionResult sel = select_model(it_sample, opt.alpha, opt.fit);
  const LerchDist it_dist(sel.model.params);

  b.it.provenance = Provenance::fitted;
  b.it.fit = sel.model;
  b.it.trace = std::move(sel.trace);
  b.it.table = it_dist.table(opt.tail_eps);

  const double p1 = dm_ws_continuation(it_dist);
  b.ws.provenance = Provenance::derived;
  b.ws.derived_params = LerchParams::geometric(p1);
  b.ws.table = dm_derive_ws(it_dist, opt.tail_eps);

  b.ds.provenance = Provenance::derived;
  b.ds.table = dm_derive_ds(it_dist, opt.tail_eps);

  const double p_ds1 = it_dist.pmf(2) / (1.0 - p1);
  const double p_ws1 = 1.0 - p1;
  const PmfTable ws_fine = dm_derive_ws(it_dist, kChainInnerEps);
  const PmfTable ds_fine = dm_derive_ds(it_dist, kChainInnerEps);

  b.wch.provenance = Provenance::derived;
  b.wch.table = chain_pmf_auto(ws_fine, p_ds1, opt.chain_tail_eps);

  b.dch.provenance = Provenance::derived;
  b.dch.table = chain_pmf_auto(ds_fine, p_ws1, opt.chain_tail_eps);

  return b;
}

ModelBundle run_im(const SpellSample& ws_sample, const SpellSample& ds_sample,
                   const MethodOptions& opt) {
  if (ws_sample.variable != Variable::ws || ds_sample.variable != Variable::ds)
    throw std::invalid_argument("run_im: expected ws and ds samples");

  ModelBundle b;
  b.method = Method::im;

  SelectionResult sel_ws = select_model(ws_sample, opt.alpha, opt.fit);
  SelectionResult sel_ds = select_model(ds_sample, opt.alpha, opt.fit);
  const LerchDist ws_dist(sel_ws.model.params);
  const LerchDist ds_dist(sel_ds.model.params);

  b.ws.provenance = Provenance::fitted;
  b.ws.fit = sel_ws.model;
  b.ws.trace = std::move(sel_ws.trace);
  b.ws.table = ws_dist.table(opt.tail_eps);

  b.ds.provenance = Provenance::fitted;
  b.ds.fit = sel_ds.model;
  b.ds.trace = std::move(sel_ds.trace);
  b.ds.table = ds_dist.table(opt.tail_eps);

  b.it.provenance = Provenance::derived;
  b.it.table = im_recover_it(ws_dist, ds_dist, opt.tail_eps);

  b.wch.provenance = Provenance::derived;
  b.wch.table = chain_pmf_auto(ws_dist.table(kChainInnerEps), ds_dist.pmf(1),
                               opt.chain_tail_eps);

  b.dch.provenance = Provenance::derived;
  b.dch.table = chain_pmf_auto(ds_dist.table(kChainInnerEps), ws_dist.pmf(1),
                               opt.chain_tail_eps);

  return b;
}

}  // namespace spellkit
