#pragma once

#include <optional>

#include "spellkit/inference.hpp"
#include "spellkit/lerch.hpp"
#include "spellkit/types.hpp"

namespace spellkit {

enum class Method { dm, im };
const char* method_name(Method m);

enum class Provenance { fitted, derived };

/// One variable inside a bundle: always a pmf table, plus the fit (for
/// fitted variables) or closed-form parameters (for derived laws that
/// stay inside the Lerch family, e.g. the geometric wet spells of the
/// direct method).
struct VariableModel {
  Provenance provenance = Provenance::derived;
  std::optional<FittedModel> fit;
  std::optional<SelectionTrace> trace;
  std::optional<LerchParams> derived_params;
  PmfTable table{{1.0}, 0.0};
};

/// The five per-variable distributions produced by one method. DM fits
/// exactly it; IM fits exactly ws and ds; everything else is derived.
struct ModelBundle {
  Method method = Method::dm;
  VariableModel it, ws, ds, wch, dch;

  const VariableModel& operator[](Variable v) const;
  VariableModel& operator[](Variable v);
};

/// Wet spells implied by an inter-arrival law under the renewal
/// hypothesis: geometric with continuation probability p_it(1).
PmfTable dm_derive_ws(const LerchDist& it_model, double tail_eps = 1e-10);

/// p_it(1) for the given inter-arrival law.
double dm_ws_continuation(const LerchDist& it_model);

/// Dry spells implied by an inter-arrival law:
/// p_ds(k) = p_it(k+1) / (1 - p_it(1)).
PmfTable dm_derive_ds(const LerchDist& it_model, double tail_eps = 1e-10);

/// Chain law by k-fold convolution:
/// p_chain(m) = sum_{k=1..m} p_break^(k-1) (1 - p_break) p_inner^{k*}(m),
/// truncated at m_max with the remaining mass recorded as tail. The inner
/// convolution loop runs in parallel; the _serial variant is the
/// reference implementation.
PmfTable chain_pmf(const PmfTable& inner, double p_break, int m_max);
PmfTable chain_pmf_serial(const PmfTable& inner, double p_break, int m_max);

/// chain_pmf with m_max grown adaptively until the chain tail mass drops
/// below tail_eps (or a hard cap is reached; the tail stays honest).
PmfTable chain_pmf_auto(const PmfTable& inner, double p_break,
                        double tail_eps = 1e-9);

/// Closed-form wet-chain pmf under the renewal hypothesis, as a binomial
/// mixture over the number of 1-day holes; an independent check of
/// chain_pmf under the direct method.
double dm_wch_binomial(const LerchDist& it_model, int k);

/// Inter-arrival law recovered from separately fitted spell laws:
/// p_it(1) = (E[ws] - 1)/E[ws]; p_it(k) = p_ds(k-1) (1 - p_it(1)).
PmfTable im_recover_it(const LerchDist& ws_model, const LerchDist& ds_model,
                       double tail_eps = 1e-10);

struct MethodOptions {
  double alpha = 0.05;
  FitOptions fit;
  double tail_eps = 1e-10;        // reported tables
  double chain_tail_eps = 1e-9;   // chain truncation target
};

/// Direct method: select a model for it, derive everything else.
ModelBundle run_dm(const SpellSample& it_sample, const MethodOptions& options = {});

/// Indirect method: select models for ws and ds, recover it, build chains
/// from the two fitted laws.
ModelBundle run_im(const SpellSample& ws_sample, const SpellSample& ds_sample,
                   const MethodOptions& options = {});

}  // namespace spellkit
