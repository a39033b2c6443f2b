#include "ionctx/report.hpp"

#include <cstdio>
#include <sstream>

#include "ionctx/errors.hpp"

namespace ionctx {

std::string context_label(int context) {
  const auto& pair = kContexts.at(static_cast<std::size_t>(context));
  return std::to_string(pair.i) + "-" + std::to_string(pair.j);
}

ContextualityReport build_report(const ContextBatches& batches, const ReportOptions& options) {
  ContextualityReport r;
  r.models = options.models;
  for (std::size_t c = 0; c < 4; ++c) r.counts[c] = batches.by_context[c].size();
  r.correlators = correlators(batches);
  r.marginals = MarginalTable::from_batches(batches);
  r.c = chsh_statistic(r.correlators);
  const auto& m = r.models;
  r.significance_no_epsilon = violation_significance(r.c.value, r.c.sem, 0.0, m);

  const auto mnc = epsilon_mnc(r.marginals);
  r.mnc = EpsilonEntry{mnc.value, mnc.sem, violation_significance(r.c.value, r.c.sem, mnc.value, m)};
  if (options.bootstrap_resamples > 0) {
    r.mnc_bootstrap = epsilon_mnc_bootstrap(batches, options.bootstrap_resamples, options.bootstrap_seed);
  }

  if (options.mean_repeatability) {
    const double rbar = *options.mean_repeatability;
    r.mean_repeatability = rbar;
    const double eps_f = epsilon_fraction(rbar * rbar, m);
    r.fraction = EpsilonEntry{eps_f, std::nullopt, violation_significance(r.c.value, r.c.sem, eps_f, m)};
    const double eps_s = epsilon_sequential(rbar, m);
    r.sequential = EpsilonEntry{eps_s, std::nullopt, violation_significance(r.c.value, r.c.sem, eps_s, m)};
  }
  return r;
}

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string pm(const CorrelatorEstimate& e) { return fmt("%+.4f", e.mean) + " +/- " + fmt("%.4f", e.sem); }

void model_line(std::ostringstream& out, const char* name, const std::optional<EpsilonEntry>& entry,
                double bound) {
  char buf[160];
  if (!entry) {
    std::snprintf(buf, sizeof buf, "  %-26s %-18s %-8s %s\n", name, "not computed", "-", "-");
  } else {
    std::string eps = fmt("%.4f", entry->epsilon);
    if (entry->sem) eps += " +/- " + fmt("%.4f", *entry->sem);
    std::snprintf(buf, sizeof buf, "  %-26s %-18s %-8.4f %.1f sigma\n", name, eps.c_str(), bound + entry->epsilon,
                  entry->significance);
  }
  out << buf;
}

nlohmann::json estimate_json(const CorrelatorEstimate& e) {
  return {{"mean", e.mean}, {"sem", e.sem}, {"n", e.n}};
}

nlohmann::json entry_json(const std::optional<EpsilonEntry>& entry) {
  if (!entry) return {{"status", "not computed"}};
  nlohmann::json j{{"status", "computed"}, {"epsilon", entry->epsilon}, {"significance", entry->significance}};
  if (entry->sem) j["sem"] = *entry->sem;
  return j;
}

}  // namespace

std::string format_text(const ContextualityReport& r) {
  std::ostringstream out;
  out << "Contextuality report\n\n";
  out << "  context  trials   <OiOj>              <Oi>^(j)            <Oj>^(i)\n";
  for (int c = 0; c < 4; ++c) {
    const auto& pair = kContexts[static_cast<std::size_t>(c)];
    char head[48];
    std::snprintf(head, sizeof head, "  {%d,%d}    %-8zu ", pair.i, pair.j, r.counts[static_cast<std::size_t>(c)]);
    out << head << pm(*r.correlators[static_cast<std::size_t>(c)]) << "  " << pm(*r.marginals.get(c, 0)) << "  "
        << pm(*r.marginals.get(c, 1)) << '\n';
  }
  out << "\n  C = " << fmt("%.4f", r.c.value) << " +/- " << fmt("%.4f", r.c.sem) << "\n";
  if (r.mean_repeatability) out << "  mean repeatability = " << fmt("%.4f", *r.mean_repeatability) << "\n";
  out << "\n  model                      epsilon            bound    violation\n";
  model_line(out, "none", EpsilonEntry{0.0, std::nullopt, r.significance_no_epsilon}, r.models.noncontextual_bound);
  model_line(out, "repeatability fraction", r.fraction, r.models.noncontextual_bound);
  model_line(out, "maximally noncontextual", r.mnc, r.models.noncontextual_bound);
  model_line(out, "sequential disturbance", r.sequential, r.models.noncontextual_bound);
  if (r.mnc_bootstrap) {
    out << "\n  maximally noncontextual bootstrap: mean " << fmt("%.4f", r.mnc_bootstrap->mean) << ", sem "
        << fmt("%.4f", r.mnc_bootstrap->sem) << " (" << r.mnc_bootstrap->resamples << " resamples)\n";
  }
  return out.str();
}

nlohmann::json to_json(const ContextualityReport& r) {
  nlohmann::json j;
  j["format"] = "ionctx-report/1";
  j["C"] = r.c.value;
  j["sem_C"] = r.c.sem;
  j["noncontextual_bound"] = r.models.noncontextual_bound;
  j["significance_no_epsilon"] = r.significance_no_epsilon;
  nlohmann::json contexts = nlohmann::json::array();
  for (int c = 0; c < 4; ++c) {
    const auto idx = static_cast<std::size_t>(c);
    contexts.push_back({{"context", context_label(c)},
                        {"trials", r.counts[idx]},
                        {"correlator", estimate_json(*r.correlators[idx])},
                        {"marginal_i", estimate_json(*r.marginals.get(c, 0))},
                        {"marginal_j", estimate_json(*r.marginals.get(c, 1))}});
  }
  j["contexts"] = contexts;
  j["mean_repeatability"] = r.mean_repeatability ? nlohmann::json(*r.mean_repeatability) : nlohmann::json(nullptr);
  j["epsilon_fraction"] = entry_json(r.fraction);
  j["epsilon_mnc"] = entry_json(r.mnc);
  if (r.mnc_bootstrap) {
    j["epsilon_mnc"]["bootstrap"] = {
        {"mean", r.mnc_bootstrap->mean}, {"sem", r.mnc_bootstrap->sem}, {"resamples", r.mnc_bootstrap->resamples}};
  }
  j["epsilon_sequential"] = entry_json(r.sequential);
  return j;
}

}  // namespace ionctx
