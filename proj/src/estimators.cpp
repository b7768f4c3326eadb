#include "selmean/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "selmean/specfun.hpp"

namespace selmean {

namespace {

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
  return out;
}

// sigma-hat_1 = S* sqrt(n2 / (n1 (n1 + n2)))
double plugin_scale(const RBSummary& s, const DesignConfig& cfg) {
  if (!(s.s_pooled_sq > 0.0)) {
    throw DegenerateData("pooled sample variance is zero");
  }
  const double n1 = cfg.n1();
  const double n2 = cfg.n2();
  return std::sqrt(s.s_pooled_sq) * std::sqrt(n2 / (n1 * (n1 + n2)));
}

}  // namespace

EstimatorId EstimatorId::bayes(long m) {
  if (m < 1) throw std::invalid_argument("BAYES_M requires m >= 1");
  return EstimatorId(Kind::BayesM, m);
}

std::string EstimatorId::name() const {
  switch (kind_) {
    case Kind::Mle: return "MLE";
    case Kind::Umvcue: return "UMVCUE";
    case Kind::PluginU1: return "PLUGIN_U1";
    case Kind::PluginU2: return "PLUGIN_U2";
    case Kind::BayesM: return "BAYES_M(" + std::to_string(m_) + ")";
  }
  return {};
}

std::optional<EstimatorId> EstimatorId::parse(std::string_view text) {
  const std::string t = upper(text);
  if (t == "MLE") return mle();
  if (t == "UMVCUE") return umvcue();
  if (t == "PLUGIN_U1") return plugin_u1();
  if (t == "PLUGIN_U2") return plugin_u2();
  if (t == "BAYES_M") return bayes(1);
  constexpr std::string_view prefix = "BAYES_M(";
  if (t.size() > prefix.size() + 1 && t.starts_with(prefix) && t.back() == ')') {
    long m = 0;
    const char* first = t.data() + prefix.size();
    const char* last = t.data() + t.size() - 1;
    auto [ptr, ec] = std::from_chars(first, last, m);
    if (ec == std::errc() && ptr == last && m >= 1) return bayes(m);
  }
  return std::nullopt;
}

std::vector<EstimatorId> standard_estimators() {
  return {EstimatorId::mle(), EstimatorId::umvcue(), EstimatorId::plugin_u1(),
          EstimatorId::plugin_u2()};
}

double mle(const RBSummary& s, const DesignConfig& cfg) { return s.combined_mean(cfg); }

double umvcue_correction(double v_star, double c) {
  if (!(c > 0.0)) throw std::domain_error("umvcue_correction: c must be positive");
  if (!(v_star <= 1.0) || !(v_star > -1.0) || v_star + 1.0 < 1e-10) {
    throw DegenerateData("umvcue_correction: v* must lie in (-1, 1]");
  }
  if (v_star == 1.0) return 0.0;
  // log(1 - v^2) split so neither factor loses digits near +-1.
  const double log_num = c * (std::log1p(-v_star) + std::log1p(v_star));
  const double log_den = 2.0 * c * std::numbers::ln2 + std::log(c) +
                         specfun::log_beta(c, c) +
                         specfun::log_reg_inc_beta(c, c, 0.5 * (v_star + 1.0));
  return -std::exp(log_num - log_den);
}

double umvcue(const RBSummary& s, const DesignConfig& cfg) {
  const double n1 = cfg.n1();
  const double n2 = cfg.n2();
  const double scale = std::sqrt(n1 / (n2 * (n1 + n2))) * std::sqrt(s.s_tilde_sq);
  return s.combined_mean(cfg) + scale * umvcue_correction(s.v_star, s.c);
}

double plugin_u1(const RBSummary& s, const DesignConfig& cfg) {
  const double sigma1 = plugin_scale(s, cfg);
  const double z1 = s.combined_mean(cfg);
  return z1 + sigma1 * specfun::mills_hazard(s.d / sigma1);
}

double plugin_u2(const RBSummary& s, const DesignConfig& cfg) {
  const double sigma1 = plugin_scale(s, cfg);
  const double n1 = cfg.n1();
  const double n2 = cfg.n2();
  const double z1 = s.combined_mean(cfg);
  const double z2 = s.xbar_other;
  const double weighted = ((n1 + n2) * z1 + n1 * z2) / (2.0 * n1 + n2);
  if (z1 <= z2) return weighted;

  const double t = s.d / sigma1;
  const double t_shrunk = n1 * s.d / ((2.0 * n1 + n2) * sigma1);
  const double cdf_t = specfun::norm_cdf(t);
  // Phi(t) - Phi(t') as a difference of upper tails; both arguments are > 0.
  const double tail_gap = specfun::norm_sf(t_shrunk) - specfun::norm_sf(t);
  const double cdf_shrunk = specfun::norm_cdf(t_shrunk);
  return weighted * tail_gap / cdf_t +
         (sigma1 * specfun::norm_pdf(t_shrunk) + z1 * cdf_shrunk) / cdf_t;
}

double bayes_shrinkage(const RBSummary& s, const DesignConfig& cfg, long m) {
  if (m < 1) throw std::invalid_argument("bayes_shrinkage: m must be at least 1");
  return s.z / (cfg.total_selected() + 1.0 / static_cast<double>(m));
}

double evaluate(EstimatorId id, const RBSummary& s, const DesignConfig& cfg) {
  switch (id.kind()) {
    case EstimatorId::Kind::Mle: return mle(s, cfg);
    case EstimatorId::Kind::Umvcue: return umvcue(s, cfg);
    case EstimatorId::Kind::PluginU1: return plugin_u1(s, cfg);
    case EstimatorId::Kind::PluginU2: return plugin_u2(s, cfg);
    case EstimatorId::Kind::BayesM: return bayes_shrinkage(s, cfg, id.m());
  }
  return 0.0;
}

}  // namespace selmean
