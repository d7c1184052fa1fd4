#include "gfse/experiments.hpp"

#include "gfse/errors.hpp"

namespace gfse {

namespace {

ExperimentConfig base(const std::string& figure, const std::string& label, Method method,
                      const std::vector<std::uint64_t>& seeds) {
  ExperimentConfig c;
  c.name = figure;
  c.label = label;
  c.method = method;
  c.seeds = seeds;
  return c;
}

// Matched: BKT-threshold class, BKT model. Mismatch: AFM-threshold class, AFM model.
struct Setting {
  std::string suffix;
  std::string policy_class;
  ModelFamily family;
};

const std::vector<Setting> kSettings{{"matched", "bkt_threshold", ModelFamily::Bkt},
                                     {"mismatch", "afm_threshold", ModelFamily::Afm}};

std::vector<ExperimentConfig> tutoring_budget(const std::vector<std::uint64_t>& seeds) {
  const std::string fig = "tutoring-budget";
  std::vector<ExperimentConfig> out;
  for (const auto& s : kSettings) {
    auto g = base(fig, "gfse_" + s.suffix, Method::Gfse, seeds);
    g.policy_class = s.policy_class;
    g.budgets = {5, 10, 20, 50, 100, 200, 500, 1000};
    out.push_back(g);

    auto m = g;
    m.label = "model_based_" + s.suffix;
    m.method = Method::ModelBased;
    m.model_family = s.family;
    out.push_back(m);

    // GP costs grow cubically in the number of evaluations, so BO stops early.
    auto b = g;
    b.label = "bo_" + s.suffix;
    b.method = Method::Bo;
    b.budgets = {5, 10, 20, 50};
    out.push_back(b);
  }
  // Split-budget Monte Carlo against GFSE on the same 100 candidates.
  auto mc = base(fig, "mc_k100", Method::Mc, seeds);
  mc.n_candidates = 100;
  mc.budgets = {100, 1000};
  out.push_back(mc);
  auto gk = mc;
  gk.label = "gfse_k100";
  gk.method = Method::Gfse;
  out.push_back(gk);
  return out;
}

std::vector<ExperimentConfig> tutoring_online(const std::string& fig, bool augmented,
                                              const std::vector<std::uint64_t>& seeds) {
  std::vector<ExperimentConfig> out;
  for (const auto& s : kSettings) {
    auto g = base(fig, (augmented ? "gfse_re_5_" : "gfse_5_") + s.suffix,
                  augmented ? Method::GfseRe : Method::Gfse, seeds);
    g.policy_class = s.policy_class;
    g.episodes = 50;
    g.initial_budget = 5;
    out.push_back(g);
    if (!augmented) {
      auto g10 = g;
      g10.label = "gfse_10_" + s.suffix;
      g10.initial_budget = 10;
      out.push_back(g10);
    }
    auto b = g;
    b.label = (augmented ? "bo_re_" : "bo_") + s.suffix;
    b.method = augmented ? Method::BoRe : Method::Bo;
    out.push_back(b);
  }
  return out;
}

std::vector<ExperimentConfig> asset(const std::vector<std::uint64_t>& seeds) {
  const std::string fig = "asset";
  std::vector<ExperimentConfig> out;
  auto g = base(fig, "gfse", Method::Gfse, seeds);
  g.domain = "asset";
  g.policy_class = "asset_logistic";
  g.budgets = {1, 2, 5, 10, 20};
  out.push_back(g);
  auto b = g;
  b.label = "bo";
  b.method = Method::Bo;
  b.budgets = {5, 10, 20, 50};
  out.push_back(b);
  for (auto [label, kind] : {std::pair{"replace_immediately", Baseline::AlwaysHalt},
                             std::pair{"never_replace", Baseline::NeverHalt},
                             std::pair{"hindsight_optimal", Baseline::Hindsight}}) {
    auto f = base(fig, label, Method::FixedBaseline, seeds);
    f.domain = "asset";
    f.baseline = kind;
    out.push_back(f);
  }
  return out;
}

std::vector<ExperimentConfig> tickets(const std::vector<std::uint64_t>& seeds) {
  const std::string fig = "tickets";
  std::vector<ExperimentConfig> out;
  for (auto [label, cls] : {std::pair{"ours_simple", "ticket_simple"}, std::pair{"ours_complex", "ticket_complex"}}) {
    auto g = base(fig, label, Method::Gfse, seeds);
    g.domain = "tickets";
    g.policy_class = cls;
    out.push_back(g);
  }
  for (auto [label, kind] : {std::pair{"earliest", Baseline::AlwaysHalt}, std::pair{"latest", Baseline::NeverHalt},
                             std::pair{"best_possible", Baseline::Hindsight}}) {
    auto f = base(fig, label, Method::FixedBaseline, seeds);
    f.domain = "tickets";
    f.baseline = kind;
    out.push_back(f);
  }
  return out;
}

}  // namespace

std::vector<std::string> figure_names() {
  return {"tutoring-budget", "tutoring-cumulative", "tutoring-augmented", "asset", "tickets"};
}

std::vector<ExperimentConfig> figure_configs(const std::string& figure,
                                             const std::vector<std::uint64_t>& seeds) {
  if (figure == "tutoring-budget") return tutoring_budget(seeds);
  if (figure == "tutoring-cumulative") return tutoring_online(figure, false, seeds);
  if (figure == "tutoring-augmented") return tutoring_online(figure, true, seeds);
  if (figure == "asset") return asset(seeds);
  if (figure == "tickets") return tickets(seeds);
  std::string names;
  for (const auto& n : figure_names()) names += (names.empty() ? "" : ", ") + n;
  throw InvalidInput("unknown figure '" + figure + "' (expected one of: " + names + ")");
}

std::vector<std::uint64_t> seed_range(std::size_t n) {
  std::vector<std::uint64_t> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = i + 1;
  return s;
}

std::vector<ResultRow> curve(const std::vector<ResultRow>& rows, const std::string& label) {
  std::vector<ResultRow> out;
  for (const auto& r : rows) {
    if (r.method == label) out.push_back(r);
  }
  return out;
}

}  // namespace gfse
