#include "elicit/stats/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "elicit/error.hpp"
#include "elicit/io.hpp"
#include "optimize.hpp"

namespace elicit::stats {

std::string_view to_string(Source s) noexcept { return s == Source::Model ? "MODEL" : "HUMAN"; }

std::string_view to_string(Dimension d) noexcept {
  switch (d) {
    case Dimension::Relevancy: return "RELEVANCY";
    case Dimension::Clarity: return "CLARITY";
    case Dimension::Informativeness: return "INFORMATIVENESS";
  }
  return "RELEVANCY";
}

Source parse_source(std::string_view token) {
  if (token == "MODEL") return Source::Model;
  if (token == "HUMAN") return Source::Human;
  throw Error(ErrorCode::ParseError, "unknown source '" + std::string(token) + "'");
}

Dimension parse_dimension(std::string_view token) {
  for (auto d : all_dimensions())
    if (to_string(d) == token) return d;
  throw Error(ErrorCode::ParseError, "unknown dimension '" + std::string(token) + "'");
}

const std::vector<Dimension>& all_dimensions() {
  static const std::vector<Dimension> dims{Dimension::Relevancy, Dimension::Clarity,
                                           Dimension::Informativeness};
  return dims;
}

void validate(const RatingRecord& r) {
  if (r.scale_size < 2)
    throw Error(ErrorCode::InvalidParameter, "scale size must be at least 2");
  if (r.score < 1 || r.score > r.scale_size)
    throw Error(ErrorCode::OutOfScaleScore, "score " + std::to_string(r.score) + " outside 1.." +
                                                std::to_string(r.scale_size) + " for rater " +
                                                r.rater_id + ", item " + r.item_id);
}

namespace {

using detail::Objective;

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
double logistic(double z) {
  if (z >= 0) return 1 / (1 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1 + e);
}

double wald_p(double estimate, double se) {
  if (!(se > 0) || !std::isfinite(se)) return std::numeric_limits<double>::quiet_NaN();
  return std::erfc(std::abs(estimate / se) / std::sqrt(2.0));
}

/// Maximizes h(u) = g(u) - u^2 / (2 sigma^2) where `derivs` returns
/// (g, g', g'') and g is concave. Returns (h(u*), -g''(u*)).
template <class Derivs>
std::pair<double, double> inner_mode(Derivs&& derivs, double sigma) {
  const double prec = 1 / (sigma * sigma);
  double u = 0;
  auto [g, d1, d2] = derivs(u);
  double h = g - 0.5 * prec * u * u;
  for (int it = 0; it < 200; ++it) {
    const double grad = d1 - prec * u;
    const double curv = d2 - prec;
    double step = -grad / curv;
    // h is flat at the mode but the curvature term is not, so mode error
    // leaks into the outer gradient at first order. Small steps are taken
    // unconditionally because comparing h there is below double resolution.
    const bool small = std::abs(step) < 1e-4 * std::max(1.0, std::abs(u));
    if (std::abs(step) < 1e-12 * std::max(1.0, std::abs(u))) break;
    bool moved = false;
    for (int k = 0; k < 30 && !moved; ++k, step *= 0.5) {
      auto [gn, d1n, d2n] = derivs(u + step);
      const double hn = gn - 0.5 * prec * (u + step) * (u + step);
      if (small || hn >= h) {
        u += step;
        g = gn;
        d1 = d1n;
        d2 = d2n;
        h = hn;
        moved = true;
      }
    }
    if (!moved) break;  // at the resolution limit of h
  }
  return {h, -d2};
}

// Neumaier summation. Likelihoods add hundreds of O(1) terms and the outer
// optimizer differentiates them numerically, so plain rounding shows up.
struct Sum {
  double s = 0, c = 0;
  void operator+=(double x) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

double laplace_term(double h, double info, double sigma) {
  return h - 0.5 * std::log1p(sigma * sigma * info);
}

/// Shared boundary logic: fits the mixed model, compares with sigma = 0, and
/// fills a ModelFit. `ll(theta, sigma)` takes the fixed parameters.
struct FitProblem {
  std::function<double(const Eigen::VectorXd&, double)> ll;
  Eigen::VectorXd start;
};

ModelFit fit_with_boundary(const FitProblem& prob, const FitOptions& opt) {
  const auto p = prob.start.size();
  auto fixed = [&](double sigma) -> Objective {
    return [&prob, sigma](const Eigen::VectorXd& th) { return prob.ll(th, sigma); };
  };

  ModelFit fit;
  auto check_trace = [](const detail::MaximizeResult& r) {
    for (std::size_t i = 1; i < r.trace.size(); ++i)
      if (r.trace[i] < r.trace[i - 1])
        throw Error(ErrorCode::NonConvergence, "log-likelihood decreased between iterations");
  };
  auto fail = [](const detail::MaximizeResult& r, const char* what) {
    std::ostringstream msg;
    msg << what << ": " << r.message << " after " << r.iterations
        << " iterations, |grad| = " << r.gradient_norm << ", loglik = " << r.value;
    throw Error(ErrorCode::NonConvergence, msg.str());
  };

  if (opt.fixed_sigma) {
    const double sigma = *opt.fixed_sigma;
    if (!(sigma >= 0)) throw Error(ErrorCode::InvalidParameter, "fixed sigma must be >= 0");
    const auto f = fixed(sigma);
    auto r = detail::maximize(f, prob.start, opt.max_iterations, opt.gradient_tolerance);
    check_trace(r);
    if (!r.converged) fail(r, "fixed-sigma fit");
    fit.estimate = r.x[0];
    fit.std_error = detail::wald_se(f, r.x);
    fit.random_effect_sd = sigma;
    fit.log_likelihood = r.value;
    fit.trace = r.trace;
    fit.iterations = r.iterations;
    fit.converged = true;
    fit.diagnostics = "sigma fixed at " + std::to_string(sigma);
    fit.thresholds = std::vector<double>(r.x.data() + 1, r.x.data() + p);
    return fit;
  }

  // Free sigma on the log scale, then the sigma = 0 boundary for comparison.
  Eigen::VectorXd start(p + 1);
  start << prob.start, std::log(0.5);
  Objective mixed = [&prob, p](const Eigen::VectorXd& th) {
    const double ls = th[p];
    if (ls < -30 || ls > 5) return -std::numeric_limits<double>::infinity();
    return prob.ll(th.head(p), std::exp(ls));
  };
  auto rm = detail::maximize(mixed, start, opt.max_iterations, opt.gradient_tolerance);
  check_trace(rm);
  const auto f0 = fixed(0);
  auto r0 = detail::maximize(f0, prob.start, opt.max_iterations, opt.gradient_tolerance);
  check_trace(r0);
  if (!r0.converged) fail(r0, "boundary fit");

  const bool boundary = rm.x[p] < std::log(1e-4) || rm.value <= r0.value + 1e-9;
  if (!boundary && !rm.converged) fail(rm, "mixed fit");
  if (boundary) {
    fit.estimate = r0.x[0];
    fit.std_error = detail::wald_se(f0, r0.x);
    fit.random_effect_sd = 0;
    fit.log_likelihood = r0.value;
    fit.trace = r0.trace;
    fit.iterations = r0.iterations;
    fit.diagnostics = "random-effect sd at boundary 0; fixed-effect fit reported";
    fit.thresholds = std::vector<double>(r0.x.data() + 1, r0.x.data() + p);
  } else {
    fit.estimate = rm.x[0];
    fit.std_error = detail::wald_se(mixed, rm.x);
    if (!std::isfinite(fit.std_error)) {
      // Flat in sigma: fall back to curvature in the fixed effects alone.
      fit.std_error = detail::wald_se(fixed(std::exp(rm.x[p])), rm.x.head(p));
      fit.diagnostics = "information singular in sigma; SE conditional on sigma-hat; ";
    }
    fit.random_effect_sd = std::exp(rm.x[p]);
    fit.log_likelihood = rm.value;
    fit.trace = rm.trace;
    fit.iterations = rm.iterations;
    fit.diagnostics += "Laplace fit converged";
    fit.thresholds = std::vector<double>(rm.x.data() + 1, rm.x.data() + p);
  }
  fit.converged = true;
  return fit;
}

void finish(ModelFit& fit) {
  fit.odds_ratio = std::exp(fit.estimate);
  fit.p_value = wald_p(fit.estimate, fit.std_error);
}

// --- Bradley-Terry -----------------------------------------------------------

struct WinCount {
  double wins = 0;
  double n = 0;
};

std::vector<WinCount> group_comparisons(std::span<const PairedComparison> data) {
  std::map<std::string, WinCount> by;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& c : data) {
    if (!seen.emplace(c.rater_id, c.pair_id).second)
      throw Error(ErrorCode::DuplicateResponse,
                  "rater " + c.rater_id + " compared pair " + c.pair_id + " twice");
    auto& w = by[c.rater_id];
    w.wins += c.winner == Source::Model;
    w.n += 1;
  }
  std::vector<WinCount> out;
  for (auto& [_, w] : by) out.push_back(w);
  return out;
}

double bt_ll(const std::vector<WinCount>& groups, double beta, double sigma) {
  Sum total;
  if (sigma == 0) {
    for (const auto& g : groups) total += g.wins * beta - g.n * softplus(beta);
    return total.value();
  }
  for (const auto& g : groups) {
    auto derivs = [&](double u) {
      const double eta = beta + u;
      const double p = logistic(eta);
      return std::tuple{g.wins * eta - g.n * softplus(eta), g.wins - g.n * p, -g.n * p * (1 - p)};
    };
    const auto [h, info] = inner_mode(derivs, sigma);
    total += laplace_term(h, info, sigma);
  }
  return total.value();
}

// --- ordinal -----------------------------------------------------------------

struct OrdinalObs {
  double x;
  int category;
};

struct OrdinalData {
  std::vector<std::vector<OrdinalObs>> raters;
  int categories = 0;
  std::size_t observations = 0;
};

struct CumulativeTerms {
  double logp, d1, d2;
};

CumulativeTerms category_terms(std::span<const double> tau, int j, double eta) {
  const int k = static_cast<int>(tau.size()) + 1;
  const double inf = std::numeric_limits<double>::infinity();
  const double hi = j == k - 1 ? inf : tau[j] - eta;
  const double lo = j == 0 ? -inf : tau[j - 1] - eta;
  auto F = [](double z) { return std::isinf(z) ? (z > 0 ? 1.0 : 0.0) : logistic(z); };
  auto f = [&](double z) { return std::isinf(z) ? 0.0 : F(z) * (1 - F(z)); };
  auto fp = [&](double z) { return std::isinf(z) ? 0.0 : f(z) * (1 - 2 * F(z)); };
  // Difference taken on the side away from 1 to avoid cancellation.
  double prob;
  if (j == k - 1)
    prob = F(-lo);
  else if (j == 0)
    prob = F(hi);
  else
    prob = lo + hi > 0 ? F(-lo) - F(-hi) : F(hi) - F(lo);
  double logp;
  if (j == k - 1)
    logp = -softplus(lo);
  else if (j == 0)
    logp = -softplus(-hi);
  else
    logp = std::log(prob);
  const double r = (f(hi) - f(lo)) / prob;
  return {logp, -r, (fp(hi) - fp(lo)) / prob - r * r};
}

double ordinal_ll(const OrdinalData& data, double beta, std::span<const double> tau, double sigma) {
  for (std::size_t i = 1; i < tau.size(); ++i)
    if (!(tau[i] > tau[i - 1])) return -std::numeric_limits<double>::infinity();
  Sum total;
  for (const auto& rater : data.raters) {
    auto derivs = [&](double u) {
      double g = 0, d1 = 0, d2 = 0;
      for (const auto& o : rater) {
        const auto t = category_terms(tau, o.category, beta * o.x + u);
        g += t.logp;
        d1 += t.d1;
        d2 += t.d2;
      }
      return std::tuple{g, d1, d2};
    };
    if (sigma == 0) {
      total += std::get<0>(derivs(0.0));
    } else {
      const auto [h, info] = inner_mode(derivs, sigma);
      total += laplace_term(h, info, sigma);
    }
  }
  return total.value();
}

OrdinalData prepare_ordinal(std::span<const RatingRecord> data, std::vector<int>* levels_out) {
  if (data.empty()) throw Error(ErrorCode::EmptyInput, "no ratings to fit");
  std::set<int> levels;
  std::set<Source> sources;
  std::set<std::tuple<std::string, std::string, Source>> seen;
  for (const auto& r : data) {
    validate(r);
    if (r.dimension != data.front().dimension)
      throw Error(ErrorCode::InvalidParameter, "ordinal fit takes one dimension at a time");
    if (r.scale_size != data.front().scale_size)
      throw Error(ErrorCode::ScaleMismatch, "ratings mix scale sizes");
    if (!seen.emplace(r.rater_id, r.item_id, r.source).second)
      throw Error(ErrorCode::DuplicateResponse,
                  "rater " + r.rater_id + " rated " + r.item_id + " twice");
    levels.insert(r.score);
    sources.insert(r.source);
  }
  if (levels.size() < 2) throw Error(ErrorCode::DegenerateScale, "only one score level observed");
  if (sources.size() < 2)
    throw Error(ErrorCode::InvalidParameter, "ordinal fit needs both MODEL and HUMAN ratings");
  std::vector<int> lv(levels.begin(), levels.end());
  std::map<std::string, std::vector<OrdinalObs>> by;
  for (const auto& r : data) {
    const int cat = static_cast<int>(std::lower_bound(lv.begin(), lv.end(), r.score) - lv.begin());
    by[r.rater_id].push_back({r.source == Source::Model ? 1.0 : 0.0, cat});
  }
  if (by.size() < 2) throw Error(ErrorCode::SampleTooSmall, "ordinal fit needs at least 2 raters");
  OrdinalData out;
  out.categories = static_cast<int>(lv.size());
  out.observations = data.size();
  for (auto& [_, v] : by) out.raters.push_back(std::move(v));
  if (levels_out) *levels_out = std::move(lv);
  return out;
}

// theta = (beta, tau_1, log gap_2, ..., log gap_{K-1})
std::vector<double> thresholds_from(const Eigen::VectorXd& th) {
  std::vector<double> tau(static_cast<std::size_t>(th.size() - 1));
  for (std::size_t i = 0; i < tau.size(); ++i)
    tau[i] = i == 0 ? th[1] : tau[i - 1] + std::exp(th[static_cast<Eigen::Index>(i) + 1]);
  return tau;
}

}  // namespace

double bt_log_likelihood(std::span<const PairedComparison> data, double beta, double sigma) {
  if (!(sigma >= 0)) throw Error(ErrorCode::InvalidParameter, "sigma must be >= 0");
  return bt_ll(group_comparisons(data), beta, sigma);
}

ModelFit fit_bt_mixed(std::span<const PairedComparison> data, const FitOptions& options) {
  if (data.empty()) throw Error(ErrorCode::EmptyInput, "no comparisons to fit");
  const auto groups = group_comparisons(data);
  double wins = 0, n = 0;
  for (const auto& g : groups) {
    wins += g.wins;
    n += g.n;
  }
  if (wins == 0 || wins == n)
    throw Error(ErrorCode::CompleteSeparation,
                "every comparison has the same winner; the log-odds is unbounded");
  FitProblem prob;
  prob.ll = [&groups](const Eigen::VectorXd& th, double sigma) { return bt_ll(groups, th[0], sigma); };
  prob.start = Eigen::VectorXd::Constant(1, std::log(wins / (n - wins)));
  auto fit = fit_with_boundary(prob, options);
  fit.thresholds.reset();
  fit.observations = data.size();
  fit.raters = groups.size();
  finish(fit);
  return fit;
}

double ordinal_log_likelihood(std::span<const RatingRecord> data, double beta,
                              std::span<const double> thresholds, double sigma) {
  if (!(sigma >= 0)) throw Error(ErrorCode::InvalidParameter, "sigma must be >= 0");
  const auto prepared = prepare_ordinal(data, nullptr);
  if (static_cast<int>(thresholds.size()) != prepared.categories - 1)
    throw Error(ErrorCode::InvalidParameter, "need one threshold per gap between observed levels");
  return ordinal_ll(prepared, beta, thresholds, sigma);
}

ModelFit fit_ordinal_mixed(std::span<const RatingRecord> data, const FitOptions& options) {
  std::vector<int> levels;
  const auto prepared = prepare_ordinal(data, &levels);
  const int k = prepared.categories;

  // Start from the pooled cumulative proportions.
  std::vector<double> counts(static_cast<std::size_t>(k), 0);
  for (const auto& r : prepared.raters)
    for (const auto& o : r) counts[static_cast<std::size_t>(o.category)] += 1;
  Eigen::VectorXd start(k);
  start[0] = 0;
  double cum = 0, prev = 0;
  for (int j = 0; j < k - 1; ++j) {
    cum += counts[static_cast<std::size_t>(j)];
    const double q = cum / static_cast<double>(prepared.observations);
    const double tau = std::log(q / (1 - q));
    start[j + 1] = j == 0 ? tau : std::log(std::max(tau - prev, 1e-3));
    prev = j == 0 ? tau : prev + std::exp(start[j + 1]);
  }

  FitProblem prob;
  prob.ll = [&prepared](const Eigen::VectorXd& th, double sigma) {
    const auto tau = thresholds_from(th);
    return ordinal_ll(prepared, th[0], tau, sigma);
  };
  prob.start = start;
  auto fit = fit_with_boundary(prob, options);
  // Map the reparameterized thresholds back to tau.
  Eigen::VectorXd th(k);
  th[0] = fit.estimate;
  for (int j = 0; j < k - 1; ++j) th[j + 1] = (*fit.thresholds)[static_cast<std::size_t>(j)];
  fit.thresholds = thresholds_from(th);
  fit.observations = prepared.observations;
  fit.raters = prepared.raters.size();
  finish(fit);
  return fit;
}

std::vector<PairRating> pair_ratings(std::span<const RatingRecord> records) {
  using Key = std::tuple<std::string, std::string, Dimension>;
  std::map<Key, std::pair<const RatingRecord*, const RatingRecord*>> by;
  for (const auto& r : records) {
    validate(r);
    auto& slot = by[{r.rater_id, r.item_id, r.dimension}];
    auto& target = r.source == Source::Model ? slot.first : slot.second;
    if (target)
      throw Error(ErrorCode::DuplicateResponse, "rater " + r.rater_id + " rated the " +
                                                    std::string(to_string(r.source)) +
                                                    " question of " + r.item_id + " twice");
    target = &r;
  }
  std::vector<PairRating> out;
  for (const auto& [key, slot] : by) {
    if (!slot.first || !slot.second)
      throw Error(ErrorCode::MissingCounterpart,
                  "item " + std::get<1>(key) + " lacks a " + (slot.first ? "HUMAN" : "MODEL") +
                      " rating from rater " + std::get<0>(key));
    if (slot.first->scale_size != slot.second->scale_size)
      throw Error(ErrorCode::ScaleMismatch, "item " + std::get<1>(key) + " mixes scales");
    out.push_back({std::get<1>(key), std::get<2>(key), slot.first->score, slot.second->score,
                   slot.first->scale_size});
  }
  return out;
}

std::map<Dimension, WinTie> win_tie_rates(std::span<const PairRating> ratings) {
  struct Acc {
    std::int64_t model = 0, human = 0, tie = 0;
    double model_sum = 0, human_sum = 0;
    int scale = 0;
  };
  std::map<Dimension, Acc> acc;
  for (const auto& r : ratings) {
    auto& a = acc[r.dimension];
    if (a.scale == 0) a.scale = r.scale_size;
    if (r.scale_size != a.scale)
      throw Error(ErrorCode::ScaleMismatch,
                  std::string(to_string(r.dimension)) + " mixes scale sizes");
    for (int s : {r.model_score, r.human_score})
      if (s < 1 || s > r.scale_size)
        throw Error(ErrorCode::ScaleMismatch, "score " + std::to_string(s) + " outside 1.." +
                                                  std::to_string(r.scale_size));
    if (r.model_score > r.human_score)
      ++a.model;
    else if (r.human_score > r.model_score)
      ++a.human;
    else
      ++a.tie;
    a.model_sum += r.model_score;
    a.human_sum += r.human_score;
  }
  std::map<Dimension, WinTie> out;
  for (const auto& [d, a] : acc) {
    const std::int64_t n = a.model + a.human + a.tie;
    out[d] = WinTie{Rational(a.model, n), Rational(a.human, n), Rational(a.tie, n),
                    a.model_sum / static_cast<double>(n), a.human_sum / static_cast<double>(n),
                    static_cast<std::size_t>(n)};
  }
  return out;
}

std::vector<PairedComparison> parse_comparisons(std::string_view tsv) {
  auto t = io::Table::parse(tsv);
  std::vector<PairedComparison> out;
  for (std::size_t r = 0; r < t.size(); ++r)
    out.push_back({t.at(r, "rater_id"), t.at(r, "pair_id"), parse_source(t.at(r, "winner"))});
  return out;
}

std::string format_comparisons(std::span<const PairedComparison> data) {
  io::Table t({"rater_id", "pair_id", "winner"});
  for (const auto& c : data) t.add_row({c.rater_id, c.pair_id, std::string(to_string(c.winner))});
  return t.format();
}

std::vector<RatingRecord> parse_ratings(std::string_view tsv) {
  auto t = io::Table::parse(tsv);
  std::vector<RatingRecord> out;
  for (std::size_t r = 0; r < t.size(); ++r) {
    RatingRecord rec;
    rec.rater_id = t.at(r, "rater_id");
    rec.item_id = t.at(r, "item_id");
    rec.source = parse_source(t.at(r, "source"));
    rec.dimension = parse_dimension(t.at(r, "dimension"));
    try {
      rec.score = std::stoi(t.at(r, "score"));
      rec.scale_size = std::stoi(t.at(r, "scale_size"));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::ParseError,
                  "ratings line " + std::to_string(t.line_of(r)) + ": score is not an integer");
    }
    validate(rec);
    out.push_back(std::move(rec));
  }
  return out;
}

std::string format_ratings(std::span<const RatingRecord> data) {
  io::Table t({"rater_id", "item_id", "source", "dimension", "score", "scale_size"});
  for (const auto& r : data)
    t.add_row({r.rater_id, r.item_id, std::string(to_string(r.source)),
               std::string(to_string(r.dimension)), std::to_string(r.score),
               std::to_string(r.scale_size)});
  return t.format();
}

nlohmann::json to_json(const ModelFit& fit) {
  nlohmann::json j{{"estimate", fit.estimate},
                   {"odds_ratio", fit.odds_ratio},
                   {"std_error", fit.std_error},
                   {"p_value", fit.p_value},
                   {"random_effect_sd", fit.random_effect_sd},
                   {"converged", fit.converged},
                   {"diagnostics", fit.diagnostics},
                   {"log_likelihood", fit.log_likelihood},
                   {"iterations", fit.iterations},
                   {"observations", fit.observations},
                   {"raters", fit.raters}};
  j["thresholds"] = fit.thresholds ? nlohmann::json(*fit.thresholds) : nlohmann::json();
  return j;
}

nlohmann::json to_json(const WinTie& w) {
  auto rate = [](Rational r) {
    return nlohmann::json{{"num", r.num()}, {"den", r.den()}, {"percent", r.percent()}};
  };
  return nlohmann::json{{"model_win", rate(w.model_win)}, {"human_win", rate(w.human_win)},
                        {"tie", rate(w.tie)},          {"model_mean", w.model_mean},
                        {"human_mean", w.human_mean},  {"pairs", w.pairs}};
}

}  // namespace elicit::stats
