#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <atomic>
#include <thread>
#include <vector>

#include "elicit/error.hpp"
#include "elicit/random.hpp"
#include "elicit/stats/models.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace elicit::stats {
namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::ParseError;
}

// Exact marginal log-likelihood: per rater, integrate the conditional
// likelihood against N(0, sigma^2) with Simpson's rule over +-10 sigma.
double integrated_log_likelihood(const std::map<std::string, std::vector<std::function<double(double)>>>& by_rater,
                                 double sigma) {
  double total = 0;
  const int n = 4000;
  for (const auto& [rater, terms] : by_rater) {
    const double lo = -10 * sigma, h = 20 * sigma / n;
    double sum = 0;
    for (int i = 0; i <= n; ++i) {
      const double u = lo + i * h;
      double lik = std::exp(-u * u / (2 * sigma * sigma)) / (sigma * std::sqrt(2 * M_PI));
      for (const auto& t : terms) lik *= t(u);
      sum += lik * (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2));
    }
    total += std::log(sum * h / 3);
  }
  return total;
}

TEST(BradleyTerry, ClosedFormAtZeroSigma) {
  FitOptions o;
  o.fixed_sigma = 0.0;
  double worst = 0;
  for (int w = 1; w <= 200; ++w)
    for (int l = 1; l <= 200; ++l) {
      const auto fit = fit_bt_mixed(oracle::win_loss(w, l), o);
      worst = std::max(worst, std::abs(fit.estimate - std::log(static_cast<double>(w) / l)));
    }
  EXPECT_LT(worst, 1e-9);
}

TEST(BradleyTerry, OneObservationPerRaterHitsBoundary) {
  const auto fit = fit_bt_mixed(oracle::win_loss(87, 41));
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.random_effect_sd, 0.0, 1e-6);
  EXPECT_NEAR(fit.estimate, 0.752336051950, 1e-6);
  EXPECT_NEAR(fit.odds_ratio, 2.122, 5e-4);
  EXPECT_EQ(fit.odds_ratio, std::exp(fit.estimate));
}

TEST(BradleyTerry, CompleteSeparation) {
  EXPECT_EQ(code_of([] { (void)fit_bt_mixed(oracle::win_loss(40, 0, 4)); }), ErrorCode::CompleteSeparation);
  EXPECT_EQ(code_of([] { (void)fit_bt_mixed(oracle::win_loss(0, 12, 4)); }), ErrorCode::CompleteSeparation);
  EXPECT_EQ(code_of([] { (void)fit_bt_mixed({}); }), ErrorCode::EmptyInput);
}

TEST(BradleyTerry, BalancedRatersGiveZero) {
  std::vector<PairedComparison> d;
  for (int r = 0; r < 10; ++r)
    for (int k = 0; k < 4; ++k)
      d.push_back({"p" + std::to_string(r), "q" + std::to_string(k), k % 2 ? Source::Model : Source::Human});
  const auto fit = fit_bt_mixed(d);
  EXPECT_NEAR(fit.estimate, 0.0, 1e-8);
  EXPECT_NEAR(fit.odds_ratio, 1.0, 1e-8);
}

TEST(BradleyTerry, TraceNeverDecreases) {
  const auto d = parse_comparisons(testing::read(testing::fixture("study3/comparisons.tsv")));
  const auto fit = fit_bt_mixed(d);
  ASSERT_TRUE(fit.converged);
  for (std::size_t i = 1; i < fit.trace.size(); ++i) EXPECT_GE(fit.trace[i], fit.trace[i - 1] - 1e-12);
  EXPECT_EQ(fit.raters, 32u);
  EXPECT_EQ(fit.observations, 128u);
  EXPECT_GT(fit.estimate, 0);
  EXPECT_LT(fit.p_value, 0.05);
}

struct BtDraw {
  std::vector<PairedComparison> data;
  std::map<std::string, std::vector<std::function<double(double)>>> terms;
  std::map<std::string, std::pair<int, int>> wins;  // wins, n
};

BtDraw draw_bt(std::uint64_t seed, int raters, int per, double beta, double sigma) {
  Rng rng(seed);
  BtDraw out;
  for (int r = 0; r < raters; ++r) {
    const double u = sigma * oracle::gaussian(rng);
    const std::string id = "p" + std::to_string(r);
    for (int k = 0; k < per; ++k) {
      const bool model = rng.uniform() < oracle::logistic(0.9 + u);
      out.data.push_back({id, "q" + std::to_string(k), model ? Source::Model : Source::Human});
      out.terms[id].push_back([beta, model](double v) { return model ? oracle::logistic(beta + v) : 1 - oracle::logistic(beta + v); });
      out.wins[id].first += model;
      out.wins[id].second += 1;
    }
  }
  return out;
}

// Laplace by hand: bisection for the mode of w(b+u) - n log(1+e^(b+u)) - u^2/2s^2.
double laplace_by_bisection(const std::map<std::string, std::pair<int, int>>& wins, double beta, double sigma) {
  double total = 0;
  for (const auto& [_, wn] : wins) {
    const double w = wn.first, n = wn.second;
    auto score = [&](double u) { return w - n * oracle::logistic(beta + u) - u / (sigma * sigma); };
    double lo = -60, hi = 60;
    for (int i = 0; i < 200; ++i) (score(0.5 * (lo + hi)) > 0 ? lo : hi) = 0.5 * (lo + hi);
    const double u = 0.5 * (lo + hi), p = oracle::logistic(beta + u);
    total += w * std::log(p) + (n - w) * std::log(1 - p) - u * u / (2 * sigma * sigma) -
             0.5 * std::log(1 + sigma * sigma * n * p * (1 - p));
  }
  return total;
}

TEST(BradleyTerry, LaplaceMatchesIndependentComputation) {
  for (int trial = 0; trial < 6; ++trial) {
    const double beta = 0.3 + 0.1 * trial, sigma = 0.4 + 0.15 * trial;
    for (int per : {1, 4, 32}) {
      const auto d = draw_bt(11 + trial, 3 + trial % 4, per, beta, sigma);
      EXPECT_NEAR(bt_log_likelihood(d.data, beta, sigma), laplace_by_bisection(d.wins, beta, sigma), 1e-9)
          << "trial " << trial << ", " << per << " per rater";
    }
  }
}

TEST(BradleyTerry, LaplaceAgainstQuadrature) {
  // Laplace bias peaks when prior and likelihood weigh about the same, then
  // falls off as O(1/k) with k outcomes per rater.
  for (int trial = 0; trial < 6; ++trial) {
    const int raters = 3 + trial % 4;
    const double beta = 0.3 + 0.1 * trial, sigma = 0.4 + 0.15 * trial;
    auto err = [&](int per) {
      const auto d = draw_bt(11 + trial, raters, per, beta, sigma);
      return std::abs(bt_log_likelihood(d.data, beta, sigma) - integrated_log_likelihood(d.terms, sigma)) / raters;
    };
    EXPECT_LT(err(4), 0.02) << "trial " << trial;  // worst seen is ~0.011 at sigma 1.15
  }
}

TEST(BradleyTerry, LaplaceBiasShrinksWithOutcomesPerRater) {
  // one rater winning 3/4 of k at beta 0.6, sigma 1; exact values from adaptive quadrature in scipy
  const std::vector<std::pair<int, double>> exact{{4, -2.600083194620992}, {32, -19.081909336949334},
                                                  {256, -146.02663371751703}};
  std::vector<double> err;
  for (const auto& [k, ll] : exact) {
    const auto d = oracle::win_loss(3 * k / 4, k / 4, k);
    err.push_back(std::abs(bt_log_likelihood(d, 0.6, 1.0) - ll));
  }
  EXPECT_LT(err[0], 0.02);
  EXPECT_LT(err[2], err[1] / 3);
}

TEST(BradleyTerry, MonteCarloRecovery) {
  const double truth = std::log(2.662), sigma = 0.5;
  const int replicates = 500;
  std::vector<double> estimates(replicates);
  std::vector<char> significant(replicates);
  std::atomic<int> failed{0};
  auto run = [&](int first, int step) {
    for (int rep = first; rep < replicates; rep += step) {
      try {
        const auto fit = fit_bt_mixed(
            oracle::simulate_bt(derive_seed(20240601, {"bt-mc", std::to_string(rep)}), truth, sigma));
        estimates[rep] = fit.estimate;
        significant[rep] = fit.p_value < 0.05;
      } catch (const std::exception&) {
        ++failed;
      }
    }
  };
  const int threads = static_cast<int>(std::max(1u, std::min(8u, std::thread::hardware_concurrency())));
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) pool.emplace_back(run, t, threads);
  for (auto& t : pool) t.join();
  double mean = 0;
  int hits = 0;
  for (int i = 0; i < replicates; ++i) {
    mean += estimates[i] / replicates;
    hits += significant[i];
  }
  EXPECT_EQ(failed.load(), 0);
  EXPECT_NEAR(mean, truth, 0.1);
  EXPECT_GE(hits, replicates * 8 / 10);
}

// --- ordinal -------------------------------------------------------------------

TEST(Ordinal, ZeroSigmaMatchesGridSearch) {
  const auto d = oracle::toy_ratings();
  const auto grid = oracle::grid_search(d);
  FitOptions o;
  o.fixed_sigma = 0.0;
  const auto fit = fit_ordinal_mixed(d, o);
  ASSERT_TRUE(fit.converged);
  ASSERT_TRUE(fit.thresholds.has_value());
  ASSERT_EQ(fit.thresholds->size(), 2u);
  EXPECT_NEAR(fit.estimate, grid.beta, 1e-3);
  EXPECT_NEAR((*fit.thresholds)[0], grid.t1, 1e-3);
  EXPECT_NEAR((*fit.thresholds)[1], grid.t2, 1e-3);
  EXPECT_NEAR(fit.log_likelihood, grid.log_likelihood, 1e-6);
}

TEST(Ordinal, SymmetricDataGivesZero) {
  std::vector<RatingRecord> d;
  const int scores[] = {1, 2, 2, 3, 4, 4, 5, 3};
  for (int r = 0; r < 5; ++r)
    for (int i = 0; i < 8; ++i)
      for (Source s : {Source::Model, Source::Human})
        d.push_back({"p" + std::to_string(r), "i" + std::to_string(i), s, Dimension::Relevancy,
                     scores[(i + r) % 8], 5});
  const auto fit = fit_ordinal_mixed(d);
  EXPECT_LT(std::abs(fit.estimate), 1e-6);
}

TEST(Ordinal, LaplaceAgainstQuadrature) {
  Rng rng(23);
  for (int trial = 0; trial < 4; ++trial) {
    const int raters = 3 + trial;  // 3..6
    const double beta = 0.8, sigma = 0.7;
    const std::vector<double> tau{-1.0, 0.2, 1.5};
    std::vector<RatingRecord> d;
    std::map<std::string, std::vector<std::function<double(double)>>> terms;
    for (int r = 0; r < raters; ++r) {
      const std::string id = "p" + std::to_string(r);
      for (int k = 0; k < 6; ++k) {
        const int score = 1 + static_cast<int>(rng.below(4));
        const bool model = k % 2 == 0;
        d.push_back({id, "i" + std::to_string(k), model ? Source::Model : Source::Human, Dimension::Clarity, score, 5});
        terms[id].push_back([=](double u) {
          const double shift = (model ? beta : 0) + u;
          auto cdf = [&](int j) { return j <= 0 ? 0.0 : j >= 4 ? 1.0 : oracle::logistic(tau[j - 1] - shift); };
          return cdf(score) - cdf(score - 1);
        });
      }
    }
    const double exact = integrated_log_likelihood(terms, sigma);
    const double laplace = ordinal_log_likelihood(d, beta, tau, sigma);
    EXPECT_NEAR(laplace, exact, 0.01 * raters) << "trial " << trial;
  }
}

TEST(Ordinal, Study3RelevancyFavoursModel) {
  const auto all = parse_ratings(testing::read(testing::fixture("study3/ratings.tsv")));
  std::vector<RatingRecord> rel;
  std::copy_if(all.begin(), all.end(), std::back_inserter(rel),
               [](const auto& r) { return r.dimension == Dimension::Relevancy; });
  const auto fit = fit_ordinal_mixed(rel);
  ASSERT_TRUE(fit.converged);
  EXPECT_GT(fit.estimate, 0);
  EXPECT_LT(fit.p_value, 0.05);
  ASSERT_TRUE(fit.thresholds.has_value());
  EXPECT_TRUE(std::is_sorted(fit.thresholds->begin(), fit.thresholds->end(), std::less_equal<>()));
  for (std::size_t i = 1; i < fit.thresholds->size(); ++i) EXPECT_LT((*fit.thresholds)[i - 1], (*fit.thresholds)[i]);
  for (std::size_t i = 1; i < fit.trace.size(); ++i) EXPECT_GE(fit.trace[i], fit.trace[i - 1] - 1e-12);
  EXPECT_EQ(fit.odds_ratio, std::exp(fit.estimate));
}

TEST(Ordinal, Errors) {
  std::vector<RatingRecord> one_level;
  for (int r = 0; r < 3; ++r)
    one_level.push_back({"p" + std::to_string(r), "i", Source::Model, Dimension::Clarity, 4, 5});
  EXPECT_EQ(code_of([&] { (void)fit_ordinal_mixed(one_level); }), ErrorCode::DegenerateScale);

  auto mixed = oracle::toy_ratings();
  mixed[0].dimension = Dimension::Relevancy;
  EXPECT_ANY_THROW((void)fit_ordinal_mixed(mixed));
  auto scales = oracle::toy_ratings();
  scales[0].scale_size = 6;
  EXPECT_EQ(code_of([&] { (void)fit_ordinal_mixed(scales); }), ErrorCode::ScaleMismatch);
  RatingRecord bad{"p", "i", Source::Model, Dimension::Clarity, 7, 5};
  EXPECT_EQ(code_of([&] { validate(bad); }), ErrorCode::OutOfScaleScore);
}

// --- win/tie -------------------------------------------------------------------

TEST(WinTie, Study3Fixture) {
  const auto pairs = pair_ratings(parse_ratings(testing::read(testing::fixture("study3/ratings.tsv"))));
  const auto w = win_tie_rates(pairs);
  const auto& rel = w.at(Dimension::Relevancy);
  EXPECT_EQ(rel.pairs, 128u);
  EXPECT_EQ(rel.model_win.percent(), "59.4%");
  EXPECT_EQ(rel.human_win.percent(), "21.1%");
  EXPECT_EQ(rel.tie.percent(), "19.5%");
  EXPECT_NEAR(rel.model_mean, 4.4, 0.005);
  EXPECT_NEAR(rel.human_mean, 3.5, 0.005);
  EXPECT_EQ(w.at(Dimension::Clarity).model_win.percent(), "42.2%");
  EXPECT_EQ(w.at(Dimension::Informativeness).tie.percent(), "26.6%");
  for (const auto& [dim, row] : w) EXPECT_EQ(row.model_win + row.human_win + row.tie, Rational(1));
}

TEST(WinTie, TrivialCases) {
  std::vector<PairRating> ties{{"a", Dimension::Clarity, 3, 3, 5}, {"b", Dimension::Clarity, 1, 1, 5}};
  EXPECT_EQ(win_tie_rates(ties).at(Dimension::Clarity).tie, Rational(1));
  std::vector<PairRating> one{{"a", Dimension::Clarity, 5, 3, 5}};
  EXPECT_EQ(win_tie_rates(one).at(Dimension::Clarity).model_win, Rational(1));
  std::vector<PairRating> mixed{{"a", Dimension::Clarity, 5, 3, 5}, {"b", Dimension::Clarity, 5, 3, 6}};
  EXPECT_EQ(code_of([&] { (void)win_tie_rates(mixed); }), ErrorCode::ScaleMismatch);
}

TEST(WinTie, PairingNeedsCounterpart) {
  std::vector<RatingRecord> d{{"p", "i", Source::Model, Dimension::Clarity, 4, 5}};
  EXPECT_EQ(code_of([&] { (void)pair_ratings(d); }), ErrorCode::MissingCounterpart);
  d.push_back(d[0]);
  d.push_back({"p", "i", Source::Human, Dimension::Clarity, 4, 5});
  EXPECT_EQ(code_of([&] { (void)pair_ratings(d); }), ErrorCode::DuplicateResponse);
}

TEST(Formats, RoundTrip) {
  const auto c = parse_comparisons(testing::read(testing::fixture("study3/comparisons.tsv")));
  EXPECT_EQ(format_comparisons(parse_comparisons(format_comparisons(c))), format_comparisons(c));
  const auto r = parse_ratings(testing::read(testing::fixture("study1/ratings.tsv")));
  EXPECT_EQ(format_ratings(parse_ratings(format_ratings(r))), format_ratings(r));
  EXPECT_EQ(r.size(), 40u * 10 * 3);
}

}  // namespace
}  // namespace elicit::stats
