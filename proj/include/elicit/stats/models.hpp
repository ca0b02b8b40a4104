#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "elicit/rational.hpp"

namespace elicit::stats {

enum class Source { Model, Human };
enum class Dimension { Relevancy, Clarity, Informativeness };

std::string_view to_string(Source s) noexcept;
std::string_view to_string(Dimension d) noexcept;
Source parse_source(std::string_view token);
Dimension parse_dimension(std::string_view token);
const std::vector<Dimension>& all_dimensions();

struct PairedComparison {
  std::string rater_id;
  std::string pair_id;
  Source winner = Source::Model;
};

struct RatingRecord {
  std::string rater_id;
  std::string item_id;
  Source source = Source::Model;
  Dimension dimension = Dimension::Relevancy;
  int score = 1;
  int scale_size = 5;  // scores run 1..scale_size
};

/// Throws OutOfScaleScore.
void validate(const RatingRecord& r);

struct ModelFit {
  double estimate = 0;
  double odds_ratio = 1;
  double std_error = 0;
  double p_value = 1;
  double random_effect_sd = 0;
  std::optional<std::vector<double>> thresholds;
  bool converged = false;
  std::string diagnostics;
  double log_likelihood = 0;
  std::vector<double> trace;  // log-likelihood after each accepted outer step
  int iterations = 0;
  std::size_t observations = 0;
  std::size_t raters = 0;
};

struct FitOptions {
  /// Pin the random-effect SD instead of estimating it (0 gives the fixed-effect model).
  std::optional<double> fixed_sigma;
  int max_iterations = 500;
  double gradient_tolerance = 1e-7;
};

/// logit P(winner = MODEL) = beta + u_rater with u ~ N(0, sigma^2), Laplace ML.
/// Throws EmptyInput, CompleteSeparation or NonConvergence.
ModelFit fit_bt_mixed(std::span<const PairedComparison> data, const FitOptions& options = {});

/// Laplace-approximated marginal log-likelihood (sigma 0 is the fixed-effect likelihood).
double bt_log_likelihood(std::span<const PairedComparison> data, double beta, double sigma);

/// P(score <= j) = logistic(tau_j - beta * [source = MODEL] - u_rater), one
/// threshold per gap between observed score levels. Input must be a single
/// dimension on a single scale. Throws DegenerateScale, SampleTooSmall,
/// ScaleMismatch, InvalidParameter or NonConvergence.
ModelFit fit_ordinal_mixed(std::span<const RatingRecord> data, const FitOptions& options = {});

double ordinal_log_likelihood(std::span<const RatingRecord> data, double beta,
                              std::span<const double> thresholds, double sigma);

struct PairRating {
  std::string pair_id;
  Dimension dimension = Dimension::Relevancy;
  int model_score = 1;
  int human_score = 1;
  int scale_size = 5;
};

/// Matches MODEL and HUMAN ratings of the same (rater, item, dimension).
/// Throws MissingCounterpart or DuplicateResponse.
std::vector<PairRating> pair_ratings(std::span<const RatingRecord> records);

struct WinTie {
  Rational model_win;
  Rational human_win;
  Rational tie;
  double model_mean = 0;
  double human_mean = 0;
  std::size_t pairs = 0;
};

/// Throws ScaleMismatch when a dimension mixes scales or a score is off-scale.
std::map<Dimension, WinTie> win_tie_rates(std::span<const PairRating> ratings);

// TSV: rater_id, pair_id, winner
std::vector<PairedComparison> parse_comparisons(std::string_view tsv);
std::string format_comparisons(std::span<const PairedComparison> data);
// TSV: rater_id, item_id, source, dimension, score, scale_size
std::vector<RatingRecord> parse_ratings(std::string_view tsv);
std::string format_ratings(std::span<const RatingRecord> data);

nlohmann::json to_json(const ModelFit& fit);
nlohmann::json to_json(const WinTie& w);

}  // namespace elicit::stats
