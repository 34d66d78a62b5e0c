#pragma once

#include "pulsehr/dataset.hpp"
#include "pulsehr/models/artifact.hpp"
#include "pulsehr/signal_model.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace pulsehr::eval {

/// 100 * mean(|pred - truth| / truth). Throws LengthMismatch, NonPositiveTruth.
double mape(std::span<const double> pred, std::span<const double> truth);

/// Per-row absolute percentage errors.
std::vector<double> ape(std::span<const double> pred, std::span<const double> truth);

/// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_sd(std::span<const double> xs);

struct SubjectSummary {
  std::vector<double> mapes;
  double mean = 0.0;
  double sd = 0.0;
};

/// Throws EmptyList.
SubjectSummary summarize_subjects(std::span<const double> mapes);

struct LatencyStats {
  double mean_us = 0.0;
  double median_us = 0.0;
  double p99_us = 0.0;
  std::size_t reps = 0;
};

/// Times `reps` single predictions after `warmup` untimed ones, pinned to
/// the current CPU where supported. Throws InvalidConfig when reps or
/// warmup is below 100, DimensionMismatch on a wrong-length probe.
LatencyStats bench_latency(const models::ModelArtifact& m, std::span<const double> probe,
                           std::size_t reps = 10'000, std::size_t warmup = 1'000);

/// Median and nearest-rank 99th percentile of a sample, in the input unit.
LatencyStats latency_stats(std::vector<double> samples_us);

struct MetricsReport {
  double mape_pct = 0.0;
  double ape_sd_pct = 0.0;
  std::size_t n_rows = 0;
  std::optional<std::size_t> model_size_bytes;
  std::optional<LatencyStats> latency;
  std::optional<double> baseline_mape_pct;
  /// Row-aligned series kept for trace output; not part of the JSON.
  std::vector<double> times, truth, predicted, baseline;
};

/// Stage-2 reading at each row's label time. Throws AlignmentError when a
/// time is not on the 1 Hz grid of `pphr` or outside it.
std::vector<double> baseline_at(const dataset::FeatureMatrix& rows, const HrSeries& pphr);

/// Scores the model on `test` against truth labels, and the Stage-2 series
/// at the same times as the baseline.
MetricsReport evaluate(const models::ModelArtifact& m, const dataset::FeatureMatrix& test,
                       const HrSeries& pphr);

/// The "predict the newest feature" model, which reproduces the baseline.
MetricsReport evaluate_passthrough(const dataset::FeatureMatrix& test, const HrSeries& pphr);

/// Flat metrics object; optional fields are omitted when absent, and the
/// accuracy fields when n_rows is 0 (latency-only reports).
nlohmann::json to_json(const MetricsReport& r);

} // namespace pulsehr::eval
