#include "pulsehr/eval.hpp"

#include "pulsehr/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#ifdef __linux__
#include <sched.h>
#endif

namespace pulsehr::eval {

std::vector<double> ape(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size() || pred.empty())
    throw Error(ErrorCode::LengthMismatch, "prediction and truth lengths " +
                                               std::to_string(pred.size()) + " and " +
                                               std::to_string(truth.size()) +
                                               " must be equal and non-zero");
  std::vector<double> out(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(truth[i] > 0.0))
      throw Error(ErrorCode::NonPositiveTruth, "truth value must be positive", i);
    out[i] = 100.0 * std::abs(pred[i] - truth[i]) / truth[i];
  }
  return out;
}

double mape(std::span<const double> pred, std::span<const double> truth) {
  const auto errs = ape(pred, truth);
  return std::accumulate(errs.begin(), errs.end(), 0.0) / static_cast<double>(errs.size());
}

double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2)
    return 0.0;
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs)
    ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0));
}

SubjectSummary summarize_subjects(std::span<const double> mapes) {
  if (mapes.empty())
    throw Error(ErrorCode::EmptyList, "no subject MAPEs to summarize");
  SubjectSummary s;
  s.mapes.assign(mapes.begin(), mapes.end());
  s.mean = std::accumulate(mapes.begin(), mapes.end(), 0.0) / static_cast<double>(mapes.size());
  s.sd = sample_sd(mapes);
  return s;
}

LatencyStats latency_stats(std::vector<double> samples) {
  LatencyStats st;
  st.reps = samples.size();
  if (samples.empty())
    return st;
  st.mean_us = std::accumulate(samples.begin(), samples.end(), 0.0) /
               static_cast<double>(samples.size());
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  st.median_us = n % 2 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
  const auto rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(n)));
  st.p99_us = samples[std::max<std::size_t>(rank, 1) - 1];
  return st;
}

namespace {

// Pins the calling thread to the CPU it is running on; restores on scope exit.
class CpuPin {
public:
  CpuPin() {
#ifdef __linux__
    if (sched_getaffinity(0, sizeof(saved_), &saved_) != 0)
      return;
    const int cpu = sched_getcpu();
    if (cpu < 0)
      return;
    cpu_set_t one;
    CPU_ZERO(&one);
    CPU_SET(cpu, &one);
    pinned_ = sched_setaffinity(0, sizeof(one), &one) == 0;
#endif
  }
  ~CpuPin() {
#ifdef __linux__
    if (pinned_)
      sched_setaffinity(0, sizeof(saved_), &saved_);
#endif
  }
  CpuPin(const CpuPin&) = delete;
  CpuPin& operator=(const CpuPin&) = delete;

private:
#ifdef __linux__
  cpu_set_t saved_{};
#endif
  bool pinned_ = false;
};

} // namespace

LatencyStats bench_latency(const models::ModelArtifact& m, std::span<const double> probe,
                           std::size_t reps, std::size_t warmup) {
  if (reps < 100 || warmup < 100)
    throw Error(ErrorCode::InvalidConfig, "bench needs reps >= 100 and warmup >= 100");
  if (probe.size() != m.k())
    throw Error(ErrorCode::DimensionMismatch,
                "model expects " + std::to_string(m.k()) + " features, got " +
                    std::to_string(probe.size()));
  CpuPin pin;
  volatile double sink = 0.0;
  for (std::size_t i = 0; i < warmup; ++i)
    sink = sink + models::predict(m, probe);

  using clock = std::chrono::steady_clock;
  std::vector<double> samples(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    const auto start = clock::now();
    const double y = models::predict(m, probe);
    const auto stop = clock::now();
    sink = sink + y;
    samples[i] = std::chrono::duration<double, std::micro>(stop - start).count();
  }
  return latency_stats(std::move(samples));
}

std::vector<double> baseline_at(const dataset::FeatureMatrix& rows, const HrSeries& pphr) {
  std::vector<double> out(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    const double pos = (rows.time(i) - pphr.t0_s) * pphr.rate_hz;
    const double idx = std::round(pos);
    if (std::abs(pos - idx) > 1e-6 || idx < 0.0 || idx >= static_cast<double>(pphr.size()))
      throw Error(ErrorCode::AlignmentError,
                  "row time " + std::to_string(rows.time(i)) + " has no Stage-2 reading", i);
    out[i] = pphr.values[static_cast<std::size_t>(idx)];
  }
  return out;
}

namespace {

template <class Predict>
MetricsReport evaluate_with(const dataset::FeatureMatrix& test, const HrSeries& pphr,
                            Predict&& predict) {
  MetricsReport r;
  r.n_rows = test.rows();
  r.times = test.times();
  r.truth = test.labels();
  r.baseline = baseline_at(test, pphr);
  r.predicted.resize(test.rows());
  for (std::size_t i = 0; i < test.rows(); ++i)
    r.predicted[i] = predict(test.row(i));
  const auto errs = ape(r.predicted, r.truth);
  r.mape_pct = std::accumulate(errs.begin(), errs.end(), 0.0) / static_cast<double>(errs.size());
  r.ape_sd_pct = sample_sd(errs);
  r.baseline_mape_pct = mape(r.baseline, r.truth);
  return r;
}

} // namespace

MetricsReport evaluate(const models::ModelArtifact& m, const dataset::FeatureMatrix& test,
                       const HrSeries& pphr) {
  if (test.k() != m.k())
    throw Error(ErrorCode::DimensionMismatch,
                "model expects " + std::to_string(m.k()) + " features, test matrix has " +
                    std::to_string(test.k()));
  auto r = evaluate_with(test, pphr, [&](std::span<const double> x) { return models::predict(m, x); });
  r.model_size_bytes = models::model_size(m);
  return r;
}

MetricsReport evaluate_passthrough(const dataset::FeatureMatrix& test, const HrSeries& pphr) {
  return evaluate_with(test, pphr, [](std::span<const double> x) { return x.back(); });
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j = nlohmann::json::object();
  if (r.n_rows > 0) {
    j["mape_pct"] = r.mape_pct;
    j["ape_sd_pct"] = r.ape_sd_pct;
    j["n_rows"] = r.n_rows;
  }
  if (r.model_size_bytes)
    j["model_size_bytes"] = *r.model_size_bytes;
  if (r.latency) {
    j["latency_mean_us"] = r.latency->mean_us;
    j["latency_median_us"] = r.latency->median_us;
    j["latency_p99_us"] = r.latency->p99_us;
    j["reps"] = r.latency->reps;
  }
  if (r.baseline_mape_pct)
    j["baseline_mape_pct"] = *r.baseline_mape_pct;
  return j;
}

} // namespace pulsehr::eval
