#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "workload/csv.hpp"
#include "workload/fmt.hpp"
#include "workload/trace.hpp"

namespace wl::series {

// A uniformly indexed sequence of d-dimensional samples. Rows are time,
// columns are dimensions.
template <typename Scalar>
struct MultiSeriesT {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> values;
  std::vector<std::string> names;
  std::string meta;

  Eigen::Index dims() const { return values.cols(); }
  Eigen::Index size() const { return values.rows(); }
};
using MultiSeries = MultiSeriesT<double>;

struct FeatureVector {
  double interarrival_us = 0.0;
  double parallelism = 1.0;
  double cpu = 0.0;
  double ram = 0.0;
  double disk = 0.0;
};

inline constexpr std::int64_t kDefaultSlotUs = 300'000'000;  // 5 minutes

namespace detail {
inline void require_sorted(const std::vector<trace::JobRecord>& jobs, const char* op) {
  for (std::size_t i = 1; i < jobs.size(); ++i) {
    if (jobs[i].arrival_us < jobs[i - 1].arrival_us)
      throw std::invalid_argument(std::string(op) + ": jobs must be sorted by arrival");
  }
}
}  // namespace detail

// Inter-arrival sequence: first entry 0, then consecutive arrival gaps.
inline MultiSeries interarrival_series(const std::vector<trace::JobRecord>& jobs) {
  detail::require_sorted(jobs, "interarrival_series");
  MultiSeries s;
  s.names = {"interarrival_us"};
  s.meta = "interarrival";
  s.values.resize(static_cast<Eigen::Index>(jobs.size()), 1);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    s.values(static_cast<Eigen::Index>(i), 0) =
        i == 0 ? 0.0
               : static_cast<double>(jobs[i].arrival_us - jobs[i - 1].arrival_us);
  }
  return s;
}

// Per-slot componentwise sums of job requests; empty slots are zero vectors.
inline MultiSeries aggregate_requests(const std::vector<trace::JobRecord>& jobs,
                                      std::int64_t slot_us) {
  if (slot_us <= 0) throw std::invalid_argument("aggregate_requests: slot_us must be > 0");
  detail::require_sorted(jobs, "aggregate_requests");
  MultiSeries s;
  s.names = {"cpu", "ram", "disk"};
  s.meta = "aggregated_requests";
  if (jobs.empty()) {
    s.values.resize(0, 3);
    return s;
  }
  const std::int64_t slots = jobs.back().arrival_us / slot_us + 1;
  s.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(slots), 3);
  for (const auto& j : jobs) {
    const Eigen::Index k = static_cast<Eigen::Index>(j.arrival_us / slot_us);
    s.values(k, 0) += j.request.cpu;
    s.values(k, 1) += j.request.ram;
    s.values(k, 2) += j.request.disk;
  }
  return s;
}

inline std::vector<FeatureVector> feature_vectors(const std::vector<trace::JobRecord>& jobs) {
  MultiSeries gaps = interarrival_series(jobs);
  std::vector<FeatureVector> features(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    features[i] = {gaps.values(static_cast<Eigen::Index>(i), 0),
                   static_cast<double>(jobs[i].parallelism),
                   jobs[i].request.cpu, jobs[i].request.ram, jobs[i].request.disk};
  }
  return features;
}

inline MultiSeries feature_matrix(const std::vector<FeatureVector>& features) {
  MultiSeries s;
  s.names = {"interarrival_us", "parallelism", "cpu", "ram", "disk"};
  s.meta = "features";
  s.values.resize(static_cast<Eigen::Index>(features.size()), 5);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    s.values.row(static_cast<Eigen::Index>(i))
        << f.interarrival_us, f.parallelism, f.cpu, f.ram, f.disk;
  }
  return s;
}

// Per-dimension min-max map onto [0,1], fitted on a row range. Dimensions
// with max == min map to constant 0.
template <typename Scalar>
struct ScalerT {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mins;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> maxs;

  Eigen::Index dims() const { return mins.size(); }
};
using Scaler = ScalerT<double>;

template <typename Scalar>
ScalerT<Scalar> fit_scaler(const MultiSeriesT<Scalar>& s, Eigen::Index fit_begin,
                           Eigen::Index fit_end) {
  if (fit_begin < 0 || fit_end > s.size() || fit_begin >= fit_end)
    throw std::invalid_argument("fit_scaler: empty or out-of-range fit range");
  ScalerT<Scalar> scaler;
  auto block = s.values.middleRows(fit_begin, fit_end - fit_begin);
  scaler.mins = block.colwise().minCoeff();
  scaler.maxs = block.colwise().maxCoeff();
  return scaler;
}

template <typename Scalar>
ScalerT<Scalar> fit_scaler(const MultiSeriesT<Scalar>& s) {
  return fit_scaler(s, 0, s.size());
}

template <typename Scalar>
MultiSeriesT<Scalar> apply(const ScalerT<Scalar>& scaler, const MultiSeriesT<Scalar>& s) {
  if (scaler.dims() != s.dims()) throw std::invalid_argument("apply: dimension mismatch");
  MultiSeriesT<Scalar> out = s;
  for (Eigen::Index d = 0; d < s.dims(); ++d) {
    const Scalar span = scaler.maxs[d] - scaler.mins[d];
    if (span == Scalar(0)) {
      out.values.col(d).setZero();
    } else {
      out.values.col(d) = (s.values.col(d).array() - scaler.mins[d]) / span;
    }
  }
  return out;
}

template <typename Scalar>
MultiSeriesT<Scalar> invert(const ScalerT<Scalar>& scaler, const MultiSeriesT<Scalar>& s) {
  if (scaler.dims() != s.dims()) throw std::invalid_argument("invert: dimension mismatch");
  MultiSeriesT<Scalar> out = s;
  for (Eigen::Index d = 0; d < s.dims(); ++d) {
    const Scalar span = scaler.maxs[d] - scaler.mins[d];
    out.values.col(d) = s.values.col(d).array() * span + scaler.mins[d];
  }
  return out;
}

// Supervised one-step framing: input = lookback preceding rows, target = the
// next row.
template <typename Scalar>
struct WindowedDatasetT {
  std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> inputs;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> targets;  // one row per sample
  int lookback = 1;

  std::size_t size() const { return inputs.size(); }
};
using WindowedDataset = WindowedDatasetT<double>;

template <typename Scalar>
WindowedDatasetT<Scalar> window(const MultiSeriesT<Scalar>& s, int lookback,
                                int horizon = 1) {
  if (lookback < 1) throw std::invalid_argument("window: lookback must be >= 1");
  if (horizon < 1) throw std::invalid_argument("window: horizon must be >= 1");
  const Eigen::Index n = s.size() - lookback - horizon + 1;
  if (n < 1) throw std::invalid_argument("window: series too short for lookback");
  WindowedDatasetT<Scalar> ds;
  ds.lookback = lookback;
  ds.inputs.reserve(static_cast<std::size_t>(n));
  ds.targets.resize(n, s.dims());
  for (Eigen::Index i = 0; i < n; ++i) {
    ds.inputs.push_back(s.values.middleRows(i, lookback));
    ds.targets.row(i) = s.values.row(i + lookback + horizon - 1);
  }
  return ds;
}

inline void write_series_csv(std::ostream& out, const MultiSeries& s) {
  for (Eigen::Index d = 0; d < s.dims(); ++d)
    out << (d ? "," : "") << (d < static_cast<Eigen::Index>(s.names.size())
                                  ? s.names[static_cast<std::size_t>(d)]
                                  : "dim" + std::to_string(d));
  out << '\n';
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    for (Eigen::Index d = 0; d < s.dims(); ++d)
      out << (d ? "," : "") << fmt::shortest(s.values(i, d));
    out << '\n';
  }
}

inline MultiSeries read_series_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("series csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  MultiSeries s;
  for (auto name : csv::split(line)) s.names.emplace_back(name);
  const Eigen::Index d = static_cast<Eigen::Index>(s.names.size());
  std::vector<double> data;
  Eigen::Index rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = csv::split(line);
    if (static_cast<Eigen::Index>(fields.size()) != d)
      throw std::runtime_error("series csv: bad row '" + line + "'");
    for (auto f : fields) {
      auto v = csv::to_double(f);
      if (!v) throw std::runtime_error("series csv: bad value '" + std::string(f) + "'");
      data.push_back(*v);
    }
    ++rows;
  }
  s.values.resize(rows, d);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      s.values(i, j) = data[static_cast<std::size_t>(i * d + j)];
  return s;
}

}  // namespace wl::series
