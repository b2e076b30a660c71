// Acceptance suite: end-to-end checks of the toolkit's headline behaviors.
// Usage: acceptance <path-to-workload-lab-binary>
// Prints one PASS/FAIL/SKIP line per criterion; exits nonzero on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "workload/baseline.hpp"
#include "workload/birch.hpp"
#include "workload/evalx.hpp"
#include "workload/nnet.hpp"
#include "workload/series.hpp"
#include "workload/svg.hpp"
#include "workload/trace.hpp"

namespace fs = std::filesystem;
using namespace wl;

namespace {

int failures = 0;

void run_criterion(int id, const std::string& name, const std::function<std::string()>& body) {
  const auto start = std::chrono::steady_clock::now();
  std::string verdict;
  try {
    verdict = body();  // "" = pass, "SKIP: ..." = skip, anything else = failure detail
  } catch (const std::exception& e) {
    verdict = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream line;
  if (verdict.empty()) {
    line << "PASS " << id << ": " << name;
  } else if (verdict.rfind("SKIP", 0) == 0) {
    line << "SKIP " << id << ": " << name << " — " << verdict.substr(verdict.find(':') + 2);
  } else {
    line << "FAIL " << id << ": " << name << " — " << verdict;
    ++failures;
  }
  line.precision(1);
  line << std::fixed << " (" << secs << "s)";
  std::cout << line.str() << std::endl;
}

std::string fail(const std::string& detail) { return detail; }

// --------------------------------------------------------------------------
// 1. forecasting beats the AR baseline on a nonlinear synthetic series

std::string criterion_forecast() {
  const int n = 5000;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 1.0);
  series::MultiSeries s;
  s.values.resize(n, 1);
  for (int t = 0; t < n; ++t) {
    const double base = 3.0 + std::sin(0.61 * t) + std::sin(1.93 * t);
    s.values(t, 0) = base * (1.0 + 0.1 * noise(rng));
  }

  const int split = n * 8 / 10;
  const int lookback = 16;
  const int ar_order = 5;

  // network: fit the scaler on the training region only, train on windows
  // whose targets lie before the split
  auto scaler = series::fit_scaler(s, 0, split);
  auto normalized = series::apply(scaler, s);
  auto full = series::window(normalized, lookback);
  series::WindowedDataset train_set;
  train_set.lookback = lookback;
  const std::size_t n_train = static_cast<std::size_t>(split - lookback);
  train_set.inputs.assign(full.inputs.begin(),
                          full.inputs.begin() + static_cast<std::ptrdiff_t>(n_train));
  train_set.targets = full.targets.topRows(static_cast<Eigen::Index>(n_train));

  nnet::NetworkSpec spec;
  spec.variant = nnet::Variant::kUnivariate;
  spec.lookback = lookback;
  spec.hidden = {24, 24};
  spec.dropout_rate = 0.0;

  nnet::TrainConfig config;
  config.epochs = 50;
  config.learning_rate = 2e-3;
  config.batch_size = 32;
  config.seed = 7;
  config.validation_fraction = 0.1;
  auto result = nnet::train(spec, train_set, config);

  // determinism spot check on a short run
  {
    nnet::TrainConfig tiny = config;
    tiny.epochs = 2;
    auto a = nnet::train(spec, train_set, tiny);
    auto b = nnet::train(spec, train_set, tiny);
    for (std::size_t e = 0; e < a.history.size(); ++e)
      if (a.history[e].train != b.history[e].train || a.history[e].val != b.history[e].val)
        return fail("training is not bit-deterministic per seed");
  }

  auto ar = baseline::ar_fit(Eigen::VectorXd(s.values.col(0).head(split)), ar_order);

  const int n_test = n - split;
  Eigen::VectorXd truth(n_test), lstm_pred(n_test), ar_pred_v(n_test);
  for (int i = 0; i < n_test; ++i) {
    const int t = split + i;
    truth(i) = s.values(t, 0);
    lstm_pred(i) = nnet::predict(spec, result.params,
                                 s.values.middleRows(t - lookback, lookback), scaler)(0);
    ar_pred_v(i) =
        baseline::ar_predict(ar, s.values.col(0).segment(t - ar_order, ar_order));
  }
  const double lstm_rmse = baseline::error_metrics(lstm_pred, truth).rmse;
  const double ar_rmse = baseline::error_metrics(ar_pred_v, truth).rmse;
  const double improvement = baseline::relative_improvement(ar_rmse, lstm_rmse);
  if (improvement < 0.10)
    return fail("rmse improvement over AR(5) is " + std::to_string(improvement) +
                ", need >= 0.10 (lstm " + std::to_string(lstm_rmse) + ", ar " +
                std::to_string(ar_rmse) + ")");
  return "";
}

// --------------------------------------------------------------------------
// 2. gradient correctness against finite differences

std::string criterion_gradients() {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (int seed = 0; seed < 10; ++seed) {
    for (int variant = 0; variant < 2; ++variant) {
      nnet::NetworkSpec spec;
      spec.lookback = 5;
      spec.hidden = {8, 8};
      spec.dropout_rate = 0.0;
      if (variant == 1) {
        spec.variant = nnet::Variant::kMultivariate;
        spec.input_dims = spec.output_dims = 3;
        spec.conv_channels = 4;
      }
      auto params = nnet::init_params<double>(spec, static_cast<std::uint64_t>(seed));
      Eigen::MatrixXd window(5, spec.input_dims);
      for (Eigen::Index i = 0; i < window.size(); ++i) window.data()[i] = unit(rng);
      Eigen::VectorXd d_pred(spec.output_dims);
      for (Eigen::Index i = 0; i < d_pred.size(); ++i) d_pred(i) = unit(rng);
      const double err = oracle::gradient_check(spec, params, window, d_pred);
      if (err >= 1e-4)
        return fail("seed " + std::to_string(seed) + " variant " +
                    std::to_string(variant) + ": max relative error " + std::to_string(err));
    }
  }
  return "";
}

// --------------------------------------------------------------------------
// 3. agglomerative phase matches the brute-force oracle

std::string criterion_birch_oracle() {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> nd(2, 200), dd(1, 5);
    const int n = nd(rng), d = dd(rng);
    std::uniform_real_distribution<double> u(-4, 4);
    std::vector<birch::CfEntry> entries;
    Eigen::MatrixXd centroids(n, d);
    std::vector<double> weights(static_cast<std::size_t>(n), 1.0);
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd x(d);
      for (int j = 0; j < d; ++j) x(j) = u(rng);
      entries.push_back(birch::cf_from_point(x));
      centroids.row(i) = x.transpose();
    }
    auto dend = birch::global_cluster(entries);
    auto expected = oracle::agglomerative(centroids, weights);
    for (int k = 1; k <= n; ++k) {
      if (!oracle::same_partition(birch::cut(dend, k),
                                  oracle::cut_merges(n, expected, k)))
        return fail("trial " + std::to_string(trial) + ": cut mismatch at k=" +
                    std::to_string(k) + " (n=" + std::to_string(n) + ")");
    }
  }
  return "";
}

// --------------------------------------------------------------------------
// 4. CF conservation over randomized insertions

std::string criterion_cf_conservation() {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-10, 10);
  std::uniform_int_distribution<int> bl(3, 50);
  const int n = 10000, d = 4;
  for (int mode = 0; mode < 2; ++mode) {
    Eigen::MatrixXd points(n, d);
    for (Eigen::Index i = 0; i < points.size(); ++i) points.data()[i] = u(rng);
    const double threshold = mode == 0 ? 0.0 : birch::estimate_threshold(points);
    birch::CfTree tree(d, bl(rng), bl(rng), threshold);
    for (int i = 0; i < n; ++i) tree.insert(points.row(i).transpose());

    auto entries = tree.leaf_entries();
    long total = 0;
    birch::CfEntry merged;
    for (const auto& e : entries) {
      total += e.n;
      merged = birch::cf_merge(merged, e);
    }
    if (total != n)
      return fail("mode " + std::to_string(mode) + ": leaf counts sum to " +
                  std::to_string(total));
    auto root = tree.root_entry();
    if (root.n != n) return fail("root count " + std::to_string(root.n));
    const double scale = std::max(1.0, root.ls.norm());
    if ((root.ls - merged.ls).norm() > 1e-9 * scale ||
        std::abs(root.ss - merged.ss) > 1e-9 * std::max(1.0, std::abs(root.ss)))
      return fail("mode " + std::to_string(mode) + ": root CF drifts from the leaf merge");
  }
  return "";
}

// --------------------------------------------------------------------------
// 5. validity indices match brute-force oracles

std::string criterion_index_oracles() {
  // exact hand case
  Eigen::MatrixXd hand(4, 1);
  hand << 0, 2, 10, 12;
  std::vector<int> hand_labels{0, 0, 1, 1};
  if (evalx::davies_bouldin(hand, hand_labels) != 0.2)
    return fail("hand case {0,2},{10,12} is not exactly 0.2");

  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 100; ++trial) {
    std::uniform_int_distribution<int> nd(8, 500), dd(1, 5), kd(2, 8);
    const int n = nd(rng), d = dd(rng);
    int k = std::min(kd(rng), n);
    std::uniform_real_distribution<double> u(-3, 3);
    std::uniform_int_distribution<int> ld(0, k - 1);
    Eigen::MatrixXd points(n, d);
    for (Eigen::Index i = 0; i < points.size(); ++i) points.data()[i] = u(rng);
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int c = 0; c < k; ++c) labels[static_cast<std::size_t>(c)] = c;  // each nonempty
    for (int i = k; i < n; ++i) labels[static_cast<std::size_t>(i)] = ld(rng);

    const double got = evalx::davies_bouldin(points, labels);
    const double want = oracle::davies_bouldin(points, labels);
    if (std::abs(got - want) > 1e-9)
      return fail("dbi mismatch on trial " + std::to_string(trial));

    auto sil_e = evalx::silhouette(points, labels, evalx::DissimilarityMode::kEuclidean);
    auto want_e = oracle::silhouette(n, labels, [&](Eigen::Index a, Eigen::Index b) {
      return (points.row(a) - points.row(b)).norm();
    });
    auto q = evalx::quantize_config_for(points);
    auto sil_h = evalx::silhouette(points, labels, evalx::DissimilarityMode::kHamming, &q);
    auto want_h = oracle::silhouette(n, labels, [&](Eigen::Index a, Eigen::Index b) {
      int count = 0;
      for (Eigen::Index dim = 0; dim < d; ++dim)
        if (evalx::quantize(points(a, dim), q.lo(dim), q.hi(dim), q.bins) !=
            evalx::quantize(points(b, dim), q.lo(dim), q.hi(dim), q.bins))
          ++count;
      return static_cast<double>(count);
    });
    for (int i = 0; i < n; ++i) {
      if (std::abs(sil_e[static_cast<std::size_t>(i)] -
                   want_e[static_cast<std::size_t>(i)]) > 1e-9 ||
          std::abs(sil_h[static_cast<std::size_t>(i)] -
                   want_h[static_cast<std::size_t>(i)]) > 1e-9)
        return fail("silhouette mismatch on trial " + std::to_string(trial));
    }
  }
  return "";
}

// --------------------------------------------------------------------------
// 6. the index sweep recovers the true blob count

std::string criterion_model_selection() {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> jitter(0.0, 0.05);
    const int n = 2000, d = 5, k_true = 3;
    Eigen::MatrixXd points(n, d);
    std::vector<int> truth(static_cast<std::size_t>(n));
    std::uniform_int_distribution<int> pick(0, k_true - 1);
    for (int i = 0; i < n; ++i) {
      const int c = pick(rng);
      truth[static_cast<std::size_t>(i)] = c;
      for (int dim = 0; dim < d; ++dim)
        points(i, dim) = 0.2 + 0.3 * c + jitter(rng);  // centers 6+ sigmas apart
    }

    birch::CfTree tree(d, 50, 50, birch::estimate_threshold(points));
    for (int i = 0; i < n; ++i) tree.insert(points.row(i).transpose());
    auto entries = tree.leaf_entries();
    if (entries.size() < 2) return fail("degenerate tree");
    auto dend = birch::global_cluster(entries);
    const int k_hi = std::min<int>(31, static_cast<int>(entries.size()));
    auto sweep = evalx::dbi_sweep(dend, points, entries, 2, k_hi);
    if (sweep.best_k != k_true)
      return fail("seed " + std::to_string(seed) + ": sweep selected k=" +
                  std::to_string(sweep.best_k));
    auto labels = birch::assign(points, birch::cut(dend, sweep.best_k), entries);
    const double ri = oracle::rand_index(labels, truth);
    if (ri < 0.95)
      return fail("seed " + std::to_string(seed) + ": rand index " + std::to_string(ri));
  }
  return "";
}

// --------------------------------------------------------------------------
// 7. series identities over randomized job sets

std::string criterion_series_identities() {
  std::mt19937_64 rng(71);
  std::uniform_int_distribution<int> len(1, 50);
  std::uniform_int_distribution<std::int64_t> gap(0, 100000);
  std::uniform_real_distribution<double> res(0, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<trace::JobRecord> jobs;
    std::int64_t t = gap(rng);
    const int n = len(rng);
    Eigen::Vector3d total = Eigen::Vector3d::Zero();
    for (int i = 0; i < n; ++i) {
      trace::JobRecord j{static_cast<std::uint64_t>(i + 1), t, 1,
                         {res(rng), res(rng), res(rng)}};
      total += Eigen::Vector3d(j.request.cpu, j.request.ram, j.request.disk);
      jobs.push_back(j);
      t += gap(rng);
    }

    auto gaps = series::interarrival_series(jobs);
    std::int64_t acc = jobs[0].arrival_us;
    for (std::size_t i = 1; i < jobs.size(); ++i) {
      acc += static_cast<std::int64_t>(gaps.values(static_cast<Eigen::Index>(i), 0));
      if (acc != jobs[i].arrival_us)
        return fail("interval reconstruction drifts on trial " + std::to_string(trial));
    }

    auto agg = series::aggregate_requests(jobs, 7000);
    Eigen::Vector3d sums = agg.values.colwise().sum().transpose();
    if ((sums - total).norm() > 1e-9 * std::max(1.0, total.norm()))
      return fail("aggregation loses mass on trial " + std::to_string(trial));
  }
  return "";
}

// --------------------------------------------------------------------------
// 8. the CLI pipeline is byte-deterministic end to end

bool run_cmd(const std::string& cmd) { return std::system(cmd.c_str()) == 0; }

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string criterion_cli_determinism(const std::string& binary) {
  const fs::path base = fs::temp_directory_path() / "workload-lab-acceptance";
  fs::remove_all(base);
  auto pipeline = [&](const fs::path& dir) -> std::string {
    fs::create_directories(dir);
    const std::string cd = "cd '" + dir.string() + "' && '" + binary + "' ";
    const std::vector<std::string> steps = {
        "synth --count 400 --clusters 3 --rate 2 --seed 42 --out-labels labels_true.csv",
        "ingest --job-events job_events.csv --task-events task_events.csv --out jobs.csv",
        "series --jobs jobs.csv --kind requests --slot-us 5000000 --out requests.csv",
        "train --series requests.csv --lookback 8 --hidden1 16 --hidden2 16 --epochs 5 "
        "--seed 42 --out model.json --plot-loss loss.svg",
        "predict --model model.json --series requests.csv --out predictions.csv "
        "--plot prediction.svg",
        "cluster --jobs jobs.csv --k 0 --out report.json --labels-out labels.csv "
        "--dendrogram-svg dendrogram.svg --dendrogram-csv dendrogram.csv "
        "--silhouette-svg silhouette.svg",
        "evaluate --jobs jobs.csv --out sweep.csv --plot dbi.svg",
        "report --report report.json --task-events task_events.csv --out subtasks.json "
        "--scatter-svg scatter.svg --scatter-csv scatter.csv",
    };
    for (const auto& step : steps)
      if (!run_cmd(cd + step + " > /dev/null")) return "step failed: " + step;
    return "";
  };

  if (auto err = pipeline(base / "a"); !err.empty()) return fail(err);
  if (auto err = pipeline(base / "b"); !err.empty()) return fail(err);

  const std::vector<std::string> outputs = {
      "report.json",    "subtasks.json", "loss.svg",  "prediction.svg", "dendrogram.svg",
      "silhouette.svg", "dbi.svg",       "scatter.svg", "sweep.csv",    "labels.csv",
  };
  for (const auto& name : outputs) {
    const auto a = read_file(base / "a" / name);
    const auto b = read_file(base / "b" / name);
    if (a.empty()) return fail(name + " is empty or missing");
    if (a != b) return fail(name + " differs between runs");
  }
  fs::remove_all(base);
  return "";
}

// --------------------------------------------------------------------------
// 9. optional smoke test on user-supplied real trace shards

std::string criterion_real_trace() {
  const char* job_path = std::getenv("WORKLOAD_LAB_JOB_EVENTS");
  const char* task_path = std::getenv("WORKLOAD_LAB_TASK_EVENTS");
  if (!job_path || !task_path)
    return "SKIP: set WORKLOAD_LAB_JOB_EVENTS and WORKLOAD_LAB_TASK_EVENTS to real "
           "trace shards to enable";
  std::ifstream job_in(job_path), task_in(task_path);
  if (!job_in || !task_in) return fail("trace shard paths are not readable");

  auto job_events = trace::parse_job_events(job_in);
  auto task_events = trace::parse_task_events(task_in);
  auto jobs = trace::assemble_jobs(job_events, task_events);
  if (jobs.empty()) return fail("no jobs assembled from the shards");
  jobs = trace::sample_jobs(jobs, 0.1, 7);
  if (jobs.empty()) return fail("subsample is empty");

  auto features = series::feature_matrix(series::feature_vectors(jobs));
  auto scaler = series::fit_scaler(features);
  Eigen::MatrixXd points = series::apply(scaler, features).values;
  birch::CfTree tree(5, 50, 50, birch::estimate_threshold(points));
  for (Eigen::Index i = 0; i < points.rows(); ++i) tree.insert(points.row(i).transpose());
  auto entries = tree.leaf_entries();
  auto dend = birch::global_cluster(entries);

  const fs::path dir = fs::temp_directory_path() / "workload-lab-real-trace";
  fs::create_directories(dir);
  svg::dendrogram((dir / "dendrogram.svg").string(), "real trace dendrogram", dend);

  const int k_hi = std::min<int>(31, static_cast<int>(entries.size()));
  if (k_hi < 2) return fail("too few leaf entries for a sweep");
  auto sweep = evalx::dbi_sweep(dend, points, entries, 2, k_hi);
  svg::Polyline curve{"dbi", {}, {}};
  for (std::size_t i = 0; i < sweep.ks.size(); ++i) {
    if (!std::isfinite(sweep.dbi[i])) continue;
    curve.x.push_back(sweep.ks[i]);
    curve.y.push_back(sweep.dbi[i]);
  }
  svg::line_chart((dir / "dbi.svg").string(), "davies-bouldin by cluster count", {curve});

  auto labels = birch::assign(points, birch::cut(dend, sweep.best_k), entries);
  auto summaries = evalx::cluster_summary(features.values, labels);
  long total = 0;
  for (const auto& s : summaries) total += s.count;
  if (total != static_cast<long>(jobs.size())) return fail("summary counts do not partition");
  std::cout << "  (real trace: " << jobs.size() << " sampled jobs, best k "
            << sweep.best_k << ", artifacts in " << dir.string() << ")\n";
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-workload-lab>\n";
    return 2;
  }
  const std::string binary = fs::absolute(argv[1]).string();

  run_criterion(1, "univariate forecaster beats AR(5) by >= 10% test RMSE",
                criterion_forecast);
  run_criterion(2, "BPTT gradients match finite differences on both variants",
                criterion_gradients);
  run_criterion(3, "BIRCH global phase matches the agglomerative oracle for all k",
                criterion_birch_oracle);
  run_criterion(4, "CF statistics are conserved across 10,000 insertions",
                criterion_cf_conservation);
  run_criterion(5, "validity indices match brute-force oracles", criterion_index_oracles);
  run_criterion(6, "index sweep selects the true blob count with rand index >= 0.95",
                criterion_model_selection);
  run_criterion(7, "interval reconstruction and slot aggregation identities",
                criterion_series_identities);
  run_criterion(8, "CLI pipeline outputs are byte-identical across runs",
                [&] { return criterion_cli_determinism(binary); });
  run_criterion(9, "real-trace smoke test", criterion_real_trace);

  return failures == 0 ? 0 : 1;
}
