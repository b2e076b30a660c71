// workload-lab: trace analytics pipeline
//   synth -> ingest -> series -> train/predict -> cluster -> evaluate -> report
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "workload/baseline.hpp"
#include "workload/birch.hpp"
#include "workload/evalx.hpp"
#include "workload/fmt.hpp"
#include "workload/model_io.hpp"
#include "workload/nnet.hpp"
#include "workload/series.hpp"
#include "workload/svg.hpp"
#include "workload/trace.hpp"

namespace {

using namespace wl;

std::uint64_t env_seed() {
  const char* e = std::getenv("WORKLOAD_LAB_SEED");
  if (!e) return 0;
  try {
    return std::stoull(e);
  } catch (const std::exception&) {
    throw std::runtime_error("WORKLOAD_LAB_SEED is not a number: " + std::string(e));
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read input file: " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file: " + path);
  return out;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vector_from(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = j[static_cast<std::size_t>(i)];
  return v;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  trace::SynthConfig config;
  std::string out_job_events = "job_events.csv";
  std::string out_task_events = "task_events.csv";
  std::string out_labels;
};

int run_synth(const SynthArgs& args) {
  auto synthetic = trace::synth_trace(args.config);
  {
    auto out = open_output(args.out_job_events);
    trace::write_job_events_csv(out, synthetic.job_events);
  }
  {
    auto out = open_output(args.out_task_events);
    trace::write_task_events_csv(out, synthetic.task_events);
  }
  if (!args.out_labels.empty()) {
    auto out = open_output(args.out_labels);
    out << "job_id,label\n";
    for (std::size_t i = 0; i < synthetic.labels.size(); ++i)
      out << (i + 1) << ',' << synthetic.labels[i] << '\n';
  }
  std::cout << "synth: " << args.config.n_jobs << " jobs, "
            << synthetic.task_events.size() << " task events\n";
  return 0;
}

// ---------------------------------------------------------------------------
// ingest

struct IngestArgs {
  std::string job_events;
  std::string task_events;
  std::string schema;
  std::string aggregate = "sum";
  double sample_fraction = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

int run_ingest(const IngestArgs& args) {
  trace::JobEventSchema job_schema;
  trace::TaskEventSchema task_schema;
  if (!args.schema.empty()) {
    auto in = open_input(args.schema);
    trace::load_schema_config(in, &job_schema, &task_schema);
  }

  trace::ParseReport job_report, task_report;
  auto job_in = open_input(args.job_events);
  auto job_events = trace::parse_job_events(job_in, job_schema, &job_report);
  auto task_in = open_input(args.task_events);
  auto task_events = trace::parse_task_events(task_in, task_schema, &task_report);

  const auto aggregate = args.aggregate == "max" ? trace::RequestAggregate::kMax
                                                 : trace::RequestAggregate::kSum;
  trace::AssembleReport assemble_report;
  auto jobs = trace::assemble_jobs(job_events, task_events, aggregate, &assemble_report);
  if (args.sample_fraction < 1.0)
    jobs = trace::sample_jobs(jobs, args.sample_fraction, args.seed);

  auto out = open_output(args.out);
  trace::write_jobs_csv(out, jobs);
  std::cout << "ingest: " << job_report.rows << " job rows (" << job_report.dropped
            << " dropped), " << task_report.rows << " task rows ("
            << task_report.dropped << " dropped), " << jobs.size() << " jobs ("
            << assemble_report.jobs_excluded << " excluded)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// series

struct SeriesArgs {
  std::string jobs;
  std::string kind = "requests";
  std::int64_t slot_us = series::kDefaultSlotUs;
  std::string out;
};

int run_series(const SeriesArgs& args) {
  auto in = open_input(args.jobs);
  auto jobs = trace::read_jobs_csv(in);
  series::MultiSeries s;
  if (args.kind == "interarrival") {
    s = series::interarrival_series(jobs);
  } else if (args.kind == "requests") {
    s = series::aggregate_requests(jobs, args.slot_us);
  } else if (args.kind == "features") {
    s = series::feature_matrix(series::feature_vectors(jobs));
  } else {
    throw std::runtime_error("unknown series kind: " + args.kind);
  }
  auto out = open_output(args.out);
  series::write_series_csv(out, s);
  std::cout << "series: " << s.size() << " x " << s.dims() << " (" << args.kind << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string series_path;
  int lookback = 32;
  int hidden1 = 64;
  int hidden2 = 64;
  double dropout = 0.2;
  std::string activation = "relu";
  std::string optimizer = "adam";
  int conv_width = 3;
  int conv_channels = 16;
  int epochs = 150;
  double learning_rate = 1e-3;
  int batch_size = 32;
  double val_fraction = 0.1;
  std::uint64_t seed = 0;
  std::string out;
  std::string plot_loss;
};

nnet::NetworkSpec spec_for(const TrainArgs& args, Eigen::Index dims) {
  nnet::NetworkSpec spec;
  if (dims == 1) {
    spec.variant = nnet::Variant::kUnivariate;
  } else if (dims == 3) {
    spec.variant = nnet::Variant::kMultivariate;
    spec.conv_kernel_width = args.conv_width;
    spec.conv_channels = args.conv_channels;
  } else {
    throw std::runtime_error("train: series must have 1 or 3 dimensions, got " +
                             std::to_string(dims));
  }
  spec.input_dims = spec.output_dims = static_cast<int>(dims);
  spec.lookback = args.lookback;
  spec.hidden = {args.hidden1, args.hidden2};
  spec.dropout_rate = args.dropout;
  if (args.activation == "relu") spec.activation = nnet::Activation::kRelu;
  else if (args.activation == "tanh") spec.activation = nnet::Activation::kTanh;
  else if (args.activation == "identity") spec.activation = nnet::Activation::kIdentity;
  else throw std::runtime_error("unknown activation: " + args.activation);
  return spec;
}

int run_train(const TrainArgs& args) {
  auto in = open_input(args.series_path);
  auto s = series::read_series_csv(in);
  auto spec = spec_for(args, s.dims());

  // The scaler is fitted on the chronological training prefix only, so the
  // validation tail never leaks into normalization.
  const Eigen::Index fit_end =
      std::max<Eigen::Index>(1, s.size() - static_cast<Eigen::Index>(
                                               args.val_fraction * static_cast<double>(s.size())));
  auto scaler = series::fit_scaler(s, 0, fit_end);
  auto normalized = series::apply(scaler, s);
  auto dataset = series::window(normalized, args.lookback);

  nnet::TrainConfig config;
  config.epochs = args.epochs;
  config.learning_rate = args.learning_rate;
  config.batch_size = args.batch_size;
  config.seed = args.seed;
  config.validation_fraction = args.val_fraction;
  config.optimizer =
      args.optimizer == "sgd" ? nnet::Optimizer::kSgd : nnet::Optimizer::kAdam;

  auto result = nnet::train(spec, dataset, config);

  nnet::Model model{spec, result.params, scaler, result.history};
  nnet::save_model(args.out, model);

  if (!args.plot_loss.empty()) {
    svg::Polyline train_line{"train", {}, {}}, val_line{"validation", {}, {}};
    for (std::size_t e = 0; e < result.history.size(); ++e) {
      train_line.x.push_back(static_cast<double>(e + 1));
      train_line.y.push_back(result.history[e].train);
      val_line.x.push_back(static_cast<double>(e + 1));
      val_line.y.push_back(result.history[e].val);
    }
    svg::line_chart(args.plot_loss, "training loss", {train_line, val_line});
  }
  std::cout << "train: " << dataset.size() << " windows, " << args.epochs
            << " epochs, final train loss "
            << fmt::shortest(result.history.back().train) << ", val loss "
            << fmt::shortest(result.history.back().val) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
  std::string model;
  std::string series_path;
  int ar_order = 0;       // > 0 adds an autoregressive baseline comparison
  double split = 0.8;     // train/test boundary for the comparison
  std::string out;
  std::string metrics_out;
  std::string plot;
};

int run_predict(const PredictArgs& args) {
  auto model = nnet::load_model(args.model);
  auto in = open_input(args.series_path);
  auto s = series::read_series_csv(in);
  if (s.dims() != model.spec.input_dims)
    throw std::runtime_error("predict: series has " + std::to_string(s.dims()) +
                             " dimensions, model expects " +
                             std::to_string(model.spec.input_dims));
  const int lookback = model.spec.lookback;
  if (s.size() <= lookback)
    throw std::runtime_error("predict: series shorter than the model lookback");

  const Eigen::Index n_pred = s.size() - lookback;
  Eigen::MatrixXd predicted(n_pred, s.dims());
  for (Eigen::Index t = 0; t < n_pred; ++t)
    predicted.row(t) =
        nnet::predict(model.spec, model.params, s.values.middleRows(t, lookback),
                      model.scaler).transpose();
  Eigen::MatrixXd actual = s.values.bottomRows(n_pred);

  {
    auto out = open_output(args.out);
    out << "t";
    for (const auto& name : s.names) out << ",pred_" << name << ",actual_" << name;
    out << '\n';
    for (Eigen::Index t = 0; t < n_pred; ++t) {
      out << (t + lookback);
      for (Eigen::Index d = 0; d < s.dims(); ++d)
        out << ',' << fmt::shortest(predicted(t, d)) << ','
            << fmt::shortest(actual(t, d));
      out << '\n';
    }
  }

  nlohmann::json metrics;
  auto lstm_all = baseline::error_metrics(predicted, actual);
  metrics["lstm"] = {{"mse", lstm_all.mse}, {"rmse", lstm_all.rmse}, {"mae", lstm_all.mae}};

  if (args.ar_order > 0) {
    if (args.split <= 0 || args.split >= 1)
      throw std::runtime_error("predict: --split must be in (0,1)");
    const Eigen::Index boundary = static_cast<Eigen::Index>(
        args.split * static_cast<double>(s.size()));
    if (boundary <= args.ar_order || boundary >= s.size())
      throw std::runtime_error("predict: split leaves no usable train/test region");

    const Eigen::Index n_test = s.size() - boundary;
    Eigen::MatrixXd ar_pred(n_test, s.dims());
    for (Eigen::Index d = 0; d < s.dims(); ++d) {
      auto ar = baseline::ar_fit(Eigen::VectorXd(s.values.col(d).head(boundary)),
                                 args.ar_order);
      for (Eigen::Index t = 0; t < n_test; ++t)
        ar_pred(t, d) = baseline::ar_predict(
            ar, s.values.col(d).segment(boundary + t - args.ar_order, args.ar_order));
    }
    Eigen::MatrixXd test_actual = s.values.bottomRows(n_test);
    Eigen::MatrixXd lstm_test = predicted.bottomRows(n_test);
    auto ar_m = baseline::error_metrics(ar_pred, test_actual);
    auto lstm_m = baseline::error_metrics(lstm_test, test_actual);
    metrics["test"] = {
        {"split", args.split},
        {"ar_order", args.ar_order},
        {"ar", {{"mse", ar_m.mse}, {"rmse", ar_m.rmse}, {"mae", ar_m.mae}}},
        {"lstm", {{"mse", lstm_m.mse}, {"rmse", lstm_m.rmse}, {"mae", lstm_m.mae}}},
        {"rmse_improvement", baseline::relative_improvement(ar_m.rmse, lstm_m.rmse)},
    };
  }
  if (!args.metrics_out.empty()) write_json(args.metrics_out, metrics);

  if (!args.plot.empty()) {
    svg::Polyline truth{"actual", {}, {}}, pred{"predicted", {}, {}};
    for (Eigen::Index t = 0; t < n_pred; ++t) {
      truth.x.push_back(static_cast<double>(t + lookback));
      truth.y.push_back(actual(t, 0));
      pred.x.push_back(static_cast<double>(t + lookback));
      pred.y.push_back(predicted(t, 0));
    }
    svg::line_chart(args.plot, "prediction vs truth", {truth, pred});
  }

  std::cout << "predict: " << n_pred << " predictions, rmse "
            << fmt::shortest(lstm_all.rmse) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// shared clustering pipeline

struct BirchArgs {
  int branching = 50;
  int leaf_capacity = 50;
  double threshold = -1.0;  // < 0 selects the auto estimate
};

struct ClusterPipeline {
  std::vector<trace::JobRecord> jobs;
  series::Scaler scaler;
  Eigen::MatrixXd points;  // normalized 5-D job features
  std::vector<birch::CfEntry> entries;
  birch::Dendrogram dendrogram;
  double threshold = 0.0;
};

ClusterPipeline build_pipeline(const std::string& jobs_path, const BirchArgs& args) {
  ClusterPipeline p;
  auto in = open_input(jobs_path);
  p.jobs = trace::read_jobs_csv(in);
  if (p.jobs.empty()) throw std::runtime_error("no jobs in " + jobs_path);

  auto features = series::feature_matrix(series::feature_vectors(p.jobs));
  p.scaler = series::fit_scaler(features);
  p.points = series::apply(p.scaler, features).values;

  p.threshold = args.threshold >= 0 ? args.threshold : birch::estimate_threshold(p.points);
  birch::CfTree tree(static_cast<int>(p.points.cols()), args.branching,
                     args.leaf_capacity, p.threshold);
  for (Eigen::Index i = 0; i < p.points.rows(); ++i)
    tree.insert(p.points.row(i).transpose());
  p.entries = tree.leaf_entries();
  p.dendrogram = birch::global_cluster(p.entries);
  return p;
}

// ---------------------------------------------------------------------------
// cluster

struct ClusterArgs {
  std::string jobs;
  BirchArgs birch;
  int k = 0;  // 0 selects k by the index sweep
  std::string mode = "euclidean";
  long min_cluster_size = 2;
  std::string out;
  std::string labels_out;
  std::string dendrogram_svg;
  std::string dendrogram_csv;
  std::string silhouette_svg;
};

evalx::DissimilarityMode mode_for(const std::string& name) {
  if (name == "euclidean") return evalx::DissimilarityMode::kEuclidean;
  if (name == "hamming") return evalx::DissimilarityMode::kHamming;
  throw std::runtime_error("unknown dissimilarity mode: " + name);
}

int run_cluster(const ClusterArgs& args) {
  auto p = build_pipeline(args.jobs, args.birch);
  const int n_entries = static_cast<int>(p.entries.size());

  int k = args.k;
  if (k == 0) {
    if (n_entries < 2) throw std::runtime_error("cluster: not enough entries to sweep k");
    auto sweep = evalx::dbi_sweep(p.dendrogram, p.points, p.entries, 2,
                                  std::min(31, n_entries));
    k = sweep.best_k;
  }
  if (k < 1 || k > n_entries)
    throw std::runtime_error("cluster: k out of range 1.." + std::to_string(n_entries));

  auto entry_labels = birch::cut(p.dendrogram, k);
  auto labels = birch::assign(p.points, entry_labels, p.entries);
  const auto mode = mode_for(args.mode);

  double dbi = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> sil;
  try {
    dbi = evalx::davies_bouldin(p.points, labels);
    sil = evalx::silhouette(p.points, labels, mode);
  } catch (const std::invalid_argument&) {
    // degenerate labelling (k=1 or an empty assigned cluster); indices omitted
  }
  double sil_mean = 0.0;
  for (double v : sil) sil_mean += v;
  if (!sil.empty()) sil_mean /= static_cast<double>(sil.size());

  auto features = series::feature_matrix(series::feature_vectors(p.jobs));
  auto summaries = evalx::cluster_summary(features.values, labels, args.min_cluster_size);

  // normalized per-cluster centroids, needed later to place subtasks
  std::vector<birch::CfEntry> merged(static_cast<std::size_t>(k));
  for (std::size_t e = 0; e < p.entries.size(); ++e) {
    auto& slot = merged[static_cast<std::size_t>(entry_labels[e])];
    slot = birch::cf_merge(slot, p.entries[e]);
  }
  Eigen::MatrixXd centroids(k, p.points.cols());
  for (int c = 0; c < k; ++c)
    centroids.row(c) = birch::cf_centroid(merged[static_cast<std::size_t>(c)]).transpose();

  nlohmann::json report;
  report["format"] = "workload-lab-report/1";
  report["k"] = k;
  report["threshold"] = p.threshold;
  report["mode"] = args.mode;
  if (std::isfinite(dbi)) report["dbi"] = dbi;
  report["silhouette_mean"] = sil_mean;
  report["scaler"] = {{"mins", vector_json(p.scaler.mins)},
                      {"maxs", vector_json(p.scaler.maxs)}};
  nlohmann::json centroid_rows = nlohmann::json::array();
  for (int c = 0; c < k; ++c) centroid_rows.push_back(vector_json(centroids.row(c).transpose()));
  report["centroids"] = std::move(centroid_rows);
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& summary : summaries) {
    nlohmann::json stats = nlohmann::json::array();
    for (Eigen::Index d = 0; d < summary.stats.rows(); ++d)
      stats.push_back({{"feature", features.names[static_cast<std::size_t>(d)]},
                       {"min", summary.stats(d, 0)},
                       {"median", summary.stats(d, 1)},
                       {"max", summary.stats(d, 2)}});
    clusters.push_back({{"label", summary.label},
                        {"count", summary.count},
                        {"outlier", summary.outlier},
                        {"stats", std::move(stats)}});
  }
  report["clusters"] = std::move(clusters);
  nlohmann::json label_rows = nlohmann::json::array();
  for (std::size_t i = 0; i < labels.size(); ++i)
    label_rows.push_back({{"job_id", p.jobs[i].job_id}, {"label", labels[i]}});
  report["labels"] = std::move(label_rows);
  write_json(args.out, report);

  if (!args.labels_out.empty()) {
    auto out = open_output(args.labels_out);
    out << "job_id,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i)
      out << p.jobs[i].job_id << ',' << labels[i] << '\n';
  }
  if (!args.dendrogram_csv.empty()) {
    auto out = open_output(args.dendrogram_csv);
    out << "left,right,distance,new_id\n";
    for (const auto& m : p.dendrogram.merges)
      out << m.left << ',' << m.right << ',' << fmt::shortest(m.distance) << ','
          << m.id << '\n';
  }
  if (!args.dendrogram_svg.empty())
    svg::dendrogram(args.dendrogram_svg, "cluster dendrogram", p.dendrogram);
  if (!args.silhouette_svg.empty() && !sil.empty())
    svg::silhouette_bands(args.silhouette_svg, "silhouette", sil, labels);

  std::cout << "cluster: k=" << k << ", " << p.entries.size() << " leaf entries, dbi "
            << (std::isfinite(dbi) ? fmt::shortest(dbi) : std::string("n/a"))
            << ", mean silhouette " << fmt::shortest(sil_mean) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate (cluster-count selection)

struct EvaluateArgs {
  std::string jobs;
  BirchArgs birch;
  int k_lo = 2;
  int k_hi = 31;
  std::string out;
  std::string plot;
};

int run_evaluate(const EvaluateArgs& args) {
  auto p = build_pipeline(args.jobs, args.birch);
  const int n_entries = static_cast<int>(p.entries.size());
  const int k_hi = std::min(args.k_hi, n_entries);
  if (args.k_lo < 2 || k_hi < args.k_lo)
    throw std::runtime_error("evaluate: invalid k range for " +
                             std::to_string(n_entries) + " entries");
  auto sweep = evalx::dbi_sweep(p.dendrogram, p.points, p.entries, args.k_lo, k_hi);

  {
    auto out = open_output(args.out);
    out << "k,dbi\n";
    for (std::size_t i = 0; i < sweep.ks.size(); ++i)
      out << sweep.ks[i] << ','
          << (std::isfinite(sweep.dbi[i]) ? fmt::shortest(sweep.dbi[i])
                                          : std::string("inf"))
          << '\n';
  }
  if (!args.plot.empty()) {
    svg::Polyline curve{"dbi", {}, {}};
    for (std::size_t i = 0; i < sweep.ks.size(); ++i) {
      if (!std::isfinite(sweep.dbi[i])) continue;
      curve.x.push_back(sweep.ks[i]);
      curve.y.push_back(sweep.dbi[i]);
    }
    svg::line_chart(args.plot, "davies-bouldin by cluster count", {curve});
  }
  std::cout << "evaluate: best k=" << sweep.best_k << " over k=" << args.k_lo << ".."
            << k_hi << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// report (subtask relevance)

struct ReportArgs {
  std::string report;
  std::string task_events;
  std::string schema;
  std::string out;
  std::string scatter_svg;
  std::string scatter_csv;
};

int run_report(const ReportArgs& args) {
  nlohmann::json cluster_report;
  {
    auto in = open_input(args.report);
    in >> cluster_report;
  }
  if (cluster_report.value("format", "") != "workload-lab-report/1")
    throw std::runtime_error("report: " + args.report + " is not a cluster report");

  series::Scaler scaler;
  scaler.mins = vector_from(cluster_report.at("scaler").at("mins"));
  scaler.maxs = vector_from(cluster_report.at("scaler").at("maxs"));
  const auto& rows = cluster_report.at("centroids");
  Eigen::MatrixXd centroids(static_cast<Eigen::Index>(rows.size()), 5);
  for (Eigen::Index c = 0; c < centroids.rows(); ++c)
    centroids.row(c) = vector_from(rows[static_cast<std::size_t>(c)]).transpose();

  trace::JobEventSchema job_schema;
  trace::TaskEventSchema task_schema;
  if (!args.schema.empty()) {
    auto in = open_input(args.schema);
    trace::load_schema_config(in, &job_schema, &task_schema);
  }
  auto in = open_input(args.task_events);
  trace::ParseReport parse_report;
  auto tasks = trace::parse_task_events(in, task_schema, &parse_report);

  auto rel = evalx::subtask_relevance(tasks, centroids, scaler);

  nlohmann::json j;
  j["format"] = "workload-lab-subtasks/1";
  j["separation_score"] = std::isfinite(rel.separation_score)
                              ? nlohmann::json(rel.separation_score)
                              : nlohmann::json("inf");
  j["skipped"] = rel.skipped;
  j["parse_dropped"] = parse_report.dropped;
  nlohmann::json clusters = nlohmann::json::array();
  const char* feature_names[3] = {"cpu", "ram", "disk"};
  for (std::size_t c = 0; c < rel.counts.size(); ++c) {
    nlohmann::json percentiles = nlohmann::json::array();
    for (int f = 0; f < 3; ++f) {
      nlohmann::json q = nlohmann::json::array();
      for (int i = 0; i < 5; ++i) q.push_back(rel.percentiles[c](f, i));
      percentiles.push_back({{"feature", feature_names[f]}, {"quartiles", std::move(q)}});
    }
    clusters.push_back({{"label", static_cast<int>(c)},
                        {"count", rel.counts[c]},
                        {"percentiles", std::move(percentiles)}});
  }
  j["clusters"] = std::move(clusters);
  write_json(args.out, j);

  if (!args.scatter_csv.empty()) {
    auto out = open_output(args.scatter_csv);
    out << "feature_x,feature_y,feature_z,cluster\n";
    for (Eigen::Index i = 0; i < rel.scatter.rows(); ++i)
      out << fmt::shortest(rel.scatter(i, 0)) << ',' << fmt::shortest(rel.scatter(i, 1))
          << ',' << fmt::shortest(rel.scatter(i, 2)) << ','
          << rel.scatter_labels[static_cast<std::size_t>(i)] << '\n';
  }
  if (!args.scatter_svg.empty() && rel.scatter.rows() > 0)
    svg::scatter_panels(args.scatter_svg, "subtask requests by cluster", rel.scatter,
                        rel.scatter_labels, {"cpu", "ram", "disk"});

  std::cout << "report: " << rel.scatter.rows() << " subtasks assigned, " << rel.skipped
            << " skipped, separation " << fmt::shortest(rel.separation_score) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"workload-lab: cluster-trace forecasting and clustering toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; flags override");

  std::uint64_t default_seed = 0;
  try {
    default_seed = env_seed();
  } catch (const std::exception& e) {
    std::cerr << "workload-lab: error: " << e.what() << '\n';
    return 1;
  }

  SynthArgs synth;
  synth.config.seed = default_seed;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic trace");
  synth_cmd->add_option("--count", synth.config.n_jobs, "number of jobs")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--clusters", synth.config.n_clusters, "number of blobs")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--rate", synth.config.arrival_rate, "arrivals per second")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth.config.seed, "random seed");
  synth_cmd->add_option("--out-job-events", synth.out_job_events, "job events output");
  synth_cmd->add_option("--out-task-events", synth.out_task_events, "task events output");
  synth_cmd->add_option("--out-labels", synth.out_labels, "ground-truth labels output");

  IngestArgs ingest;
  ingest.seed = default_seed;
  auto* ingest_cmd = app.add_subcommand("ingest", "parse events into a jobs table");
  ingest_cmd->add_option("--job-events", ingest.job_events, "job events csv")->required();
  ingest_cmd->add_option("--task-events", ingest.task_events, "task events csv")->required();
  ingest_cmd->add_option("--schema", ingest.schema, "column schema config file");
  ingest_cmd->add_option("--aggregate", ingest.aggregate, "task request aggregate")
      ->check(CLI::IsMember({"sum", "max"}));
  ingest_cmd->add_option("--sample", ingest.sample_fraction, "subsample fraction (0,1]")
      ->check(CLI::Range(0.0, 1.0));
  ingest_cmd->add_option("--seed", ingest.seed, "sampling seed");
  ingest_cmd->add_option("--out", ingest.out, "jobs csv output")->required();

  SeriesArgs series_args;
  auto* series_cmd = app.add_subcommand("series", "derive a time series from jobs");
  series_cmd->add_option("--jobs", series_args.jobs, "jobs csv")->required();
  series_cmd->add_option("--kind", series_args.kind, "series kind")
      ->check(CLI::IsMember({"interarrival", "requests", "features"}));
  series_cmd->add_option("--slot-us", series_args.slot_us, "aggregation slot (microseconds)")
      ->check(CLI::PositiveNumber);
  series_cmd->add_option("--out", series_args.out, "series csv output")->required();

  TrainArgs train;
  train.seed = default_seed;
  auto* train_cmd = app.add_subcommand("train", "train a forecaster on a series");
  train_cmd->add_option("--series", train.series_path, "series csv")->required();
  train_cmd->add_option("--lookback", train.lookback)->check(CLI::PositiveNumber);
  train_cmd->add_option("--hidden1", train.hidden1)->check(CLI::PositiveNumber);
  train_cmd->add_option("--hidden2", train.hidden2)->check(CLI::PositiveNumber);
  train_cmd->add_option("--dropout", train.dropout)->check(CLI::Range(0.0, 1.0));
  train_cmd->add_option("--activation", train.activation)
      ->check(CLI::IsMember({"relu", "tanh", "identity"}));
  train_cmd->add_option("--optimizer", train.optimizer)
      ->check(CLI::IsMember({"adam", "sgd"}));
  train_cmd->add_option("--conv-width", train.conv_width)->check(CLI::PositiveNumber);
  train_cmd->add_option("--conv-channels", train.conv_channels)->check(CLI::PositiveNumber);
  train_cmd->add_option("--epochs", train.epochs)->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", train.learning_rate)->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch", train.batch_size)->check(CLI::PositiveNumber);
  train_cmd->add_option("--val-fraction", train.val_fraction)->check(CLI::Range(0.0, 1.0));
  train_cmd->add_option("--seed", train.seed, "training seed");
  train_cmd->add_option("--out", train.out, "model checkpoint output")->required();
  train_cmd->add_option("--plot-loss", train.plot_loss, "loss curve svg output");

  PredictArgs predict;
  auto* predict_cmd = app.add_subcommand("predict", "one-step predictions over a series");
  predict_cmd->add_option("--model", predict.model, "model checkpoint")->required();
  predict_cmd->add_option("--series", predict.series_path, "series csv")->required();
  predict_cmd->add_option("--ar-order", predict.ar_order,
                          "add an AR baseline comparison of this order");
  predict_cmd->add_option("--split", predict.split, "train/test boundary for the baseline");
  predict_cmd->add_option("--out", predict.out, "predictions csv output")->required();
  predict_cmd->add_option("--metrics-out", predict.metrics_out, "metrics json output");
  predict_cmd->add_option("--plot", predict.plot, "prediction-vs-truth svg output");

  auto add_birch_flags = [](CLI::App* cmd, BirchArgs& args) {
    cmd->add_option("--branching", args.branching)->check(CLI::Range(2, 100000));
    cmd->add_option("--leaf-capacity", args.leaf_capacity)->check(CLI::PositiveNumber);
    cmd->add_option("--threshold", args.threshold,
                    "absorption threshold; negative selects the auto estimate");
  };

  ClusterArgs cluster;
  auto* cluster_cmd = app.add_subcommand("cluster", "cluster jobs and write a report");
  cluster_cmd->add_option("--jobs", cluster.jobs, "jobs csv")->required();
  add_birch_flags(cluster_cmd, cluster.birch);
  cluster_cmd->add_option("--k", cluster.k, "cluster count; 0 selects by index sweep");
  cluster_cmd->add_option("--mode", cluster.mode, "silhouette dissimilarity mode")
      ->check(CLI::IsMember({"euclidean", "hamming"}));
  cluster_cmd->add_option("--min-cluster-size", cluster.min_cluster_size,
                          "clusters below this count are flagged as outliers");
  cluster_cmd->add_option("--out", cluster.out, "report json output")->required();
  cluster_cmd->add_option("--labels-out", cluster.labels_out, "labels csv output");
  cluster_cmd->add_option("--dendrogram-svg", cluster.dendrogram_svg);
  cluster_cmd->add_option("--dendrogram-csv", cluster.dendrogram_csv);
  cluster_cmd->add_option("--silhouette-svg", cluster.silhouette_svg);

  EvaluateArgs evaluate;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "sweep cluster counts with the davies-bouldin index");
  evaluate_cmd->add_option("--jobs", evaluate.jobs, "jobs csv")->required();
  add_birch_flags(evaluate_cmd, evaluate.birch);
  evaluate_cmd->add_option("--k-lo", evaluate.k_lo)->check(CLI::Range(2, 100000));
  evaluate_cmd->add_option("--k-hi", evaluate.k_hi)->check(CLI::Range(2, 100000));
  evaluate_cmd->add_option("--out", evaluate.out, "sweep csv output")->required();
  evaluate_cmd->add_option("--plot", evaluate.plot, "index curve svg output");

  ReportArgs report;
  auto* report_cmd =
      app.add_subcommand("report", "relate subtask requests to the job clusters");
  report_cmd->add_option("--report", report.report, "cluster report json")->required();
  report_cmd->add_option("--task-events", report.task_events, "task events csv")->required();
  report_cmd->add_option("--schema", report.schema, "column schema config file");
  report_cmd->add_option("--out", report.out, "subtask report json output")->required();
  report_cmd->add_option("--scatter-svg", report.scatter_svg);
  report_cmd->add_option("--scatter-csv", report.scatter_csv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth_cmd->parsed()) return run_synth(synth);
    if (ingest_cmd->parsed()) return run_ingest(ingest);
    if (series_cmd->parsed()) return run_series(series_args);
    if (train_cmd->parsed()) return run_train(train);
    if (predict_cmd->parsed()) return run_predict(predict);
    if (cluster_cmd->parsed()) return run_cluster(cluster);
    if (evaluate_cmd->parsed()) return run_evaluate(evaluate);
    if (report_cmd->parsed()) return run_report(report);
  } catch (const std::exception& e) {
    std::cerr << "workload-lab: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
