#include "workload/trace.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "workload/csv.hpp"
#include "workload/fmt.hpp"

namespace wl::trace {

namespace {

std::optional<EventType> to_event_type(std::string_view field) {
  auto code = csv::to_int64(field);
  if (!code || *code < 0 || *code >= kNumEventTypes) return std::nullopt;
  return static_cast<EventType>(*code);
}

void check_schema(std::initializer_list<int> cols) {
  for (int c : cols) {
    if (c < 0) throw std::invalid_argument("schema config: negative column index");
  }
}

bool strip_line(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return !line.empty();
}

}  // namespace

void load_schema_config(std::istream& in, JobEventSchema* job_schema,
                        TaskEventSchema* task_schema) {
  std::unordered_map<std::string, int*> slots = {
      {"job.timestamp", &job_schema->timestamp},
      {"job.job_id", &job_schema->job_id},
      {"job.event_type", &job_schema->event_type},
      {"job.scheduling_class", &job_schema->scheduling_class},
      {"task.timestamp", &task_schema->timestamp},
      {"task.job_id", &task_schema->job_id},
      {"task.task_index", &task_schema->task_index},
      {"task.event_type", &task_schema->event_type},
      {"task.cpu_request", &task_schema->cpu_request},
      {"task.ram_request", &task_schema->ram_request},
      {"task.disk_request", &task_schema->disk_request},
  };
  std::string line;
  while (std::getline(in, line)) {
    if (!strip_line(line) || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("schema config: expected key=value, got '" + line + "'");
    std::string key = line.substr(0, eq);
    auto value = csv::to_int64(std::string_view(line).substr(eq + 1));
    auto it = slots.find(key);
    if (it == slots.end())
      throw std::invalid_argument("schema config: unknown key '" + key + "'");
    if (!value || *value < 0)
      throw std::invalid_argument("schema config: bad column index for '" + key + "'");
    *it->second = static_cast<int>(*value);
  }
}

std::vector<JobEvent> parse_job_events(std::istream& in,
                                       const JobEventSchema& schema,
                                       ParseReport* report) {
  check_schema({schema.timestamp, schema.job_id, schema.event_type,
                schema.scheduling_class});
  const int need = 1 + std::max({schema.timestamp, schema.job_id,
                                 schema.event_type, schema.scheduling_class});
  std::vector<JobEvent> events;
  ParseReport local;
  std::string line;
  while (std::getline(in, line)) {
    if (!strip_line(line)) continue;
    ++local.rows;
    auto fields = csv::split(line);
    if (static_cast<int>(fields.size()) < need) {
      ++local.dropped;
      continue;
    }
    auto ts = csv::to_int64(fields[schema.timestamp]);
    auto id = csv::to_uint64(fields[schema.job_id]);
    auto ev = to_event_type(fields[schema.event_type]);
    auto cls = csv::to_int64(fields[schema.scheduling_class]);
    if (!ts || *ts < 0 || !id || !ev || !cls) {
      ++local.dropped;
      continue;
    }
    events.push_back({*ts, *id, *ev, static_cast<int>(*cls)});
  }
  if (in.bad()) throw std::runtime_error("I/O error reading job events");
  if (report) *report = local;
  return events;
}

std::vector<TaskEvent> parse_task_events(std::istream& in,
                                         const TaskEventSchema& schema,
                                         ParseReport* report) {
  check_schema({schema.timestamp, schema.job_id, schema.task_index,
                schema.event_type, schema.cpu_request, schema.ram_request,
                schema.disk_request});
  const int need = 1 + std::max({schema.timestamp, schema.job_id,
                                 schema.task_index, schema.event_type,
                                 schema.cpu_request, schema.ram_request,
                                 schema.disk_request});
  std::vector<TaskEvent> events;
  ParseReport local;
  std::string line;
  while (std::getline(in, line)) {
    if (!strip_line(line)) continue;
    ++local.rows;
    auto fields = csv::split(line);
    if (static_cast<int>(fields.size()) < need) {
      ++local.dropped;
      continue;
    }
    auto ts = csv::to_int64(fields[schema.timestamp]);
    auto id = csv::to_uint64(fields[schema.job_id]);
    auto index = csv::to_uint64(fields[schema.task_index]);
    auto ev = to_event_type(fields[schema.event_type]);
    auto cpu = csv::to_double(fields[schema.cpu_request]);
    auto ram = csv::to_double(fields[schema.ram_request]);
    auto disk = csv::to_double(fields[schema.disk_request]);
    bool resources_ok = cpu && ram && disk && std::isfinite(*cpu) &&
                        std::isfinite(*ram) && std::isfinite(*disk) &&
                        *cpu >= 0 && *ram >= 0 && *disk >= 0;
    if (!ts || *ts < 0 || !id || !index || !ev || !resources_ok) {
      ++local.dropped;
      continue;
    }
    events.push_back({*ts, *id, *index, *ev, *cpu, *ram, *disk});
  }
  if (in.bad()) throw std::runtime_error("I/O error reading task events");
  if (report) *report = local;
  return events;
}

std::vector<JobRecord> assemble_jobs(const std::vector<JobEvent>& job_events,
                                     const std::vector<TaskEvent>& task_events,
                                     RequestAggregate aggregate,
                                     AssembleReport* report) {
  std::unordered_map<std::uint64_t, std::int64_t> arrival;
  for (const auto& e : job_events) {
    if (e.event != EventType::kSubmit) continue;
    auto [it, inserted] = arrival.emplace(e.job_id, e.timestamp_us);
    if (!inserted) it->second = std::min(it->second, e.timestamp_us);
  }

  // First SUBMIT per (job, task_index); ties on timestamp keep the first row.
  struct TaskFirst {
    std::int64_t ts;
    ResourceVector r;
  };
  std::unordered_map<std::uint64_t, std::map<std::uint64_t, TaskFirst>> tasks;
  for (const auto& e : task_events) {
    if (e.event != EventType::kSubmit) continue;
    auto& per_job = tasks[e.job_id];
    auto it = per_job.find(e.task_index);
    if (it == per_job.end()) {
      per_job.emplace(e.task_index, TaskFirst{e.timestamp_us, {e.cpu, e.ram, e.disk}});
    } else if (e.timestamp_us < it->second.ts) {
      it->second = {e.timestamp_us, {e.cpu, e.ram, e.disk}};
    }
  }

  std::vector<JobRecord> jobs;
  std::size_t excluded = 0;
  for (const auto& [job_id, arrival_us] : arrival) {
    auto it = tasks.find(job_id);
    if (it == tasks.end() || it->second.empty()) {
      ++excluded;
      continue;
    }
    JobRecord rec;
    rec.job_id = job_id;
    rec.arrival_us = arrival_us;
    rec.parallelism = static_cast<int>(it->second.size());
    for (const auto& [index, first] : it->second) {
      if (aggregate == RequestAggregate::kSum) {
        rec.request.cpu += first.r.cpu;
        rec.request.ram += first.r.ram;
        rec.request.disk += first.r.disk;
      } else {
        rec.request.cpu = std::max(rec.request.cpu, first.r.cpu);
        rec.request.ram = std::max(rec.request.ram, first.r.ram);
        rec.request.disk = std::max(rec.request.disk, first.r.disk);
      }
    }
    jobs.push_back(rec);
  }
  std::sort(jobs.begin(), jobs.end(), [](const JobRecord& a, const JobRecord& b) {
    return std::tie(a.arrival_us, a.job_id) < std::tie(b.arrival_us, b.job_id);
  });
  if (report) report->jobs_excluded = excluded;
  return jobs;
}

std::vector<JobRecord> sample_jobs(const std::vector<JobRecord>& jobs,
                                   double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("sample_jobs: fraction must be in (0,1]");
  const std::size_t n = jobs.size();
  const std::size_t k =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))));
  if (k == n) return jobs;

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  std::vector<JobRecord> out;
  out.reserve(k);
  for (std::size_t i : idx) out.push_back(jobs[i]);
  return out;
}

SynthTrace synth_trace(const SynthConfig& config) {
  if (config.n_jobs < 1 || config.n_clusters < 1 || !(config.arrival_rate > 0))
    throw std::invalid_argument("synth_trace: invalid config");

  std::mt19937_64 rng(config.seed);
  std::exponential_distribution<double> interarrival(config.arrival_rate);
  std::uniform_int_distribution<int> cluster_pick(0, config.n_clusters - 1);
  std::uniform_int_distribution<int> parallelism_pick(1, 8);
  std::normal_distribution<double> jitter(0.0, 0.01);

  // Blob centers on the unit-cube diagonal, tight enough to stay well
  // separated for any reasonable cluster count.
  auto center = [&](int c) {
    double u = config.n_clusters == 1
                   ? 0.5
                   : 0.1 + 0.8 * static_cast<double>(c) / (config.n_clusters - 1);
    return u;
  };

  SynthTrace out;
  double t_seconds = 0.0;
  for (int i = 0; i < config.n_jobs; ++i) {
    t_seconds += interarrival(rng);
    const std::int64_t arrival_us = std::llround(t_seconds * 1e6);
    const std::uint64_t job_id = static_cast<std::uint64_t>(i) + 1;
    const int cluster = cluster_pick(rng);
    const int parallelism = parallelism_pick(rng);
    out.labels.push_back(cluster);
    out.job_events.push_back({arrival_us, job_id, EventType::kSubmit, cluster % 4});
    const double u = center(cluster);
    for (int t = 0; t < parallelism; ++t) {
      TaskEvent ev;
      ev.timestamp_us = arrival_us;
      ev.job_id = job_id;
      ev.task_index = static_cast<std::uint64_t>(t);
      ev.event = EventType::kSubmit;
      ev.cpu = std::max(0.0, u + jitter(rng));
      ev.ram = std::max(0.0, u + jitter(rng));
      ev.disk = std::max(0.0, u + jitter(rng));
      out.task_events.push_back(ev);
    }
  }
  return out;
}

void write_jobs_csv(std::ostream& out, const std::vector<JobRecord>& jobs) {
  out << "job_id,arrival_us,parallelism,cpu,ram,disk\n";
  for (const auto& j : jobs) {
    out << j.job_id << ',' << j.arrival_us << ',' << j.parallelism << ','
        << fmt::shortest(j.request.cpu) << ',' << fmt::shortest(j.request.ram)
        << ',' << fmt::shortest(j.request.disk) << '\n';
  }
}

std::vector<JobRecord> read_jobs_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("jobs csv: empty input");
  std::vector<JobRecord> jobs;
  while (std::getline(in, line)) {
    if (!strip_line(line)) continue;
    auto fields = csv::split(line);
    if (fields.size() != 6) throw std::runtime_error("jobs csv: bad row '" + line + "'");
    auto id = csv::to_uint64(fields[0]);
    auto arrival = csv::to_int64(fields[1]);
    auto parallelism = csv::to_int64(fields[2]);
    auto cpu = csv::to_double(fields[3]);
    auto ram = csv::to_double(fields[4]);
    auto disk = csv::to_double(fields[5]);
    if (!id || !arrival || !parallelism || *parallelism < 1 || !cpu || !ram || !disk)
      throw std::runtime_error("jobs csv: bad row '" + line + "'");
    jobs.push_back({*id, *arrival, static_cast<int>(*parallelism), {*cpu, *ram, *disk}});
  }
  return jobs;
}

void write_job_events_csv(std::ostream& out, const std::vector<JobEvent>& events) {
  // ClusterData2011_2 job_events layout: 8 columns, unused ones left empty.
  for (const auto& e : events) {
    out << e.timestamp_us << ",," << e.job_id << ','
        << static_cast<int>(e.event) << ",," << e.scheduling_class << ",,\n";
  }
}

void write_task_events_csv(std::ostream& out, const std::vector<TaskEvent>& events) {
  // task_events layout: 13 columns.
  for (const auto& e : events) {
    out << e.timestamp_us << ",," << e.job_id << ',' << e.task_index << ",,"
        << static_cast<int>(e.event) << ",,,," << fmt::shortest(e.cpu) << ','
        << fmt::shortest(e.ram) << ',' << fmt::shortest(e.disk) << ",\n";
  }
}

}  // namespace wl::trace
