#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wl::trace {

// Event codes follow the ClusterData2011_2 convention.
enum class EventType : int {
  kSubmit = 0,
  kSchedule = 1,
  kEvict = 2,
  kFail = 3,
  kFinish = 4,
  kKill = 5,
  kLost = 6,
  kUpdatePending = 7,
  kUpdateRunning = 8,
};

inline constexpr int kNumEventTypes = 9;

struct JobEvent {
  std::int64_t timestamp_us = 0;
  std::uint64_t job_id = 0;
  EventType event = EventType::kSubmit;
  int scheduling_class = 0;
};

struct TaskEvent {
  std::int64_t timestamp_us = 0;
  std::uint64_t job_id = 0;
  std::uint64_t task_index = 0;
  EventType event = EventType::kSubmit;
  double cpu = 0.0;
  double ram = 0.0;
  double disk = 0.0;
};

struct ResourceVector {
  double cpu = 0.0;
  double ram = 0.0;
  double disk = 0.0;
};

struct JobRecord {
  std::uint64_t job_id = 0;
  std::int64_t arrival_us = 0;
  int parallelism = 1;
  ResourceVector request;
};

// Column positions within a headerless CSV row. Defaults match the
// ClusterData2011_2 job_events / task_events layouts.
struct JobEventSchema {
  int timestamp = 0;
  int job_id = 2;
  int event_type = 3;
  int scheduling_class = 5;
};

struct TaskEventSchema {
  int timestamp = 0;
  int job_id = 2;
  int task_index = 3;
  int event_type = 5;
  int cpu_request = 9;
  int ram_request = 10;
  int disk_request = 11;
};

struct ParseReport {
  std::size_t rows = 0;
  std::size_t dropped = 0;
};

// Reads `key=value` pairs (job.timestamp=0, task.cpu_request=9, ...) into the
// two schemas. Unknown keys are a config error.
void load_schema_config(std::istream& in, JobEventSchema* job_schema,
                        TaskEventSchema* task_schema);

std::vector<JobEvent> parse_job_events(std::istream& in,
                                       const JobEventSchema& schema = {},
                                       ParseReport* report = nullptr);

// Rows missing any of the three resource fields are dropped.
std::vector<TaskEvent> parse_task_events(std::istream& in,
                                         const TaskEventSchema& schema = {},
                                         ParseReport* report = nullptr);

enum class RequestAggregate { kSum, kMax };

struct AssembleReport {
  std::size_t jobs_excluded = 0;
};

// One JobRecord per job that has a job SUBMIT and at least one valid task
// SUBMIT. Arrival is the earliest job SUBMIT; parallelism counts distinct
// task indices; the request aggregates each distinct task's first SUBMIT
// request. Output is sorted by (arrival_us, job_id).
std::vector<JobRecord> assemble_jobs(const std::vector<JobEvent>& job_events,
                                     const std::vector<TaskEvent>& task_events,
                                     RequestAggregate aggregate = RequestAggregate::kSum,
                                     AssembleReport* report = nullptr);

// Uniform subsample without replacement of round(fraction * n) jobs,
// preserving arrival order. Deterministic per seed.
std::vector<JobRecord> sample_jobs(const std::vector<JobRecord>& jobs,
                                   double fraction, std::uint64_t seed);

struct SynthConfig {
  int n_jobs = 100;
  int n_clusters = 3;
  double arrival_rate = 1.0;  // jobs per second
  std::uint64_t seed = 0;
};

struct SynthTrace {
  std::vector<JobEvent> job_events;
  std::vector<TaskEvent> task_events;
  std::vector<int> labels;  // ground-truth blob per job, aligned with job ids 1..n
};

// Exponential inter-arrivals, resource vectors from well-separated Gaussian
// blobs. Every task of a job draws from the job's blob.
SynthTrace synth_trace(const SynthConfig& config);

void write_jobs_csv(std::ostream& out, const std::vector<JobRecord>& jobs);
std::vector<JobRecord> read_jobs_csv(std::istream& in);

void write_job_events_csv(std::ostream& out, const std::vector<JobEvent>& events);
void write_task_events_csv(std::ostream& out, const std::vector<TaskEvent>& events);

}  // namespace wl::trace
