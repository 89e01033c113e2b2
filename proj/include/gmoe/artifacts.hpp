#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gmoe/census.hpp"
#include "gmoe/eval.hpp"
#include "gmoe/generator.hpp"
#include "gmoe/kernels.hpp"
#include "gmoe/registry.hpp"
#include "gmoe/trainer.hpp"

namespace gmoe {

// FNV-1a over a canonical rendering; stamped into every artifact.
std::string config_hash(const std::string& canonical);

struct RunStamp {
  std::string version = "0.1.0";
  std::string config_hash;
  std::uint64_t seed = 0;
};

struct Checkpoint {
  GeneratorParams params;
  KernelSpec kernel;
  int train_order = 0;
  std::vector<int> star_orders;
  RunStamp stamp;
};

void save_checkpoint(const std::string& path, const Checkpoint& cp,
                     bool binary = false);
Checkpoint load_checkpoint(const std::string& path);  // sniffs the format

// targets CSV: one row per statistic with its class identity when it has one.
void write_targets_csv(const std::string& path, const MomentVector& targets,
                       const ClassRegistry& reg,
                       std::span<const PartialGraphlet> partials,
                       const RunStamp& stamp);

// per-graph census rows as JSON lines.
void write_census_jsonl(const std::string& path,
                        const std::vector<MomentVector>& rows,
                        const RunStamp& stamp);

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace,
                     const RunStamp& stamp);

void write_report_json(const std::string& path, const EvalReport& report,
                       const RunStamp& stamp);
void write_report_csv(const std::string& path, const EvalReport& report,
                      const RunStamp& stamp);

void write_histogram_csv(const std::string& path,
                         std::span<const double> bins_a, const std::string& name_a,
                         std::span<const double> bins_b, const std::string& name_b,
                         const RunStamp& stamp);

}  // namespace gmoe
