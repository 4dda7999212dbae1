// Copyright 2026 The spikesot Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Analytical energy model. Every operator that runs while an EnergyProfiler
// is active leaves one LayerEnergyRecord; the report turns records into
// picojoules with
//
//   first conv (dense image input):  E_MAC * FL * sum_t R_t
//   spike-driven operators:          E_AC  * FL * sum_t R_t
//   scale / softmax:                 nothing (folded into the neuron / absent)
//
// FL counts multiply-accumulates of one timestep. R_t is the firing
// statistic of the operator's input at timestep t. Two readings of R are
// supported because a fraction of nonzero elements cannot exceed one while
// tabulated per-layer rates do: (a) nonzero fraction times D, literally
// following E = FL * E_AC * SFR * T * D; (b) the mean integer count, which is
// exactly the number of unit accumulations per element.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spikesot/tensor.hpp"

namespace spikesot {

enum class OpClass {
  first_conv_mac,
  conv_ac,
  linear_ac,
  attention_qkv,
  attention_product,
  softmax_absent,
  scale_absent,
};

std::string_view to_string(OpClass c);
OpClass op_class_from_string(std::string_view s);

struct EnergyModel {
  double e_mac_pj = 4.6;
  double e_ac_pj = 0.9;
  std::string technology = "45nm";

  void validate() const;
};

enum class RateReading { nonzero_times_dcap, mean_integer };

struct LayerEnergyRecord {
  std::string name;
  OpClass op_class = OpClass::conv_ac;
  std::uint64_t flops = 0;  // per timestep
  std::size_t timesteps = 1;
  int d_cap = 4;
  FiringStats firing;
  /// Per-timestep rates supplied directly (table ingest). When present they
  /// are used as given under either reading.
  std::vector<double> rates;
  std::string branch = "search";
  /// Per-timestep cost of the equivalent ANN operator.
  std::uint64_t ann_flops = 0;
};

/// Sum over timesteps of the consumed rate.
double rate_sum(const LayerEnergyRecord& rec, RateReading reading);

double layer_energy(const LayerEnergyRecord& rec, const EnergyModel& m,
                    RateReading reading = RateReading::mean_integer);
double ann_energy(double flops, const EnergyModel& m = {});
double amortize_template(double template_total, std::size_t interval);

inline double pj_to_mj(double pj) { return pj * 1e-9; }

/// Collects records from operators executed while it is active.
class EnergyProfiler {
 public:
  void record(LayerEnergyRecord rec);
  const std::vector<LayerEnergyRecord>& records() const { return records_; }
  /// Executed multiply-accumulates (FL * T) per branch, kept even when
  /// individual records are not.
  std::uint64_t flops(const std::string& branch) const;
  void keep_records(bool keep) { keep_ = keep; }
  void clear();

 private:
  std::vector<LayerEnergyRecord> records_;
  std::map<std::string, std::uint64_t> flops_;
  bool keep_ = true;
};

EnergyProfiler* active_profiler();
const std::string& active_branch();

class ProfilerScope {
 public:
  explicit ProfilerScope(EnergyProfiler* profiler);
  ~ProfilerScope();
  ProfilerScope(const ProfilerScope&) = delete;
  ProfilerScope& operator=(const ProfilerScope&) = delete;

 private:
  EnergyProfiler* previous_;
};

class BranchScope {
 public:
  explicit BranchScope(std::string branch);
  ~BranchScope();
  BranchScope(const BranchScope&) = delete;
  BranchScope& operator=(const BranchScope&) = delete;

 private:
  std::string previous_;
};

/// Records into the active profiler, if any, tagging the active branch.
void record_layer(std::string name, OpClass op_class, std::uint64_t flops,
                  const FiringStats& firing, std::size_t timesteps, int d_cap,
                  std::uint64_t ann_flops);

struct EnergyReportRow {
  std::string name;
  std::string branch;
  OpClass op_class;
  std::uint64_t flops;
  std::size_t timesteps;
  double nonzero_fraction;
  double mean_integer;
  double energy_pj_fraction;  // reading (a)
  double energy_pj_integer;   // reading (b)
  double ann_pj;
};

struct BranchTotals {
  double snn_pj_fraction = 0.0;
  double snn_pj_integer = 0.0;
  double ann_pj = 0.0;
};

struct EnergyReport {
  EnergyModel model;
  std::size_t template_interval = 1;
  std::vector<EnergyReportRow> rows;
  std::map<std::string, BranchTotals> branches;
  BranchTotals total;      // plain sum of every row
  BranchTotals per_frame;  // search + template / interval
  double snn_ann_ratio = 0.0;  // per-frame, reading (b)
};

EnergyReport energy_report(const std::vector<LayerEnergyRecord>& records,
                           const EnergyModel& m = {}, std::size_t template_interval = 1);

std::string format_report(const EnergyReport& report);
std::string report_json(const EnergyReport& report);

/// Reads a per-layer firing-rate table laid out as
///   stage,block,index,op,t1[,t2...][,flops]
/// with one column per timestep and an optional trailing `flops` column
/// (named in the header). Operator classes follow the block/op names.
std::vector<LayerEnergyRecord> load_sfr_table(std::istream& in, const std::string& branch,
                                              int d_cap = 4);
std::vector<LayerEnergyRecord> load_sfr_table(const std::string& path, const std::string& branch,
                                              int d_cap = 4);

}  // namespace spikesot
