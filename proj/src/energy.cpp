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

#include "spikesot/energy.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace spikesot {

namespace {

constexpr std::pair<OpClass, std::string_view> kClassNames[] = {
    {OpClass::first_conv_mac, "first_conv_mac"},
    {OpClass::conv_ac, "conv_ac"},
    {OpClass::linear_ac, "linear_ac"},
    {OpClass::attention_qkv, "attention_qkv"},
    {OpClass::attention_product, "attention_product"},
    {OpClass::softmax_absent, "softmax_absent"},
    {OpClass::scale_absent, "scale_absent"},
};

thread_local EnergyProfiler* g_profiler = nullptr;
thread_local std::string g_branch = "search";

bool contributes(OpClass c) {
  return c != OpClass::softmax_absent && c != OpClass::scale_absent;
}

}  // namespace

std::string_view to_string(OpClass c) {
  for (const auto& [k, name] : kClassNames)
    if (k == c) return name;
  return "unknown";
}

OpClass op_class_from_string(std::string_view s) {
  for (const auto& [k, name] : kClassNames)
    if (name == s) return k;
  throw Error("unknown operator class '" + std::string(s) + "'");
}

void EnergyModel::validate() const {
  if (!(e_mac_pj > 0.0 && e_ac_pj > 0.0))
    throw Error("EnergyModel: per-operation energies must be positive");
}

double rate_sum(const LayerEnergyRecord& rec, RateReading reading) {
  if (!rec.rates.empty()) {
    double s = 0.0;
    for (double r : rec.rates) s += r;
    return s;
  }
  const double T = static_cast<double>(rec.timesteps);
  if (rec.op_class == OpClass::first_conv_mac) return T * rec.firing.mean_integer;
  if (reading == RateReading::nonzero_times_dcap)
    return T * rec.firing.nonzero_fraction * rec.d_cap;
  return T * rec.firing.mean_integer;
}

double layer_energy(const LayerEnergyRecord& rec, const EnergyModel& m, RateReading reading) {
  m.validate();
  const double fl = static_cast<double>(rec.flops);
  switch (rec.op_class) {
    case OpClass::first_conv_mac:
      return m.e_mac_pj * rate_sum(rec, reading) * fl;
    case OpClass::conv_ac:
    case OpClass::linear_ac:
    case OpClass::attention_qkv:
    case OpClass::attention_product:
      return m.e_ac_pj * rate_sum(rec, reading) * fl;
    case OpClass::softmax_absent:
    case OpClass::scale_absent:
      return 0.0;
  }
  throw Error("layer_energy: unknown operator class");
}

double ann_energy(double flops, const EnergyModel& m) {
  m.validate();
  if (flops < 0) throw Error("ann_energy: negative FLOPs");
  return flops * m.e_mac_pj;
}

double amortize_template(double template_total, std::size_t interval) {
  if (interval == 0) throw Error("amortize_template: interval must be >= 1");
  return template_total / static_cast<double>(interval);
}

void EnergyProfiler::record(LayerEnergyRecord rec) {
  if (contributes(rec.op_class)) flops_[rec.branch] += rec.flops * rec.timesteps;
  if (keep_) records_.push_back(std::move(rec));
}

std::uint64_t EnergyProfiler::flops(const std::string& branch) const {
  auto it = flops_.find(branch);
  return it == flops_.end() ? 0 : it->second;
}

void EnergyProfiler::clear() {
  records_.clear();
  flops_.clear();
}

EnergyProfiler* active_profiler() { return g_profiler; }
const std::string& active_branch() { return g_branch; }

ProfilerScope::ProfilerScope(EnergyProfiler* profiler) : previous_(g_profiler) {
  g_profiler = profiler;
}
ProfilerScope::~ProfilerScope() { g_profiler = previous_; }

BranchScope::BranchScope(std::string branch) : previous_(std::move(g_branch)) {
  g_branch = std::move(branch);
}
BranchScope::~BranchScope() { g_branch = std::move(previous_); }

void record_layer(std::string name, OpClass op_class, std::uint64_t flops,
                  const FiringStats& firing, std::size_t timesteps, int d_cap,
                  std::uint64_t ann_flops) {
  if (!g_profiler) return;
  LayerEnergyRecord rec;
  rec.name = std::move(name);
  rec.op_class = op_class;
  rec.flops = flops;
  rec.timesteps = timesteps;
  rec.d_cap = d_cap;
  rec.firing = firing;
  rec.branch = g_branch;
  rec.ann_flops = ann_flops;
  g_profiler->record(std::move(rec));
}

EnergyReport energy_report(const std::vector<LayerEnergyRecord>& records, const EnergyModel& m,
                           std::size_t template_interval) {
  m.validate();
  if (template_interval == 0) throw Error("energy_report: interval must be >= 1");
  EnergyReport rep;
  rep.model = m;
  rep.template_interval = template_interval;
  for (const auto& rec : records) {
    EnergyReportRow row{rec.name,
                        rec.branch,
                        rec.op_class,
                        rec.flops,
                        rec.rates.empty() ? rec.timesteps : rec.rates.size(),
                        rec.firing.nonzero_fraction,
                        rec.firing.mean_integer,
                        layer_energy(rec, m, RateReading::nonzero_times_dcap),
                        layer_energy(rec, m, RateReading::mean_integer),
                        ann_energy(static_cast<double>(rec.ann_flops) *
                                       (rec.rates.empty() ? rec.timesteps : rec.rates.size()),
                                   m)};
    auto& b = rep.branches[row.branch];
    b.snn_pj_fraction += row.energy_pj_fraction;
    b.snn_pj_integer += row.energy_pj_integer;
    b.ann_pj += row.ann_pj;
    rep.total.snn_pj_fraction += row.energy_pj_fraction;
    rep.total.snn_pj_integer += row.energy_pj_integer;
    rep.total.ann_pj += row.ann_pj;
    rep.rows.push_back(std::move(row));
  }
  for (const auto& [name, b] : rep.branches) {
    const double div = name == "template" ? static_cast<double>(template_interval) : 1.0;
    rep.per_frame.snn_pj_fraction += b.snn_pj_fraction / div;
    rep.per_frame.snn_pj_integer += b.snn_pj_integer / div;
    rep.per_frame.ann_pj += b.ann_pj / div;
  }
  rep.snn_ann_ratio =
      rep.per_frame.ann_pj > 0 ? rep.per_frame.snn_pj_integer / rep.per_frame.ann_pj : 0.0;
  return rep;
}

std::string format_report(const EnergyReport& r) {
  std::ostringstream os;
  os << "# energy report (" << r.model.technology << ", E_MAC=" << r.model.e_mac_pj
     << " pJ, E_AC=" << r.model.e_ac_pj << " pJ)\n"
     << "# FL = multiply-accumulates per timestep; E = E_op * FL * sum_t R_t\n"
     << "# E_frac: R = nonzero fraction * D    E_int: R = mean integer count (headline)\n"
     << "# template branch amortized over " << r.template_interval << " frames\n";
  os << std::left << std::setw(44) << "layer" << std::setw(10) << "branch" << std::setw(19)
     << "class" << std::right << std::setw(12) << "FL" << std::setw(4) << "T" << std::setw(9)
     << "nz_frac" << std::setw(9) << "mean_int" << std::setw(14) << "E_frac[pJ]"
     << std::setw(14) << "E_int[pJ]" << std::setw(14) << "E_ann[pJ]" << '\n';
  os << std::fixed;
  for (const auto& row : r.rows) {
    os << std::left << std::setw(44) << row.name << std::setw(10) << row.branch
       << std::setw(19) << to_string(row.op_class) << std::right << std::setw(12) << row.flops
       << std::setw(4) << row.timesteps << std::setprecision(4) << std::setw(9)
       << row.nonzero_fraction << std::setw(9) << row.mean_integer << std::setprecision(1)
       << std::setw(14) << row.energy_pj_fraction << std::setw(14) << row.energy_pj_integer
       << std::setw(14) << row.ann_pj << '\n';
  }
  os << std::setprecision(6);
  for (const auto& [name, b] : r.branches)
    os << "branch " << name << ": E_frac=" << pj_to_mj(b.snn_pj_fraction)
       << " mJ  E_int=" << pj_to_mj(b.snn_pj_integer) << " mJ  E_ann=" << pj_to_mj(b.ann_pj)
       << " mJ\n";
  os << "total (unamortized): E_frac=" << pj_to_mj(r.total.snn_pj_fraction)
     << " mJ  E_int=" << pj_to_mj(r.total.snn_pj_integer) << " mJ\n"
     << "per frame: E_frac=" << pj_to_mj(r.per_frame.snn_pj_fraction)
     << " mJ  E_int=" << pj_to_mj(r.per_frame.snn_pj_integer)
     << " mJ  E_ann=" << pj_to_mj(r.per_frame.ann_pj) << " mJ  SNN/ANN=" << r.snn_ann_ratio
     << '\n';
  return os.str();
}

std::string report_json(const EnergyReport& r) {
  nlohmann::ordered_json j;
  j["model"] = {{"e_mac_pj", r.model.e_mac_pj},
                {"e_ac_pj", r.model.e_ac_pj},
                {"technology", r.model.technology}};
  j["template_interval"] = r.template_interval;
  auto& layers = j["layers"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows)
    layers.push_back({{"name", row.name},
                      {"branch", row.branch},
                      {"class", to_string(row.op_class)},
                      {"flops", row.flops},
                      {"timesteps", row.timesteps},
                      {"nonzero_fraction", row.nonzero_fraction},
                      {"mean_integer", row.mean_integer},
                      {"energy_pj_fraction", row.energy_pj_fraction},
                      {"energy_pj_integer", row.energy_pj_integer},
                      {"ann_pj", row.ann_pj}});
  auto totals = [](const BranchTotals& b) {
    return nlohmann::ordered_json{{"snn_pj_fraction", b.snn_pj_fraction},
                                  {"snn_pj_integer", b.snn_pj_integer},
                                  {"ann_pj", b.ann_pj}};
  };
  for (const auto& [name, b] : r.branches) j["branches"][name] = totals(b);
  j["total"] = totals(r.total);
  j["per_frame"] = totals(r.per_frame);
  j["snn_ann_ratio"] = r.snn_ann_ratio;
  return j.dump(2);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  const char sep = line.find(',') != std::string::npos ? ',' : '\t';
  while (std::getline(is, field, sep)) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

OpClass classify(int stage, const std::string& block, const std::string& op) {
  const std::string b = lower(block), o = lower(op);
  if (b == "downsampling") return stage == 1 ? OpClass::first_conv_mac : OpClass::conv_ac;
  if (o == "pwconv1" || o == "dwconv" || o == "pwconv2" || o == "conv1" || o == "conv2")
    return OpClass::conv_ac;
  if (o == "head-qkv" || o == "head-kv") return OpClass::attention_qkv;
  if (o == "q_s" || o == "k_s" || o == "v_s") return OpClass::attention_product;
  if (o == "linear" || o == "linear1" || o == "linear2") return OpClass::linear_ac;
  throw Error("load_sfr_table: unknown operator class for block '" + block + "' op '" + op +
              "'");
}

}  // namespace

std::vector<LayerEnergyRecord> load_sfr_table(std::istream& in, const std::string& branch,
                                              int d_cap) {
  std::vector<LayerEnergyRecord> out;
  std::string line;
  std::vector<std::string> header;
  std::size_t rate_cols = 0;
  bool has_flops = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    auto f = split_fields(line);
    if (header.empty()) {
      header = f;
      if (header.size() < 5 || lower(header[0]) != "stage")
        throw Error("load_sfr_table: header must start with stage,block,index,op");
      has_flops = lower(header.back()) == "flops";
      rate_cols = header.size() - 4 - (has_flops ? 1 : 0);
      if (rate_cols == 0) throw Error("load_sfr_table: no timestep columns");
      continue;
    }
    if (f.size() != header.size())
      throw Error("load_sfr_table: line " + std::to_string(line_no) + " has " +
                  std::to_string(f.size()) + " fields, expected " +
                  std::to_string(header.size()));
    LayerEnergyRecord rec;
    const int stage = std::stoi(f[0]);
    rec.op_class = classify(stage, f[1], f[3]);
    rec.name = "stage" + f[0] + "." + lower(f[1]) + f[2] + "." + lower(f[3]);
    rec.branch = branch;
    rec.d_cap = d_cap;
    for (std::size_t c = 0; c < rate_cols; ++c) rec.rates.push_back(std::stod(f[4 + c]));
    rec.timesteps = rate_cols;
    if (has_flops) rec.flops = std::stoull(f.back());
    rec.ann_flops = rec.flops;
    double mean = 0.0;
    for (double r : rec.rates) mean += r / rate_cols;
    rec.firing.mean_integer = mean;
    rec.firing.nonzero_fraction = std::min(1.0, mean);
    rec.firing.timestep_count = rate_cols;
    out.push_back(std::move(rec));
  }
  if (header.empty()) throw Error("load_sfr_table: empty table");
  return out;
}

std::vector<LayerEnergyRecord> load_sfr_table(const std::string& path, const std::string& branch,
                                              int d_cap) {
  std::ifstream in(path);
  if (!in) throw Error("load_sfr_table: cannot open " + path);
  return load_sfr_table(in, branch, d_cap);
}

}  // namespace spikesot
