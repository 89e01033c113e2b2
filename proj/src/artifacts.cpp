#include "gmoe/artifacts.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace gmoe {
namespace {

using nlohmann::json;

std::string hex32(std::uint32_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(8) << std::setfill('0') << v;
  return ss.str();
}

void stamp_comment(std::ostream& os, const RunStamp& stamp) {
  os << "# gmoe " << stamp.version << " config=" << stamp.config_hash
     << " seed=" << stamp.seed << "\n";
}

const char* mode_name(GeneratorMode m) {
  switch (m) {
    case GeneratorMode::latent: return "latent";
    case GeneratorMode::community: return "community";
    case GeneratorMode::adjacency: return "adjacency";
  }
  return "?";
}

GeneratorMode mode_from_name(const std::string& s) {
  if (s == "latent") return GeneratorMode::latent;
  if (s == "community") return GeneratorMode::community;
  if (s == "adjacency") return GeneratorMode::adjacency;
  throw DataError("unknown generator mode '" + s + "'");
}

json kernel_to_json(const KernelSpec& k) {
  return json{{"kind", kernel_kind_name(k.kind)},
              {"degree", k.degree},
              {"eps_phi", k.eps_phi},
              {"eps_z", k.eps_z}};
}

KernelSpec kernel_from_json(const json& j) {
  KernelSpec k;
  k.kind = kernel_kind_from_name(j.at("kind").get<std::string>());
  k.degree = j.at("degree").get<int>();
  k.eps_phi = j.at("eps_phi").get<double>();
  k.eps_z = j.at("eps_z").get<double>();
  return k;
}

constexpr std::uint32_t kCheckpointKind = 2;

}  // namespace

std::string config_hash(const std::string& canonical) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : canonical)
    h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

void save_checkpoint(const std::string& path, const Checkpoint& cp, bool binary) {
  const auto& cfg = cp.params.cfg;
  if (binary) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open " + path + " for writing");
    os.write("GMOE", 4);
    const std::uint32_t header[2] = {1, kCheckpointKind};
    os.write(reinterpret_cast<const char*>(header), sizeof header);
    const std::int32_t ints[12] = {
        static_cast<std::int32_t>(cfg.mode), cfg.input_dim, cfg.hidden1,
        cfg.hidden2, cfg.n, cfg.d, cfg.t, cfg.train_q ? 1 : 0,
        static_cast<std::int32_t>(cp.kernel.kind), cp.kernel.degree,
        cp.train_order, static_cast<std::int32_t>(cp.star_orders.size())};
    os.write(reinterpret_cast<const char*>(ints), sizeof ints);
    const double doubles[4] = {cfg.eps_z, cfg.eps_y, cp.kernel.eps_phi,
                               cp.kernel.eps_z};
    os.write(reinterpret_cast<const char*>(doubles), sizeof doubles);
    for (int so : cp.star_orders) {
      const std::int32_t v = so;
      os.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
    const std::uint64_t seed = cp.stamp.seed;
    os.write(reinterpret_cast<const char*>(&seed), sizeof seed);
    const std::uint64_t count = cp.params.theta.size();
    os.write(reinterpret_cast<const char*>(&count), sizeof count);
    os.write(reinterpret_cast<const char*>(cp.params.theta.data()),
             static_cast<std::streamsize>(count * sizeof(double)));
    if (!os) throw DataError("failed to write " + path);
    return;
  }

  json j;
  j["format"] = "gmoe-checkpoint";
  j["format_version"] = 1;
  j["version"] = cp.stamp.version;
  j["config_hash"] = cp.stamp.config_hash;
  j["seed"] = cp.stamp.seed;
  j["arch"] = {{"mode", mode_name(cfg.mode)}, {"input_dim", cfg.input_dim},
               {"hidden1", cfg.hidden1},      {"hidden2", cfg.hidden2},
               {"n", cfg.n},                  {"d", cfg.d},
               {"t", cfg.t},                  {"train_q", cfg.train_q},
               {"eps_z", cfg.eps_z},          {"eps_y", cfg.eps_y}};
  j["kernel"] = kernel_to_json(cp.kernel);
  j["train_order"] = cp.train_order;
  j["star_orders"] = cp.star_orders;
  j["theta"] = cp.params.theta;
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os << j.dump(2) << "\n";
  if (!os) throw DataError("failed to write " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw DataError("cannot open " + path);
  char magic[4] = {0, 0, 0, 0};
  probe.read(magic, 4);
  Checkpoint cp;

  if (std::memcmp(magic, "GMOE", 4) == 0) {
    std::uint32_t header[2];
    probe.read(reinterpret_cast<char*>(header), sizeof header);
    if (header[0] != 1 || header[1] != kCheckpointKind)
      throw DataError(path + ": not a checkpoint file");
    std::int32_t ints[12];
    probe.read(reinterpret_cast<char*>(ints), sizeof ints);
    double doubles[4];
    probe.read(reinterpret_cast<char*>(doubles), sizeof doubles);
    GeneratorConfig cfg;
    cfg.mode = static_cast<GeneratorMode>(ints[0]);
    cfg.input_dim = ints[1];
    cfg.hidden1 = ints[2];
    cfg.hidden2 = ints[3];
    cfg.n = ints[4];
    cfg.d = ints[5];
    cfg.t = ints[6];
    cfg.train_q = ints[7] != 0;
    cfg.eps_z = doubles[0];
    cfg.eps_y = doubles[1];
    cp.kernel.kind = static_cast<KernelKind>(ints[8]);
    cp.kernel.degree = ints[9];
    cp.kernel.eps_phi = doubles[2];
    cp.kernel.eps_z = doubles[3];
    cp.train_order = ints[10];
    for (std::int32_t k = 0; k < ints[11]; ++k) {
      std::int32_t v = 0;
      probe.read(reinterpret_cast<char*>(&v), sizeof v);
      cp.star_orders.push_back(v);
    }
    std::uint64_t seed = 0, count = 0;
    probe.read(reinterpret_cast<char*>(&seed), sizeof seed);
    probe.read(reinterpret_cast<char*>(&count), sizeof count);
    cp.stamp.seed = seed;
    cfg.validate();
    if (count != static_cast<std::uint64_t>(cfg.param_count()))
      throw DataError(path + ": parameter count does not match architecture");
    cp.params.cfg = cfg;
    cp.params.theta.resize(count);
    probe.read(reinterpret_cast<char*>(cp.params.theta.data()),
               static_cast<std::streamsize>(count * sizeof(double)));
    if (!probe) throw DataError(path + ": truncated checkpoint");
    return cp;
  }

  std::ifstream is(path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "gmoe-checkpoint" ||
        j.at("format_version").get<int>() != 1)
      throw DataError(path + ": not a checkpoint file");
    const auto& a = j.at("arch");
    GeneratorConfig cfg;
    cfg.mode = mode_from_name(a.at("mode").get<std::string>());
    cfg.input_dim = a.at("input_dim").get<int>();
    cfg.hidden1 = a.at("hidden1").get<int>();
    cfg.hidden2 = a.at("hidden2").get<int>();
    cfg.n = a.at("n").get<int>();
    cfg.d = a.at("d").get<int>();
    cfg.t = a.at("t").get<int>();
    cfg.train_q = a.at("train_q").get<bool>();
    cfg.eps_z = a.at("eps_z").get<double>();
    cfg.eps_y = a.at("eps_y").get<double>();
    cfg.validate();
    cp.kernel = kernel_from_json(j.at("kernel"));
    cp.train_order = j.at("train_order").get<int>();
    cp.star_orders = j.at("star_orders").get<std::vector<int>>();
    cp.stamp.version = j.at("version").get<std::string>();
    cp.stamp.config_hash = j.at("config_hash").get<std::string>();
    cp.stamp.seed = j.at("seed").get<std::uint64_t>();
    cp.params.cfg = cfg;
    cp.params.theta = j.at("theta").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  if (cp.params.theta.size() !=
      static_cast<std::size_t>(cp.params.cfg.param_count()))
    throw DataError(path + ": parameter count does not match architecture");
  return cp;
}

void write_targets_csv(const std::string& path, const MomentVector& targets,
                       const ClassRegistry& reg,
                       std::span<const PartialGraphlet> partials,
                       const RunStamp& stamp) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path + " for writing");
  stamp_comment(os, stamp);
  os << "stat,class_id,canonical_code_hex,value\n";
  os << std::setprecision(17);
  os << "node,-1,," << targets.node_stat << "\n";
  const auto& classes = reg.classes(targets.order);
  for (std::size_t c = 0; c < targets.class_values.size(); ++c)
    os << "class," << c << "," << hex32(classes[c].canonical.bits) << ","
       << targets.class_values[c] << "\n";
  for (std::size_t k = 0; k < targets.partial_values.size(); ++k)
    os << "partial," << k << ",star" << partials[k].order << ","
       << targets.partial_values[k] << "\n";
  if (!os) throw DataError("failed to write " + path);
}

void write_census_jsonl(const std::string& path,
                        const std::vector<MomentVector>& rows,
                        const RunStamp& stamp) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path + " for writing");
  for (std::size_t k = 0; k < rows.size(); ++k) {
    json j;
    j["graph"] = k;
    j["order"] = rows[k].order;
    j["node_stat"] = rows[k].node_stat;
    j["class_values"] = rows[k].class_values;
    j["partial_values"] = rows[k].partial_values;
    j["config_hash"] = stamp.config_hash;
    os << j.dump() << "\n";
  }
  if (!os) throw DataError("failed to write " + path);
}

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace,
                     const RunStamp& stamp) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path + " for writing");
  stamp_comment(os, stamp);
  os << "iteration,estimated_U,phase,wall_seconds\n";
  os << std::setprecision(17);
  for (const auto& r : trace)
    os << r.iteration << "," << r.estimated_u << "," << r.phase << ","
       << r.wall_seconds << "\n";
  if (!os) throw DataError("failed to write " + path);
}

void write_report_json(const std::string& path, const EvalReport& report,
                       const RunStamp& stamp) {
  json j;
  j["version"] = stamp.version;
  j["config_hash"] = stamp.config_hash;
  j["seed"] = report.seed;
  j["total_difference"] = report.total_difference;
  j["max_difference"] = report.max_difference;
  j["per_stat_difference"] = report.per_stat_difference;
  j["mmd_degree"] = report.mmd_degree;
  j["mmd_clustering"] = report.mmd_clustering;
  j["mmd_orbit"] = report.mmd_orbit;
  j["classifier_rate"] = report.classifier_rate;
  j["gen_sample_size"] = report.gen_sample_size;
  j["real_sample_size"] = report.real_sample_size;
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path + " for writing");
  os << j.dump(2) << "\n";
  if (!os) throw DataError("failed to write " + path);
}

void write_report_csv(const std::string& path, const EvalReport& report,
                      const RunStamp& stamp) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path + " for writing");
  stamp_comment(os, stamp);
  os << "metric,value\n" << std::setprecision(17);
  os << "total_difference," << report.total_difference << "\n";
  os << "max_difference," << report.max_difference << "\n";
  os << "mmd_degree," << report.mmd_degree << "\n";
  os << "mmd_clustering," << report.mmd_clustering << "\n";
  os << "mmd_orbit," << report.mmd_orbit << "\n";
  os << "classifier_rate," << report.classifier_rate << "\n";
  for (std::size_t f = 0; f < report.per_stat_difference.size(); ++f)
    os << "stat_diff_" << f << "," << report.per_stat_difference[f] << "\n";
  if (!os) throw DataError("failed to write " + path);
}

void write_histogram_csv(const std::string& path,
                         std::span<const double> bins_a, const std::string& name_a,
                         std::span<const double> bins_b, const std::string& name_b,
                         const RunStamp& stamp) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open " + path + " for writing");
  stamp_comment(os, stamp);
  os << "bin," << name_a << "," << name_b << "\n" << std::setprecision(17);
  const std::size_t bins = std::max(bins_a.size(), bins_b.size());
  for (std::size_t i = 0; i < bins; ++i)
    os << i << "," << (i < bins_a.size() ? bins_a[i] : 0.0) << ","
       << (i < bins_b.size() ? bins_b[i] : 0.0) << "\n";
  if (!os) throw DataError("failed to write " + path);
}

}  // namespace gmoe
