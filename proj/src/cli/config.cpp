#include <cmath>
#include <fstream>
#include <set>

#include <openssl/evp.h>

#include "fflp/cli.hpp"
#include "fflp/errors.hpp"

namespace fflp::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const char* what) {
  if (!j.is_object()) throw InputError(std::string(what) + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw InputError(std::string(what) + ": unknown key '" + key + "' (allowed: " + list + ")");
    }
  }
}

std::uint32_t get_count(const json& j, const char* key, std::uint32_t fallback, const char* what) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > 0xFFFFFFFFll) {
    throw InputError(std::string(what) + "." + key + ": expected a non-negative integer");
  }
  return v.get<std::uint32_t>();
}

double get_number(const json& j, const char* key, double fallback, const char* what) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number() || !std::isfinite(v.get<double>())) {
    throw InputError(std::string(what) + "." + key + ": expected a finite number");
  }
  return v.get<double>();
}

}  // namespace

NetworkConfig parse_network(const json& j, const NetworkConfig& defaults) {
  reject_unknown(j, {"n_in", "n_hidden", "n_out", "v_th", "lambda"}, "net");
  NetworkConfig c = defaults;
  c.n_in = get_count(j, "n_in", defaults.n_in, "net");
  c.n_hidden = get_count(j, "n_hidden", defaults.n_hidden, "net");
  c.n_out = get_count(j, "n_out", defaults.n_out, "net");
  c.v_th = Half::from_double(get_number(j, "v_th", defaults.v_th.to_double(), "net"));
  c.lambda = Half::from_double(get_number(j, "lambda", defaults.lambda.to_double(), "net"));
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("net: ") + e.what());
  }
  return c;
}

json network_to_json(const NetworkConfig& c) {
  json j;
  j["n_in"] = c.n_in;
  j["n_hidden"] = c.n_hidden;
  j["n_out"] = c.n_out;
  j["v_th"] = c.v_th.to_double();
  j["lambda"] = c.lambda.to_double();
  return j;
}

accel::HardwareConfig parse_hardware(const json& j) {
  reject_unknown(j,
                 {"pe_count", "clock_mhz", "read_latency", "add_latency", "mul_latency", "adder_tree_stages",
                  "writeback_latency", "neuron_latency", "trace_latency", "plasticity_lanes", "param_pack_width",
                  "ports_per_bank"},
                 "hardware");
  accel::HardwareConfig hw;
  const char* w = "hardware";
  hw.pe_count = get_count(j, "pe_count", hw.pe_count, w);
  hw.clock_mhz = get_number(j, "clock_mhz", hw.clock_mhz, w);
  hw.read_latency = get_count(j, "read_latency", hw.read_latency, w);
  hw.add_latency = get_count(j, "add_latency", hw.add_latency, w);
  hw.mul_latency = get_count(j, "mul_latency", hw.mul_latency, w);
  hw.adder_tree_stages = get_count(j, "adder_tree_stages", hw.adder_tree_stages, w);
  hw.writeback_latency = get_count(j, "writeback_latency", hw.writeback_latency, w);
  hw.neuron_latency = get_count(j, "neuron_latency", hw.neuron_latency, w);
  hw.trace_latency = get_count(j, "trace_latency", hw.trace_latency, w);
  hw.plasticity_lanes = get_count(j, "plasticity_lanes", hw.plasticity_lanes, w);
  hw.param_pack_width = get_count(j, "param_pack_width", hw.param_pack_width, w);
  hw.ports_per_bank = get_count(j, "ports_per_bank", hw.ports_per_bank, w);
  try {
    hw.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  return hw;
}

json hardware_to_json(const accel::HardwareConfig& hw) {
  json j;
  j["pe_count"] = hw.pe_count;
  j["clock_mhz"] = hw.clock_mhz;
  j["read_latency"] = hw.read_latency;
  j["add_latency"] = hw.add_latency;
  j["mul_latency"] = hw.mul_latency;
  j["adder_tree_stages"] = hw.adder_tree_stages;
  j["writeback_latency"] = hw.writeback_latency;
  j["neuron_latency"] = hw.neuron_latency;
  j["trace_latency"] = hw.trace_latency;
  j["plasticity_lanes"] = hw.plasticity_lanes;
  j["param_pack_width"] = hw.param_pack_width;
  j["ports_per_bank"] = hw.ports_per_bank;
  return j;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(bytes);
}

}  // namespace fflp::cli
