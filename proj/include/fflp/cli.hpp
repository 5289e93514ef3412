#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include "fflp/accel/hardware.hpp"
#include "fflp/snn.hpp"
#include "json.hpp"

namespace fflp::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kInternal = 1, kBadInput = 2, kIoFailure = 3 };

/// Bad user input: unknown keys, out-of-range values, unknown names.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Entry point of the `fflp` tool. Never throws; returns an ExitCode.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Network config object. Accepted keys: n_in, n_hidden, n_out, v_th, lambda.
/// Missing counts are taken from `defaults`; unknown keys are rejected.
NetworkConfig parse_network(const nlohmann::json& j, const NetworkConfig& defaults);
nlohmann::json network_to_json(const NetworkConfig& c);

/// Hardware config object; every HardwareConfig field is optional.
accel::HardwareConfig parse_hardware(const nlohmann::json& j);
nlohmann::json hardware_to_json(const accel::HardwareConfig& hw);

/// Reads a JSON file, mapping open failures to IoError and syntax errors to InputError.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace fflp::cli
