#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "onramp/types.hpp"

namespace onramp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitAbort = 3;

enum class Policy { Proposed, Baseline, Both };

struct RunRequest {
  std::filesystem::path scenario_path;
  Policy policy = Policy::Both;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output_dir = "out";
  bool emit_trajectories = false;
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "1..20", "7", "1,3,5" or a mix such as "1..3,9".
std::vector<std::uint64_t> parse_seeds(std::string_view text);

/// Platoon list CSV with header `id,origin,weight,size,headway,arrival_time,initial_speed`.
/// Errors carry the offending line number.
std::vector<Platoon> parse_platoon_csv(std::string_view text, const RoadGeometry& g);

int cmd_run(const RunRequest& req, std::ostream& out, std::ostream& err);

/// Entry point shared by the `onramp` executable and the tests.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace onramp::cli
