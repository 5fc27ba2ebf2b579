#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "config.hpp"

namespace kolmo::cli {

inline constexpr const char* kToolVersion = KOLMO_VERSION;

/// A stage failed at run time (bad input, numerical failure); exit status 1.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Runs one stage with the parameters in cfg and writes its manifest next to
/// the primary output. Progress goes to log.
void run_stage(RunConfig& cfg, const std::string& stage, std::ostream& log);

/// Runs cfg.stages in order.
void run_pipeline(RunConfig& cfg, std::ostream& log);

/// Re-executes the stage recorded in a manifest. With verify, input hashes
/// are checked before the run and output hashes after it; returns false on
/// any mismatch.
bool replay(const std::string& manifest_path, bool verify, std::ostream& log);

}  // namespace kolmo::cli
