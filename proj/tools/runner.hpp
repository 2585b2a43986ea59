#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "config.hpp"

namespace mdim::cli {

/// Column order of every per-task estimate CSV.
inline const char* kEstimateHeader =
    "config_hash,seed,task,estimate,eps,n,delta,point,kind,raw_count,log_count,bound,rate,mode,statistic,stderr";
inline const char* kVerifyHeader = "config_hash,seed,chain_id,parameters,left,middle,right,verdict,z,note";
inline const char* kExampleHeader =
    "config_hash,seed,eps,ell,bk,bk_lower,bk_upper,bk_spread,band_lower,band_upper,S,S_over_log,S_bound,in_band";

enum ExitCode { kExitOk = 0, kExitFailure = 1, kExitConfig = 2 };

struct RunOutcome {
  int exit_code = kExitOk;
  std::vector<std::string> files;     // written, relative to the output directory
  std::vector<std::string> warnings;  // degraded tasks
};

/// Runs every task of the config and writes <task>.csv plus summary.jsonl
/// into cfg.out. Tasks run on up to cfg.jobs threads.
RunOutcome run_experiment(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace mdim::cli
