#pragma once

#include <string>
#include <vector>

#include "esvd/config.hpp"

namespace esvd {

// Subcommand entry points. Each writes JSON artifacts under cfg.out_dir and
// returns a process exit code (0 on success; errors are thrown and mapped by
// the caller).
int cmd_train(const RunConfig& cfg);
int cmd_postprocess(const RunConfig& cfg);
int cmd_baseline(const RunConfig& cfg, const std::string& method);  // quantile | barycenter
int cmd_evaluate(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg, const std::vector<double>& ce_grid,
              const std::vector<double>& cv_grid);

// Log verbosity from ESVD_LOG: 0 quiet (default warnings only), 1 info, 2 debug.
int log_level();
void log_info(const std::string& msg);
void log_warn(const std::string& msg);

}  // namespace esvd
