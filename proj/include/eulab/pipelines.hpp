#pragma once

// Runnable pipelines behind the CLI subcommands.  Each pipeline takes a JSON
// configuration, writes outputs under a directory, and reports pass/fail of
// its configured assertions.  CSV outputs are pure functions of the
// configuration (byte-identical across reruns and thread counts); wall-clock
// timestamps appear only in report.json.

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "eulab/covariance.hpp"

namespace eulab {

struct PipelineResult {
  bool pass = true;
  std::string message;  // one-line outcome
};

// Covariance model from {"family": "gaussian", "scale": s}; unknown families
// are a configuration error.
std::unique_ptr<CovarianceModel> make_model(const nlohmann::json& spec, int n);

PipelineResult run_sample_pipeline(const nlohmann::json& cfg, const std::string& out_dir,
                                   int threads);
PipelineResult run_euler_pipeline(const nlohmann::json& cfg, const std::string& out_dir,
                                  int threads);
PipelineResult run_clt_pipeline(const nlohmann::json& cfg, const std::string& out_dir,
                                int threads);
PipelineResult run_mean_pipeline(const nlohmann::json& cfg, const std::string& out_dir,
                                 int threads);
PipelineResult run_variance_pipeline(const nlohmann::json& cfg,
                                     const std::string& out_dir, int threads);
PipelineResult run_targets_pipeline(const nlohmann::json& cfg, const std::string& out_dir,
                                    int threads);
PipelineResult run_tameness_pipeline(const nlohmann::json& cfg,
                                     const std::string& out_dir, int threads);

// Dispatch by subcommand name; unknown names are a configuration error.
PipelineResult run_pipeline(const std::string& name, const nlohmann::json& cfg,
                            const std::string& out_dir, int threads);

}  // namespace eulab
