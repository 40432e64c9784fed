#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dpplab/bounds.hpp"

namespace dpplab {

struct ExperimentConfig {
    std::string experiment;  // sample | voidprob | vn | bounds | nnballs | maxnn |
                             // na-test | palm-test | decay-test
    uint64_t seed = 1;
    std::string output_dir = ".";
    std::map<std::string, double> params;   // n, tau, v, R, replicates, grid, c, epsilon, ...
    std::vector<double> n_list;             // maxnn sweep

    double get(const std::string& key, double fallback) const;
};

ExperimentConfig config_from_json_file(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg);

struct MetricRow {
    std::string name;
    double value = 0.0;
    double se = 0.0;
    std::string note;  // "PASS"/"FAIL" for invariant tests, free text otherwise
};

struct ExperimentReport {
    ExperimentConfig config;
    std::string version;
    std::vector<MetricRow> metrics;
    bool all_pass = true;
    double wall_clock_sec = 0.0;

    std::string to_json() const;  // byte-identical across reruns except wall_clock_sec
    const MetricRow* find(const std::string& name) const;
};

// Dispatch on config.experiment; writes config.json, report.json and the
// runner's data artifacts under config.output_dir (atomic, temp-then-rename).
ExperimentReport run_experiment(const ExperimentConfig& cfg);

ExperimentReport run_sample(const ExperimentConfig& cfg);
ExperimentReport run_voidprob(const ExperimentConfig& cfg);
ExperimentReport run_vn(const ExperimentConfig& cfg);
ExperimentReport run_bounds(const ExperimentConfig& cfg);
ExperimentReport run_nnballs(const ExperimentConfig& cfg);
ExperimentReport run_maxnn(const ExperimentConfig& cfg);
ExperimentReport run_na_test(const ExperimentConfig& cfg);
ExperimentReport run_palm_test(const ExperimentConfig& cfg);
ExperimentReport run_decay_test(const ExperimentConfig& cfg);

void write_text_atomic(const std::string& path, const std::string& content);

// Empirical count-law statistics.
double tv_counts(const std::vector<long>& a, const std::vector<long>& b);
double tv_to_poisson(const std::vector<long>& counts, double lambda);
// RMS of the two-sample TV under the pooled null; the scale of tv_counts'
// sampling noise when both samples share one law.
double pooled_null_tv_rms(const std::vector<long>& a, const std::vector<long>& b, int B,
                          RngStream& rng);
double bootstrap_tv_poisson_se(const std::vector<long>& counts, double lambda, int B,
                               RngStream& rng);
double quantile(std::vector<double> values, double p);  // type-7 linear interpolation

}  // namespace dpplab
