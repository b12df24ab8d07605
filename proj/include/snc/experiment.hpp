// experiment.hpp - Configured experiment runs behind the sncbench tool.
//
// Config files are flat `key = value` text with dotted keys and `#`
// comments:
//
//   scenario = cross-traffic
//   traffic.lambda_f = 0.25
//   traffic.lambda_c = 0.25
//   traffic.mu = 1
//   node.capacity = 1
//   node.scheduler = priority
//   run.replications = 100000
//   run.seed = 7
//
// Every runner writes CSV files under the output directory and returns the
// check reports it produced.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <span>
#include <vector>

#include "snc/validation.hpp"

namespace snc {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string scenario = "single-flow";  // single-flow | cross-traffic | sweep | pitfall | validate-all

    double lambda_f = 0.5;
    double lambda_c = 0.0;
    double mu = 1.0;
    std::optional<double> length;  // deterministic packet length instead of Exp(mu)

    double capacity = 1.0;
    std::string scheduler = "priority";  // priority | fifo

    std::size_t replications = 100000;  // independent runs for CCDF estimates
    std::size_t sample_index = 200;     // packet sampled per replication
    std::size_t packets = 1000000;      // long-run length for means
    std::size_t traces = 1000;          // random traces for the lemma suite
    double warmup = 0.01;
    double delta = 0.01;
    double tau_max = 40.0;
    double tau_step = 0.5;
    std::uint64_t seed = 1;
    std::optional<double> theta;  // overrides the default theta of the bounds

    std::filesystem::path out_dir = "out";

    CompoundPoissonSpec traversing_spec() const;
    CompoundPoissonSpec crossing_spec() const;
    NodeConfig node() const;
    std::vector<double> tau_grid() const;
    // Throws ConfigError naming the violated condition.
    void validate() const;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunOutcome {
    std::vector<CheckReport> reports;
    std::vector<std::string> warnings;
    std::vector<std::string> notes;
    std::vector<std::filesystem::path> files;

    bool passed() const;
    void append(RunOutcome other);
};

struct PitfallRow {
    double t;
    double arrivals;
    double actual_output;
    double convolution_output;
};
// One packet a = 1, l = 2 at C = 1, reported for t = 0..4.
std::vector<PitfallRow> pitfall_table();

RunOutcome run_single_flow(const ExperimentConfig& cfg);
RunOutcome run_cross_traffic(const ExperimentConfig& cfg);
RunOutcome run_sweep(const ExperimentConfig& cfg);
RunOutcome run_pitfall(const ExperimentConfig& cfg);
// Sample-path lemma checks over cfg.traces random two-flow traces under
// both schedulers.
RunOutcome run_lemma_suite(const ExperimentConfig& cfg);
RunOutcome run_validate_all(const ExperimentConfig& cfg);

struct SweepCell {
    double rho;
    double share;
    double exact;
    double bound;
    double ratio;
};
std::vector<SweepCell> sweep_cells(double mu, std::span<const double> rhos, std::span<const double> shares);

}  // namespace snc
