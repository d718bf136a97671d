#pragma once

#include <string>
#include <vector>

#include "qbell/config.hpp"

namespace qbell {

/// Provenance header emitted as the first JSONL record of every run.
struct RunRecord {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    double wall_seconds = 0;
    std::string command;
    nlohmann::json to_json() const;
};

struct ChshScanRow {
    int site_a = 0, site_b = 0;
    double r = 0;
    double chsh_sup = 0;
    double epsilon = 0;
    bool satisfied = false;
};

struct ChshScanResult {
    std::vector<ChshScanRow> rows;
    std::vector<CorrelationSample> samples;
    ClusteringFit fit;
    RunRecord record;
};

struct ClusteringFitResult {
    std::vector<CorrelationSample> samples;
    ClusteringFit fit;
    bool dominance_ok = false;
    RunRecord record;
};

struct QuenchCell {
    double t = 0, r = 0;
    double value = 0;  // max |connected correlator| over basis pairs at (t, r)
    double bound = 0;
    bool dominated = false;
};

struct QuenchResult {
    std::vector<QuenchCell> cells;
    std::vector<CorrelationSample> samples;
    PropagationFit fit;
    RunRecord record;
};

struct CertifyResult {
    std::vector<LocalityCertificate> certificates;
    ClusteringFit fit;
    RunRecord record;
};

ChshScanResult cmd_chsh_scan(const ExperimentConfig& cfg);
ClusteringFitResult cmd_clustering_fit(const ExperimentConfig& cfg);
QuenchResult cmd_quench(const ExperimentConfig& cfg);
CertifyResult cmd_bell_certify(const ExperimentConfig& cfg);
LocalBoundResult cmd_local_bound(const std::string& inequality_file);

/// All site pairs scheduled by the config (ascending, a < b).
std::vector<std::pair<int, int>> scheduled_pairs(const ExperimentConfig& cfg,
                                                 const Lattice& lat);

/// Connected-correlator samples over the configured basis and pair schedule.
std::vector<CorrelationSample> scan_samples(const ExperimentConfig& cfg,
                                            const Lattice& lat,
                                            const ManyBodyState& state, double t = 0);

// serialization: 17 significant digits so determinism is byte-checkable
std::string format_g17(double x);
void write_samples_csv(const std::string& path,
                       const std::vector<CorrelationSample>& samples);
void write_chsh_csv(const std::string& path, const std::vector<ChshScanRow>& rows);
void write_quench_csv(const std::string& path, const std::vector<QuenchCell>& cells);
nlohmann::json fit_to_json(const ClusteringFit& fit);
nlohmann::json fit_to_json(const PropagationFit& fit);
void write_jsonl(const std::string& path, const RunRecord& record,
                 const std::vector<nlohmann::json>& rows);

}  // namespace qbell
