#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "plantsite/fusion.hpp"
#include "plantsite/reporting.hpp"
#include "plantsite/rubric.hpp"

namespace httplib {
class Server;
}

namespace plantsite {

/// Immutable bundle served to readers. Built once, never mutated.
class ScoredSnapshot {
public:
    /// Joins records to cells by grid_id and precomputes the per-cell rubric
    /// breakdown and the summary tables. Throws ValidationError when a record
    /// has no cell, or disagrees with its cell under `config` (s, exclusions, x, class).
    static std::shared_ptr<const ScoredSnapshot> build(std::vector<GridCell> cells,
                                                       std::vector<SuitabilityRecord> records, RunConfig config,
                                                       std::optional<GbdtModel> model = std::nullopt);

    const std::vector<GridCell>& cells() const { return cells_; }
    const std::vector<SuitabilityRecord>& records() const { return records_; }
    const RunConfig& config() const { return config_; }
    const std::optional<GbdtModel>& model() const { return model_; }
    const std::string& built_at() const { return built_at_; }
    const ClassDistribution& distribution() const { return distribution_; }
    const ClassDescriptives& descriptives() const { return descriptives_; }

    /// Index into records() for a grid id.
    std::optional<std::size_t> find(GridId id) const;
    const GridCell& cell_for(std::size_t record_index) const { return cells_[cell_of_record_[record_index]]; }
    const ExpertScore& breakdown(std::size_t record_index) const { return breakdowns_[record_index]; }

    /// FNV-1a over every stored score, for change detection.
    std::uint64_t fingerprint() const;

private:
    ScoredSnapshot() = default;

    std::vector<GridCell> cells_;
    std::vector<SuitabilityRecord> records_;  // sorted by grid_id
    std::vector<std::size_t> cell_of_record_;
    std::vector<ExpertScore> breakdowns_;
    std::unordered_map<GridId, std::size_t> by_id_;
    RunConfig config_;
    std::optional<GbdtModel> model_;
    std::string built_at_;
    ClassDistribution distribution_;
    ClassDescriptives descriptives_;
};

/// Holds the current snapshot. Readers take a shared_ptr copy and keep the
/// snapshot alive for the rest of their request; publish() swaps atomically.
class SnapshotHolder {
public:
    std::shared_ptr<const ScoredSnapshot> get() const
    {
        std::lock_guard lock(mutex_);
        return current_;
    }
    void publish(std::shared_ptr<const ScoredSnapshot> next)
    {
        std::lock_guard lock(mutex_);
        current_.swap(next);
    }

private:
    mutable std::mutex mutex_;
    std::shared_ptr<const ScoredSnapshot> current_;
};

struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    std::string body;  // JSON
};

/// HTTP/JSON read API over a scored landscape:
///   GET  /health                  liveness and snapshot timestamp (503 before load)
///   GET  /grids?bbox=x0,y0,x1,y1  cells whose center lies in the box, by grid_id
///   GET  /grids/{id}/breakdown    rubric rows, s, m, x, class, exclusion reasons
///   POST /whatif {"alpha": a}     reclassification over cached (s, m)
///   GET  /summary                 class distribution and descriptives
class SuitabilityService {
public:
    SuitabilityService();
    ~SuitabilityService();
    SuitabilityService(const SuitabilityService&) = delete;
    SuitabilityService& operator=(const SuitabilityService&) = delete;

    void publish(std::shared_ptr<const ScoredSnapshot> snapshot) { holder_.publish(std::move(snapshot)); }
    std::shared_ptr<const ScoredSnapshot> snapshot() const { return holder_.get(); }

    /// Transport-independent dispatch; safe to call from many threads.
    ApiResponse handle(const ApiRequest& request) const;

    /// Binds and serves until stop(). Port 0 picks a free port; see port().
    bool bind(const std::string& host, int port);
    bool serve();  // blocks until stop(); returns at once if stop() came first
    void stop();
    int port() const { return port_; }

private:
    std::unique_ptr<httplib::Server> server_;
    SnapshotHolder holder_;
    int port_ = 0;
    std::atomic<bool> serving_{false};
    std::atomic<bool> stop_requested_{false};
};

}  // namespace plantsite
