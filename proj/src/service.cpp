#include "plantsite/service.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <ctime>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "plantsite/io_util.hpp"

namespace plantsite {

using nlohmann::json;

namespace {

std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ApiResponse error(int status, const std::string& message) { return {status, json{{"error", message}}.dump()}; }
ApiResponse ok(const json& body) { return {200, body.dump()}; }

std::uint64_t fnv(std::uint64_t h, const void* data, std::size_t n)
{
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::optional<std::array<double, 4>> parse_bbox(const std::string& text)
{
    const auto parts = split(text, ',');
    if (parts.size() != 4) return std::nullopt;
    std::array<double, 4> v{};
    try {
        for (std::size_t i = 0; i < 4; ++i) v[i] = parse_number(parts[i]);
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
    for (double d : v)
        if (!std::isfinite(d)) return std::nullopt;
    if (v[0] > v[2] || v[1] > v[3]) return std::nullopt;
    return v;
}

}  // namespace

std::shared_ptr<const ScoredSnapshot> ScoredSnapshot::build(std::vector<GridCell> cells,
                                                            std::vector<SuitabilityRecord> records, RunConfig config,
                                                            std::optional<GbdtModel> model)
{
    config.validate();
    std::shared_ptr<ScoredSnapshot> snap(new ScoredSnapshot());
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.grid_id < b.grid_id; });

    std::unordered_map<GridId, std::size_t> cell_index;
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (!cell_index.emplace(cells[i].grid_id, i).second)
            throw ValidationError("duplicate cell grid_id " + std::to_string(cells[i].grid_id));

    snap->cell_of_record_.reserve(records.size());
    snap->breakdowns_.reserve(records.size());
    for (std::size_t r = 0; r < records.size(); ++r) {
        const auto& rec = records[r];
        auto it = cell_index.find(rec.grid_id);
        if (it == cell_index.end())
            throw ValidationError("score record for grid " + std::to_string(rec.grid_id) + " has no cell in the landscape");
        if (!snap->by_id_.emplace(rec.grid_id, r).second)
            throw ValidationError("duplicate score record for grid " + std::to_string(rec.grid_id));
        auto score = expert_score(cells[it->second]);
        if (score.s != rec.s)
            throw ValidationError("score record for grid " + std::to_string(rec.grid_id) +
                                  " does not match its cell (s " + format_number(rec.s) + " vs " +
                                  format_number(score.s) + ")");
        if (apply_exclusions(cells[it->second], config.exclusion) != rec.exclusion)
            throw ValidationError("score record for grid " + std::to_string(rec.grid_id) +
                                  " has exclusion reasons that differ from the configured policy");
        const auto [x, cls] = refuse(rec, config.alpha);
        if (x != rec.x || cls != rec.cls)
            throw ValidationError("score record for grid " + std::to_string(rec.grid_id) +
                                  " was not fused with alpha " + format_number(config.alpha));
        snap->cell_of_record_.push_back(it->second);
        snap->breakdowns_.push_back(score);
    }

    snap->distribution_ = class_distribution(records);
    snap->descriptives_ = class_descriptives(records, cells);
    snap->cells_ = std::move(cells);
    snap->records_ = std::move(records);
    snap->config_ = config;
    snap->model_ = std::move(model);
    snap->built_at_ = utc_timestamp();
    return snap;
}

std::optional<std::size_t> ScoredSnapshot::find(GridId id) const
{
    auto it = by_id_.find(id);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

std::uint64_t ScoredSnapshot::fingerprint() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& r : records_) {
        h = fnv(h, &r.grid_id, sizeof r.grid_id);
        h = fnv(h, &r.s, sizeof r.s);
        h = fnv(h, &r.m, sizeof r.m);
        h = fnv(h, &r.x, sizeof r.x);
        h = fnv(h, &r.cls, sizeof r.cls);
        const auto reasons = r.exclusion.joined();
        h = fnv(h, reasons.data(), reasons.size());
    }
    return h;
}

SuitabilityService::SuitabilityService() : server_(std::make_unique<httplib::Server>())
{
    auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
        ApiRequest api{req.method, req.path, {}, req.body};
        for (const auto& [k, v] : req.params) api.query.emplace(k, v);
        const auto out = handle(api);
        res.status = out.status;
        res.set_content(out.body, "application/json");
    };
    server_->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                  {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                  {"Access-Control-Allow-Headers", "Content-Type"}});
    server_->Get(".*", dispatch);
    server_->Post(".*", dispatch);
    server_->Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

SuitabilityService::~SuitabilityService() { stop(); }

bool SuitabilityService::bind(const std::string& host, int port)
{
    stop_requested_ = false;
    if (port == 0) {
        port_ = server_->bind_to_any_port(host);
        return port_ > 0;
    }
    port_ = port;
    return server_->bind_to_port(host, port);
}

bool SuitabilityService::serve()
{
    serving_ = true;
    if (stop_requested_) {
        serving_ = false;
        return true;
    }
    const bool ok = server_->listen_after_bind();
    serving_ = false;
    return ok;
}

void SuitabilityService::stop()
{
    stop_requested_ = true;
    if (!server_) return;
    // httplib ignores stop() until the accept loop is running
    while (serving_ && !server_->is_running()) std::this_thread::yield();
    server_->stop();
}

ApiResponse SuitabilityService::handle(const ApiRequest& request) const
{
    const auto snap = holder_.get();
    const auto parts = [&] {
        std::vector<std::string_view> p;
        for (auto s : split(request.path, '/'))
            if (!s.empty()) p.push_back(s);
        return p;
    }();

    if (request.method == "GET" && parts.size() == 1 && parts[0] == "health") {
        if (!snap) return {503, json{{"status", "loading"}, {"snapshot_timestamp", nullptr}}.dump()};
        return ok({{"status", "ok"}, {"snapshot_timestamp", snap->built_at()}});
    }
    if (!snap) return error(503, "no snapshot loaded");

    if (request.method == "GET" && parts.size() == 1 && parts[0] == "grids") {
        auto it = request.query.find("bbox");
        if (it == request.query.end()) return error(400, "missing bbox=x0,y0,x1,y1");
        const auto bbox = parse_bbox(it->second);
        if (!bbox) return error(400, "malformed bbox; expected x0,y0,x1,y1 with x0<=x1 and y0<=y1");
        json out = json::array();
        for (std::size_t i = 0; i < snap->records().size(); ++i) {
            const auto& cell = snap->cell_for(i);
            const Point c = cell.center();
            if (c.x < (*bbox)[0] || c.x > (*bbox)[2] || c.y < (*bbox)[1] || c.y > (*bbox)[3]) continue;
            const auto& r = snap->records()[i];
            out.push_back({{"grid_id", r.grid_id},
                           {"origin", {cell.origin.x, cell.origin.y}},
                           {"size_m", cell.size_m},
                           {"x", r.x},
                           {"class", to_string(r.cls)}});
        }
        return ok(out);
    }

    if (request.method == "GET" && parts.size() == 3 && parts[0] == "grids" && parts[2] == "breakdown") {
        GridId id = 0;
        try {
            id = parse_integer(parts[1]);
        } catch (const std::invalid_argument&) {
            return error(400, "grid id must be an integer");
        }
        const auto idx = snap->find(id);
        if (!idx) return error(404, "unknown grid id " + std::to_string(id));
        const auto& r = snap->records()[*idx];
        json body = breakdown_json(id, snap->breakdown(*idx));
        json reasons = json::array();
        for (const auto& reason : r.exclusion.reasons) reasons.push_back(reason.to_string());
        body["s"] = r.s;
        body["m"] = r.m;
        body["x"] = r.x;
        body["class"] = to_string(r.cls);
        body["excluded"] = r.excluded();
        body["exclusion_reasons"] = std::move(reasons);
        return ok(body);
    }

    if (request.method == "POST" && parts.size() == 1 && parts[0] == "whatif") {
        double alpha = 0.0;
        try {
            const json body = json::parse(request.body);
            if (!body.is_object() || !body.contains("alpha") || !body["alpha"].is_number())
                return error(400, "body must be {\"alpha\": number}");
            alpha = body["alpha"].get<double>();
        } catch (const json::exception&) {
            return error(400, "body is not valid JSON");
        }
        if (!(alpha >= 0.0 && alpha <= 1.0)) return error(400, "alpha must lie in [0,1]");

        const auto& records = snap->records();
        std::vector<SuitabilityClass> classes(records.size());
        json changes = json::array();
        for (std::size_t i = 0; i < records.size(); ++i) {
            classes[i] = refuse(records[i], alpha).second;
            if (classes[i] != records[i].cls)
                changes.push_back(
                    {{"grid_id", records[i].grid_id}, {"from", to_string(records[i].cls)}, {"to", to_string(classes[i])}});
        }
        const std::size_t changed = changes.size();
        return ok({{"alpha", alpha},
                   {"distribution", to_json(class_distribution(classes))},
                   {"changed_cells", changed},
                   {"changes", std::move(changes)}});
    }

    if (request.method == "GET" && parts.size() == 1 && parts[0] == "summary") {
        return ok({{"alpha", snap->config().alpha},
                   {"cells", snap->records().size()},
                   {"distribution", to_json(snap->distribution())},
                   {"descriptives", to_json(snap->descriptives())}});
    }

    return error(404, "no route for " + request.method + " " + request.path);
}

}  // namespace plantsite
