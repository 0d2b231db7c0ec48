#pragma once

// HTTP/JSON API for the review UI.
//
//   GET  /api/projects/:key/commits/:hash/recommendations?k=3
//   GET  /api/projects/:key/review-batches/:id
//   POST /api/projects/:key/verdicts
//   GET  /api/projects/:key/stats
//   GET  /api/projects/:key/kappa?batch=:id
//
// Handlers are plain member functions returning (status, JSON) so they can be
// tested without sockets; mount() wires them into a cpp-httplib server.
// Reads share a lock; a verdict takes it exclusively, updates the store and
// appends one line each to verdicts.jsonl and links.jsonl. Issues and commits
// are never modified.

#include <chrono>
#include <filesystem>
#include <functional>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "traceforge/archive.hpp"
#include "traceforge/eval/review.hpp"
#include "traceforge/pipeline.hpp"

namespace traceforge::service {

inline constexpr int kDefaultPort = 7180;
inline constexpr std::size_t kDefaultK = 3;

struct Response {
    int status = 200;
    nlohmann::json body;
};

inline Response error_response(int status, const std::string& message) {
    return {status, {{"error", message}}};
}

struct ServiceOptions {
    AttributeSet attribute_set = AttributeSet::All;
    learn::ClassifierKind kind = learn::ClassifierKind::RandomForest;
    CandidateConfig candidates;
    std::string cors_origin = "*";
    /// Clock for verdict timestamps; tests pin it.
    std::function<Timestamp()> clock = [] {
        return Timestamp{std::chrono::duration_cast<std::chrono::seconds>(
                             std::chrono::system_clock::now().time_since_epoch())
                             .count()};
    };
};

class ReviewService {
public:
    ReviewService(std::filesystem::path archive, ServiceOptions options)
        : archive_(std::move(archive)), options_(std::move(options)), store_(load_project(archive_)) {
        models_ = load_models(archive_, options_.attribute_set, options_.kind);
    }

    const ProjectStore& store() const { return store_; }
    bool has_model() const { return !models_.empty(); }

    Response recommendations(const std::string& key, const std::string& hash, std::size_t k) const {
        std::shared_lock lock(mutex_);
        if (key != store_.project_key) return error_response(404, "unknown project '" + key + "'");
        auto it = store_.commits.find(hash);
        if (it == store_.commits.end()) return error_response(404, "unknown commit '" + hash + "'");
        if (models_.empty()) return error_response(409, "no trained model loaded; run train first");
        const auto& commit = it->second;
        const auto ranked = recommend(store_, models_, hash, k, options_.candidates);
        nlohmann::json list = nlohmann::json::array();
        for (const auto& r : ranked) {
            const auto& issue = store_.issue(r.issue_key);
            list.push_back({{"issue_key", r.issue_key},
                            {"score", r.score},
                            {"summary", issue.summary},
                            {"description", issue.description}});
        }
        nlohmann::json files = nlohmann::json::array();
        for (const auto& f : commit.files) files.push_back(f.path);
        const auto& b = models_.front().bundle;
        return {200,
                {{"commit_hash", hash},
                 {"message", commit.message},
                 {"files", files},
                 {"k", k},
                 {"recommendations", list},
                 {"model",
                  {{"attribute_set", b.attribute_set},
                   {"kind", std::string(learn::to_string(b.params.kind))},
                   {"seed", b.params.seed}}}}};
    }

    Response review_batch(const std::string& key, const std::string& id) const {
        std::shared_lock lock(mutex_);
        if (key != store_.project_key) return error_response(404, "unknown project '" + key + "'");
        if (!eval::is_valid_batch_id(id)) return error_response(404, "unknown review batch '" + id + "'");
        try {
            return {200, eval::load_batch(archive_, id).rater_json(store_)};
        } catch (const LookupError& e) {
            return error_response(404, e.what());
        }
    }

    /// Body: {"commit_hash", "issue_key", "decision": "accept"|"reject",
    /// "rater"}; the rater may come from the X-Rater-Id header instead.
    Response post_verdict(const std::string& key, const std::string& body, const std::string& rater_header = "") {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception&) {
            return error_response(400, "request body is not JSON");
        }
        if (!j.is_object() || !j.contains("commit_hash") || !j.contains("issue_key") || !j.contains("decision") ||
            !j["commit_hash"].is_string() || !j["issue_key"].is_string() || !j["decision"].is_string()) {
            return error_response(400, "verdict needs commit_hash, issue_key and decision");
        }
        Verdict v;
        v.commit_hash = j["commit_hash"].get<std::string>();
        v.issue_key = j["issue_key"].get<std::string>();
        const auto decision = j["decision"].get<std::string>();
        if (decision != "accept" && decision != "reject") {
            return error_response(400, "decision must be accept or reject");
        }
        v.decision = decision == "accept" ? Decision::Accept : Decision::Reject;
        v.rater = j.contains("rater") && j["rater"].is_string() ? j["rater"].get<std::string>() : rater_header;
        if (v.rater.empty()) return error_response(400, "verdict needs a rater (field or X-Rater-Id header)");

        std::unique_lock lock(mutex_);
        if (key != store_.project_key) return error_response(404, "unknown project '" + key + "'");
        if (!servable(v.commit_hash, v.issue_key)) {
            return error_response(404, "unknown pair " + v.commit_hash + " / " + v.issue_key);
        }
        for (const auto& old : store_.verdicts) {
            if (old.rater == v.rater && old.commit_hash == v.commit_hash && old.issue_key == v.issue_key) {
                return error_response(409, "rater '" + v.rater + "' already judged this pair");
            }
        }
        v.timestamp = options_.clock();
        TraceLink link;
        link.commit_hash = v.commit_hash;
        link.issue_key = v.issue_key;
        link.origin = v.decision == Decision::Accept ? LinkOrigin::HumanAccepted : LinkOrigin::HumanRejected;
        link.decided_by = v.rater;
        link.decided_at = v.timestamp;

        append_line(archive_ / "verdicts.jsonl", archive_detail::to_json(v).dump());
        store_.verdicts.push_back(v);
        const bool new_link = store_.add_link(link);
        if (new_link) append_line(archive_ / "links.jsonl", archive_detail::to_json(link).dump());
        return {201,
                {{"verdict", archive_detail::to_json(v)},
                 {"link", archive_detail::to_json(link)},
                 {"link_created", new_link},
                 {"is_linked", store_.is_linked(v.commit_hash, v.issue_key)}}};
    }

    Response stats(const std::string& key) const {
        std::shared_lock lock(mutex_);
        if (key != store_.project_key) return error_response(404, "unknown project '" + key + "'");
        auto j = project_stats(store_, options_.candidates);
        j["model_loaded"] = !models_.empty();
        return {200, j};
    }

    Response kappa(const std::string& key, const std::string& batch_id) const {
        std::shared_lock lock(mutex_);
        if (key != store_.project_key) return error_response(404, "unknown project '" + key + "'");
        if (batch_id.empty()) return error_response(400, "missing batch parameter");
        if (!eval::is_valid_batch_id(batch_id)) return error_response(404, "unknown review batch '" + batch_id + "'");
        try {
            const auto batch = eval::load_batch(archive_, batch_id);
            return {200, eval::batch_agreement(store_.verdicts, batch).to_json(batch_id)};
        } catch (const LookupError& e) {
            return error_response(404, e.what());
        } catch (const DataError& e) {
            return error_response(409, e.what());
        }
    }

    void mount(httplib::Server& server) {
        auto send = [this](httplib::Response& res, const Response& r) {
            res.status = r.status;
            res.set_header("Access-Control-Allow-Origin", options_.cors_origin);
            res.set_content(r.body.dump(), "application/json");
        };
        server.Options(R"(/api/.*)", [this](const httplib::Request&, httplib::Response& res) {
            res.status = 204;
            res.set_header("Access-Control-Allow-Origin", options_.cors_origin);
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type, X-Rater-Id");
        });
        server.Get(R"(/api/projects/([^/]+)/commits/([^/]+)/recommendations)",
                   [this, send](const httplib::Request& req, httplib::Response& res) {
                       std::size_t k = kDefaultK;
                       if (req.has_param("k")) {
                           const auto text = req.get_param_value("k");
                           try {
                               std::size_t used = 0;
                               const long value = std::stol(text, &used);
                               if (used != text.size() || value < 1) throw std::invalid_argument(text);
                               k = static_cast<std::size_t>(value);
                           } catch (const std::exception&) {
                               return send(res, error_response(400, "k must be a positive integer"));
                           }
                       }
                       send(res, recommendations(req.matches[1], req.matches[2], k));
                   });
        server.Get(R"(/api/projects/([^/]+)/review-batches/([^/]+))",
                   [this, send](const httplib::Request& req, httplib::Response& res) {
                       send(res, review_batch(req.matches[1], req.matches[2]));
                   });
        server.Post(R"(/api/projects/([^/]+)/verdicts)", [this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, post_verdict(req.matches[1], req.body, req.get_header_value("X-Rater-Id")));
        });
        server.Get(R"(/api/projects/([^/]+)/stats)", [this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, stats(req.matches[1]));
        });
        server.Get(R"(/api/projects/([^/]+)/kappa)", [this, send](const httplib::Request& req, httplib::Response& res) {
            send(res, kappa(req.matches[1], req.get_param_value("batch")));
        });
        server.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string what = "internal error";
            try {
                if (ep) std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                what = e.what();
            } catch (...) {
            }
            send(res, error_response(500, what));
        });
    }

private:
    /// A candidate pair or an entry of some review batch.
    bool servable(const std::string& hash, const std::string& key) const {
        auto c = store_.commits.find(hash);
        auto i = store_.issues.find(key);
        if (c == store_.commits.end() || i == store_.issues.end()) return false;
        if (is_candidate(c->second, i->second, options_.candidates)) return true;
        for (const auto& batch : eval::load_batches(archive_)) {
            if (batch.contains(hash, key)) return true;
        }
        return false;
    }

    static void append_line(const std::filesystem::path& file, const std::string& line) {
        std::ofstream out(file, std::ios::app);
        out << line << "\n";
        if (!out) throw Error("cannot append to " + file.string());
    }

    std::filesystem::path archive_;
    ServiceOptions options_;
    ProjectStore store_;
    std::vector<DeployedModel> models_;
    mutable std::shared_mutex mutex_;
};

}  // namespace traceforge::service
