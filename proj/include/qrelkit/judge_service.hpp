#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qrelkit/collection.hpp"
#include "qrelkit/error.hpp"
#include "qrelkit/pooling.hpp"

namespace qrelkit {

/// An error carrying the HTTP status it maps to.
class ServiceError : public Error {
  public:
    ServiceError(int status, std::string const& what) : Error(what), status_(status) {}
    [[nodiscard]] int status() const noexcept { return status_; }

  private:
    int status_;
};

struct TaskAssignment {
    std::string query_id;
    std::string query_text;
    std::string doc_id;
    std::string title;
    std::string body;
    std::string annotator;
    /// Ratings still needed for the task, counting this assignment.
    int outstanding_raters = 0;
};

struct SubmitResult {
    bool duplicate = false;
};

struct Progress {
    std::size_t total_tasks = 0;
    std::size_t fully_judged = 0;
    std::size_t judgments = 0;
    std::map<std::string, std::size_t> per_annotator;
};

struct AgreementResult {
    double kappa = 0.0;
    std::size_t items = 0;
};

struct JudgeConfig {
    int raters_per_item = 3;
    /// Append-only JSONL log; replayed at construction when it exists.
    std::optional<std::filesystem::path> log;
    /// Base qrels the export merges into.
    Qrels base;
};

/// State of one annotation round. All public members are thread-safe;
/// writes are serialized and appended to the log before they take effect.
class JudgeSession {
  public:
    /// Throws DataError when a pool task's query or document is missing or
    /// the log conflicts with the pool.
    JudgeSession(Pool pool, Corpus const& corpus, QuerySet const& queries, JudgeConfig config = {});

    /// The annotator's pending assignment if one is still open, otherwise
    /// the open task they have not judged with the fewest completed ratings
    /// (ties by query id, then doc id). nullopt when nothing is left.
    [[nodiscard]] std::optional<TaskAssignment> next_task(std::string const& annotator);

    /// Status 400 on a bad grade or empty id, 404 for a task outside the
    /// pool, 403 when the task was not assigned to the annotator, 409 on a
    /// conflicting resubmission or when the task filled up first.
    SubmitResult submit(std::string const& annotator, std::string const& query_id, std::string const& doc_id,
                        Grade grade);

    [[nodiscard]] Progress progress() const;
    /// Fleiss' kappa over fully judged tasks. Status 409 with fewer than two
    /// such tasks or when kappa is undefined.
    [[nodiscard]] AgreementResult agreement() const;
    /// Merged qrels TSV over fully judged tasks.
    [[nodiscard]] std::string export_qrels() const;
    [[nodiscard]] std::vector<JudgmentRecord> records() const;
    [[nodiscard]] int raters_per_item() const noexcept { return config_.raters_per_item; }

  private:
    struct TaskState {
        std::size_t index = 0;
        std::map<std::string, Grade> grades;
    };

    void replay(std::vector<JudgmentRecord> const& records, std::string const& origin);
    [[nodiscard]] bool full(TaskState const& t) const
    {
        return static_cast<int>(t.grades.size()) >= config_.raters_per_item;
    }
    [[nodiscard]] TaskAssignment make_assignment(TaskKey const& key, TaskState const& t,
                                                 std::string const& annotator) const;
    [[nodiscard]] std::vector<JudgmentRecord> complete_records() const;

    Pool pool_;
    JudgeConfig config_;
    std::map<TaskKey, TaskState> tasks_;
    std::map<TaskKey, std::pair<Document const*, Query const*>> views_;
    std::map<std::string, std::set<TaskKey>> pending_;
    std::vector<JudgmentRecord> records_;
    std::ofstream log_;
    mutable std::mutex mutex_;
};

/// A transport-independent request and response.
struct HttpRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> params;
    std::string body;
};

struct HttpResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

/// Routes one API request. A null session answers every endpoint with 409.
[[nodiscard]] HttpResponse handle_request(JudgeSession* session, HttpRequest const& request);

/// HTTP server exposing handle_request under /api and, optionally, static
/// files for the annotation UI.
class JudgeServer {
  public:
    explicit JudgeServer(JudgeSession* session, std::optional<std::filesystem::path> static_dir = std::nullopt);
    ~JudgeServer();
    JudgeServer(JudgeServer const&) = delete;
    JudgeServer& operator=(JudgeServer const&) = delete;

    /// Binds to the port (0 picks a free one) and returns the bound port.
    int bind(std::string const& host, int port);
    /// Blocks until stop() is called.
    void run();
    void stop();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace qrelkit
