#include "qrelkit/judge_service.hpp"

#include <httplib.h>
#include <json.hpp>

#include "qrelkit/metrics.hpp"

namespace qrelkit {

using json = nlohmann::ordered_json;

JudgeSession::JudgeSession(Pool pool, Corpus const& corpus, QuerySet const& queries, JudgeConfig config)
    : pool_(std::move(pool)), config_(std::move(config))
{
    if (config_.raters_per_item < 1) {
        throw ValidationError("raters per item must be >= 1");
    }
    std::size_t index = 0;
    for (auto const& [key, tags] : pool_.tasks()) {
        auto const* doc = corpus.find(key.second);
        auto const* query = queries.find(key.first);
        if (doc == nullptr) {
            throw DataError("pool task (" + key.first + ", " + key.second + "): document not in corpus");
        }
        if (query == nullptr) {
            throw DataError("pool task (" + key.first + ", " + key.second + "): query not in query set");
        }
        tasks_[key].index = index++;
        views_[key] = {doc, query};
    }
    if (config_.log) {
        replay(read_judgment_log(*config_.log), config_.log->string());
        log_.open(*config_.log, std::ios::app | std::ios::binary);
        if (!log_) {
            throw DataError("cannot open judgment log " + config_.log->string());
        }
    }
}

void JudgeSession::replay(std::vector<JudgmentRecord> const& records, std::string const& origin)
{
    std::size_t lineno = 0;
    for (auto const& r : records) {
        ++lineno;
        auto it = tasks_.find(TaskKey{r.query_id, r.doc_id});
        if (it == tasks_.end()) {
            throw DataError::at(origin, lineno, "task (" + r.query_id + ", " + r.doc_id + ") is not in the pool");
        }
        auto& t = it->second;
        if (auto g = t.grades.find(r.annotator); g != t.grades.end()) {
            if (g->second != r.grade) {
                throw DataError::at(origin, lineno, "conflicting grade from '" + r.annotator + "'");
            }
            continue;
        }
        if (full(t)) {
            throw DataError::at(origin, lineno, "task (" + r.query_id + ", " + r.doc_id + ") has too many records");
        }
        t.grades.emplace(r.annotator, r.grade);
        records_.push_back(r);
    }
}

TaskAssignment JudgeSession::make_assignment(TaskKey const& key, TaskState const& t,
                                             std::string const& annotator) const
{
    auto const& [doc, query] = views_.at(key);
    return {key.first,  query->text,
            key.second, doc->title,
            doc->body,  annotator,
            config_.raters_per_item - static_cast<int>(t.grades.size())};
}

std::optional<TaskAssignment> JudgeSession::next_task(std::string const& annotator)
{
    if (annotator.empty()) {
        throw ServiceError(400, "annotator must not be empty");
    }
    std::lock_guard lock(mutex_);
    auto& pending = pending_[annotator];
    for (auto it = pending.begin(); it != pending.end();) {
        auto const& t = tasks_.at(*it);
        if (full(t) || t.grades.contains(annotator)) {
            it = pending.erase(it);
        } else {
            return make_assignment(*it, t, annotator);
        }
    }
    TaskKey const* best = nullptr;
    std::size_t best_done = 0;
    // tasks_ iterates in (query id, doc id) order, so the first minimum wins ties.
    for (auto const& [key, t] : tasks_) {
        if (full(t) || t.grades.contains(annotator)) {
            continue;
        }
        if (best == nullptr || t.grades.size() < best_done) {
            best = &key;
            best_done = t.grades.size();
        }
    }
    if (best == nullptr) {
        return std::nullopt;
    }
    pending.insert(*best);
    return make_assignment(*best, tasks_.at(*best), annotator);
}

SubmitResult JudgeSession::submit(std::string const& annotator, std::string const& query_id,
                                  std::string const& doc_id, Grade grade)
{
    if (!valid_grade(grade)) {
        throw ServiceError(400, "grade " + std::to_string(grade) + " outside {0,1,2}");
    }
    if (annotator.empty() || query_id.empty() || doc_id.empty()) {
        throw ServiceError(400, "annotator, query_id and doc_id are required");
    }
    std::lock_guard lock(mutex_);
    TaskKey key{query_id, doc_id};
    auto it = tasks_.find(key);
    if (it == tasks_.end()) {
        throw ServiceError(404, "task (" + query_id + ", " + doc_id + ") is not in the pool");
    }
    auto& t = it->second;
    if (auto g = t.grades.find(annotator); g != t.grades.end()) {
        if (g->second == grade) {
            return {true};
        }
        throw ServiceError(409, "annotator '" + annotator + "' already graded this task "
                                    + std::to_string(g->second));
    }
    auto& pending = pending_[annotator];
    if (!pending.contains(key)) {
        throw ServiceError(403, "task (" + query_id + ", " + doc_id + ") is not assigned to '" + annotator + "'");
    }
    if (full(t)) {
        pending.erase(key);
        throw ServiceError(409, "task (" + query_id + ", " + doc_id + ") is already fully judged");
    }
    JudgmentRecord record{query_id, doc_id, annotator, grade, utc_timestamp()};
    if (log_.is_open()) {
        log_ << format_judgment(record) << '\n';
        log_.flush();
        if (!log_) {
            throw ServiceError(500, "failed to append to the judgment log");
        }
    }
    t.grades.emplace(annotator, grade);
    records_.push_back(std::move(record));
    pending.erase(key);
    return {false};
}

Progress JudgeSession::progress() const
{
    std::lock_guard lock(mutex_);
    Progress p;
    p.total_tasks = tasks_.size();
    for (auto const& [key, t] : tasks_) {
        p.fully_judged += full(t) ? 1 : 0;
    }
    p.judgments = records_.size();
    for (auto const& r : records_) {
        ++p.per_annotator[r.annotator];
    }
    return p;
}

std::vector<JudgmentRecord> JudgeSession::complete_records() const
{
    std::vector<JudgmentRecord> out;
    for (auto const& r : records_) {
        if (full(tasks_.at(TaskKey{r.query_id, r.doc_id}))) {
            out.push_back(r);
        }
    }
    return out;
}

AgreementResult JudgeSession::agreement() const
{
    std::lock_guard lock(mutex_);
    auto merged = merge_judgments(Qrels{}, complete_records(), config_.raters_per_item);
    if (merged.matrix.items.size() < 2) {
        throw ServiceError(409, "agreement needs at least 2 fully judged tasks, have "
                                    + std::to_string(merged.matrix.items.size()));
    }
    try {
        return {fleiss_kappa(merged.matrix), merged.matrix.items.size()};
    } catch (Error const& e) {
        throw ServiceError(409, e.what());
    }
}

std::string JudgeSession::export_qrels() const
{
    std::lock_guard lock(mutex_);
    return format_qrels(merge_judgments(config_.base, complete_records(), config_.raters_per_item).qrels);
}

std::vector<JudgmentRecord> JudgeSession::records() const
{
    std::lock_guard lock(mutex_);
    return records_;
}

// ---------------------------------------------------------------------------
// Routing

namespace {

HttpResponse json_response(int status, json const& body)
{
    return {status, "application/json", body.dump(-1, ' ', false, json::error_handler_t::replace)};
}

HttpResponse error_response(int status, std::string const& message)
{
    return json_response(status, json{{"error", message}});
}

json task_json(TaskAssignment const& a)
{
    return {{"query_id", a.query_id},     {"query_text", a.query_text}, {"doc_id", a.doc_id},
            {"title", a.title},           {"body", a.body},             {"annotator", a.annotator},
            {"outstanding_raters", a.outstanding_raters}};
}

HttpResponse route(JudgeSession& session, HttpRequest const& req)
{
    auto const& path = req.path;
    auto expect = [&](char const* method) {
        if (req.method != method) {
            throw ServiceError(405, "method " + req.method + " not allowed on " + path);
        }
    };
    if (path == "/api/tasks/next") {
        expect("GET");
        auto it = req.params.find("annotator");
        if (it == req.params.end() || it->second.empty()) {
            throw ServiceError(400, "missing annotator parameter");
        }
        auto task = session.next_task(it->second);
        return json_response(200, json{{"task", task ? task_json(*task) : json(nullptr)}});
    }
    if (path == "/api/judgments") {
        expect("POST");
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded() || !body.is_object()) {
            throw ServiceError(400, "body must be a JSON object");
        }
        auto text = [&](char const* name) {
            auto f = body.find(name);
            if (f == body.end() || !f->is_string()) {
                throw ServiceError(400, std::string("missing string field '") + name + "'");
            }
            return f->get<std::string>();
        };
        auto g = body.find("grade");
        if (g == body.end() || !g->is_number_integer()) {
            throw ServiceError(400, "grade must be an integer");
        }
        auto grade = g->get<long long>();
        if (!valid_grade(grade)) {
            throw ServiceError(400, "grade " + std::to_string(grade) + " outside {0,1,2}");
        }
        auto result =
            session.submit(text("annotator"), text("query_id"), text("doc_id"), static_cast<Grade>(grade));
        return json_response(200, json{{"status", "ok"}, {"duplicate", result.duplicate}});
    }
    if (path == "/api/progress") {
        expect("GET");
        auto p = session.progress();
        json per = json::object();
        for (auto const& [name, n] : p.per_annotator) {
            per[name] = n;
        }
        return json_response(200, json{{"total_tasks", p.total_tasks},
                                       {"fully_judged", p.fully_judged},
                                       {"judgments", p.judgments},
                                       {"per_annotator", per}});
    }
    if (path == "/api/agreement") {
        expect("GET");
        auto a = session.agreement();
        return json_response(200, json{{"kappa", a.kappa}, {"items", a.items}});
    }
    if (path == "/api/qrels") {
        expect("GET");
        return {200, "text/tab-separated-values", session.export_qrels()};
    }
    throw ServiceError(404, "no such endpoint " + path);
}

}  // namespace

HttpResponse handle_request(JudgeSession* session, HttpRequest const& request)
{
    if (session == nullptr) {
        return error_response(409, "no judgment pool is loaded");
    }
    try {
        return route(*session, request);
    } catch (ServiceError const& e) {
        return error_response(e.status(), e.what());
    } catch (ValidationError const& e) {
        return error_response(400, e.what());
    } catch (UndefinedStatistic const& e) {
        return error_response(409, e.what());
    } catch (std::exception const& e) {
        return error_response(500, e.what());
    }
}

// ---------------------------------------------------------------------------
// Server

struct JudgeServer::Impl {
    JudgeSession* session;
    httplib::Server server;
};

JudgeServer::JudgeServer(JudgeSession* session, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>())
{
    impl_->session = session;
    auto forward = [this](httplib::Request const& req, httplib::Response& res) {
        HttpRequest request{req.method, req.path, {}, req.body};
        for (auto const& [k, v] : req.params) {
            request.params.emplace(k, v);
        }
        auto response = handle_request(impl_->session, request);
        res.status = response.status;
        res.set_content(response.body, response.content_type);
    };
    impl_->server.Get(R"(/api/.*)", forward);
    impl_->server.Post(R"(/api/.*)", forward);
    impl_->server.Put(R"(/api/.*)", forward);
    impl_->server.Delete(R"(/api/.*)", forward);
    if (static_dir && !impl_->server.set_mount_point("/", static_dir->string())) {
        throw ValidationError("static directory " + static_dir->string() + " does not exist");
    }
}

JudgeServer::~JudgeServer() = default;

int JudgeServer::bind(std::string const& host, int port)
{
    if (port == 0) {
        int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) {
            throw ValidationError("cannot bind to " + host);
        }
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) {
        throw ValidationError("cannot bind to " + host + ":" + std::to_string(port));
    }
    return port;
}

void JudgeServer::run() { impl_->server.listen_after_bind(); }

void JudgeServer::stop() { impl_->server.stop(); }

}  // namespace qrelkit
