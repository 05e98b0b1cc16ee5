#include "inspire/service.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <thread>

#include <httplib.h>

#include "inspire/errors.hpp"
#include "inspire/hashing.hpp"
#include "inspire/hevol.hpp"
#include "inspire/png_codec.hpp"
#include "inspire/problem.hpp"
#include "inspire/serialization.hpp"

namespace inspire {

namespace {

struct SessionRecord {
  explicit SessionRecord(HevolSession s)
      : session(std::move(s)), created_at(std::chrono::system_clock::now()) {}
  HevolSession session;
  std::chrono::system_clock::time_point created_at;
  std::mutex lock;
};

// Thrown by handlers to answer 409 with the current iteration.
struct Conflict {
  std::string message;
  std::int64_t iteration;
};

std::vector<std::uint8_t> decode_base64(const std::string& text) {
  std::string clean;
  for (char c : text)
    if (c != '\n' && c != '\r' && c != ' ') clean.push_back(c);
  if (clean.empty() || clean.size() % 4 != 0) throw ValidationError("target_png is not valid base64");
  std::vector<std::uint8_t> out(clean.size() / 4 * 3);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(clean.data()),
                                static_cast<int>(clean.size()));
  if (n < 0) throw ValidationError("target_png is not valid base64");
  std::size_t padding = 0;
  if (clean.back() == '=') ++padding;
  if (clean.size() > 1 && clean[clean.size() - 2] == '=') ++padding;
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

void send_json(httplib::Response& res, int status, const Json& doc) {
  res.status = status;
  res.set_content(doc.dump(), "application/json");
}

Json error_body(const std::string& message) {
  Json doc;
  doc["error"] = message;
  return doc;
}

}  // namespace

struct Service::Impl {
  GeneratorRegistry registry;
  ServiceOptions options;
  httplib::Server server;
  std::thread thread;
  bool bound = false;

  mutable std::shared_mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<SessionRecord>> sessions;

  mutable std::shared_mutex images_mutex;
  std::map<std::string, std::shared_ptr<const std::string>> images;

  std::atomic<std::uint64_t> counter{0};
  std::uint64_t nonce = std::random_device{}();

  Impl(GeneratorRegistry reg, ServiceOptions opts) : registry(std::move(reg)), options(std::move(opts)) {
    if (options.journal_dir) {
      std::filesystem::create_directories(*options.journal_dir);
      load_journal();
    }
    // Without SO_REUSEPORT so that a second bind to a busy port fails.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    routes();
  }

  // --- state helpers -------------------------------------------------------

  void cache_batch(const HevolSession& s) {
    std::vector<std::pair<std::string, std::size_t>> missing;
    {
      std::shared_lock lock(images_mutex);
      for (std::size_t i = 0; i < s.current_batch().size(); ++i)
        if (!images.count(s.current_batch()[i].image_id)) missing.emplace_back(s.current_batch()[i].image_id, i);
    }
    if (missing.empty()) return;
    std::vector<std::pair<std::string, std::shared_ptr<const std::string>>> encoded;
    for (const auto& [id, i] : missing) {
      const auto bytes = encode_png(s.current_images()[i]);
      encoded.emplace_back(id, std::make_shared<const std::string>(bytes.begin(), bytes.end()));
    }
    std::unique_lock lock(images_mutex);
    for (auto& [id, png] : encoded) images.emplace(id, std::move(png));
  }

  std::shared_ptr<SessionRecord> find_session(const std::string& id) const {
    std::shared_lock lock(sessions_mutex);
    auto it = sessions.find(id);
    if (it == sessions.end()) throw NotFoundError("unknown session '" + id + "'");
    return it->second;
  }

  std::string new_session_id() {
    const std::uint64_t words[3] = {nonce, counter.fetch_add(1),
                                    static_cast<std::uint64_t>(
                                        std::chrono::steady_clock::now().time_since_epoch().count())};
    return hex_digest(std::as_bytes(std::span(words)), 16);
  }

  void journal(const HevolSession& s) {
    if (!options.journal_dir) return;
    const auto path = *options.journal_dir / (s.id() + ".json");
    const auto tmp = path.string() + ".tmp";
    write_text_file(tmp, dump_canonical(session_journal(s)));
    std::filesystem::rename(tmp, path);
  }

  void load_journal() {
    for (const auto& entry : std::filesystem::directory_iterator(*options.journal_dir)) {
      if (entry.path().extension() != ".json") continue;
      auto session = session_from_journal(parse_json(read_text_file(entry.path())), registry);
      cache_batch(session);
      const auto id = session.id();
      sessions.emplace(id, std::make_shared<SessionRecord>(std::move(session)));
    }
  }

  // --- payloads --------------------------------------------------------------

  static Json batch_payload(const HevolSession& s) {
    Json doc;
    doc["session_id"] = s.id();
    doc["iteration"] = s.iteration();
    doc["mu"] = s.config().es.mu;
    Json batch = Json::array();
    for (std::size_t i = 0; i < s.current_batch().size(); ++i) {
      Json e;
      e["index"] = i;
      e["image_id"] = s.current_batch()[i].image_id;
      batch.push_back(e);
    }
    doc["batch"] = batch;
    return doc;
  }

  static Json best_payload(const HevolSession& s) {
    const auto best = s.best();
    Json doc;
    doc["image_id"] = best.image_id;
    doc["latent"] = best.latent.flat();
    doc["images_shown"] = best.images_shown;
    doc["distinct_images"] = best.distinct_images;
    doc["iteration"] = s.iteration();
    return doc;
  }

  static Json state_payload(const SessionRecord& rec) {
    const auto& s = rec.session;
    Json doc = batch_payload(s);
    doc["generator"] = s.generator().id();
    doc["config"] = to_json(s.config());
    doc["seed"] = s.seed();
    doc["lambda"] = s.config().es.lambda;
    doc["mutation_rate"] = s.mutation_rate();
    doc["images_shown"] = s.images_shown();
    doc["distinct_images"] = s.distinct_images();
    doc["created_at"] = std::chrono::duration_cast<std::chrono::seconds>(rec.created_at.time_since_epoch()).count();
    Json parents = Json::array();
    for (const auto& p : s.parents()) parents.push_back(p.flat());
    doc["parents"] = parents;
    Json history = Json::array();
    for (const auto& h : s.history()) {
      Json e;
      Json ids = Json::array();
      for (const auto& b : h.batch) ids.push_back(b.image_id);
      e["batch"] = ids;
      e["ballot"] = to_json(h.ballot);
      history.push_back(e);
    }
    doc["history"] = history;
    doc["best"] = s.iteration() > 0 ? best_payload(s) : Json(nullptr);
    return doc;
  }

  // --- handlers ----------------------------------------------------------------

  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  // Maps library errors onto status codes. Internal failures never leak text.
  static Handler guarded(Handler h) {
    return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
      try {
        h(req, res);
      } catch (const Conflict& c) {
        Json body = error_body(c.message);
        body["iteration"] = c.iteration;
        send_json(res, 409, body);
      } catch (const NotFoundError& e) {
        send_json(res, 404, error_body(e.what()));
      } catch (const ValidationError& e) {
        send_json(res, 422, error_body(e.what()));
      } catch (const DimensionError& e) {
        send_json(res, 422, error_body(e.what()));
      } catch (const DecodeError& e) {
        send_json(res, 422, error_body(e.what()));
      } catch (const CapabilityError& e) {
        send_json(res, 422, error_body(e.what()));
      } catch (const nlohmann::json::exception& e) {
        send_json(res, 400, error_body(std::string("bad request: ") + e.what()));
      } catch (...) {
        send_json(res, 500, error_body("internal error"));
      }
    };
  }

  void create_session(const httplib::Request& req, httplib::Response& res) {
    const Json body = parse_json(req.body);
    const auto gen = registry.get(body.at("generator").get<std::string>());
    HevolConfig config;
    if (body.contains("config"))
      config = hevol_config_from_json(body["config"]);
    else
      config = hevol_preset(body.value("preset", std::string("faces")));
    const auto seed = body.value("seed", std::uint64_t{0});
    HevolSession session(new_session_id(), gen, config, seed);
    cache_batch(session);
    journal(session);
    const Json payload = batch_payload(session);
    {
      std::unique_lock lock(sessions_mutex);
      const auto id = session.id();
      sessions.emplace(id, std::make_shared<SessionRecord>(std::move(session)));
    }
    send_json(res, 201, payload);
  }

  void get_session(const httplib::Request& req, httplib::Response& res) {
    auto rec = find_session(req.path_params.at("id"));
    std::lock_guard lock(rec->lock);
    send_json(res, 200, state_payload(*rec));
  }

  void select(const httplib::Request& req, httplib::Response& res) {
    auto rec = find_session(req.path_params.at("id"));
    const Json body = parse_json(req.body);
    const auto ballot = ballot_from_json(body);
    std::unique_lock lock(rec->lock, std::try_to_lock);
    if (!lock.owns_lock()) {
      // Another mutation is in flight; wait for it so the reported
      // iteration is the one it produced.
      std::lock_guard wait(rec->lock);
      throw Conflict{"session is being updated", rec->session.iteration()};
    }
    auto& s = rec->session;
    if (body.contains("iteration") && body["iteration"].get<std::int64_t>() != s.iteration())
      throw Conflict{"ballot is for a stale iteration", s.iteration()};
    s.record_selection(ballot);
    cache_batch(s);
    journal(s);
    send_json(res, 200, batch_payload(s));
  }

  void undo(const httplib::Request& req, httplib::Response& res) {
    auto rec = find_session(req.path_params.at("id"));
    std::unique_lock lock(rec->lock, std::try_to_lock);
    if (!lock.owns_lock()) {
      std::lock_guard wait(rec->lock);
      throw Conflict{"session is being updated", rec->session.iteration()};
    }
    auto& s = rec->session;
    if (s.iteration() == 0) throw ValidationError("nothing to undo");
    s = s.replay(s.iteration() - 1);
    cache_batch(s);
    journal(s);
    send_json(res, 200, batch_payload(s));
  }

  void best(const httplib::Request& req, httplib::Response& res) {
    auto rec = find_session(req.path_params.at("id"));
    std::lock_guard lock(rec->lock);
    send_json(res, 200, best_payload(rec->session));
  }

  void image(const httplib::Request& req, httplib::Response& res) {
    std::shared_ptr<const std::string> png;
    {
      std::shared_lock lock(images_mutex);
      auto it = images.find(req.path_params.at("image_id"));
      if (it == images.end()) throw NotFoundError("unknown image");
      png = it->second;
    }
    res.status = 200;
    res.set_header("Cache-Control", "public, max-age=31536000, immutable");
    res.set_content(*png, "image/png");
  }

  void optimize(const httplib::Request& req, httplib::Response& res) {
    const Json body = parse_json(req.body);
    const auto gen = registry.get(body.at("generator").get<std::string>());
    const auto optimizer = body.at("optimizer").get<std::string>();
    const auto criterion = body.value("criterion", std::string("L2+VGG"));
    const auto budget = body.at("budget").get<std::int64_t>();
    const auto seed = body.value("seed", std::uint64_t{0});
    if (budget > options.max_optimize_budget)
      throw ValidationError("budget exceeds the service limit of " + std::to_string(options.max_optimize_budget));
    const auto png = decode_base64(body.at("target_png").get<std::string>());
    auto target = decode_png(png);
    if (target.height() != gen->output_side() || target.width() != gen->output_side())
      throw DimensionError("target must be " + std::to_string(gen->output_side()) + "x" +
                           std::to_string(gen->output_side()));
    const auto weights = CriterionWeights::preset(criterion);
    const auto problem = make_problem(gen, std::move(target), weights);
    if (budget < minimum_budget(optimizer)) throw ValidationError("budget below the optimizer's minimum");
    const auto trace = run_optimizer(optimizer, problem, budget, seed);
    send_json(res, 200, run_to_json(trace, criterion, budget));
  }

  void routes() {
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      Json doc;
      doc["status"] = "ok";
      send_json(res, 200, doc);
    });
    server.Get("/generators", guarded([this](const httplib::Request&, httplib::Response& res) {
                 Json list = Json::array();
                 for (const auto& id : registry.ids()) {
                   const auto h = registry.get(id)->handle();
                   Json e;
                   e["id"] = h.id;
                   e["latent_dim"] = h.latent_dim;
                   e["output_side"] = h.output_side;
                   e["differentiable"] = h.differentiable;
                   e["class_groups"] = h.class_groups;
                   if (auto spec = registry.spec_of(id)) e["spec"] = to_json(*spec);
                   list.push_back(e);
                 }
                 Json doc;
                 doc["generators"] = list;
                 send_json(res, 200, doc);
               }));
    server.Post("/sessions", guarded([this](const auto& q, auto& r) { create_session(q, r); }));
    server.Get("/sessions/:id", guarded([this](const auto& q, auto& r) { get_session(q, r); }));
    server.Post("/sessions/:id/selection", guarded([this](const auto& q, auto& r) { select(q, r); }));
    server.Post("/sessions/:id/undo", guarded([this](const auto& q, auto& r) { undo(q, r); }));
    server.Get("/sessions/:id/best", guarded([this](const auto& q, auto& r) { best(q, r); }));
    server.Get(R"(/images/([0-9a-f]+)\.png)", guarded([this](const httplib::Request& q, httplib::Response& r) {
                 httplib::Request copy = q;
                 copy.path_params["image_id"] = q.matches[1];
                 image(copy, r);
               }));
    server.Post("/optimize", guarded([this](const auto& q, auto& r) { optimize(q, r); }));
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        res.set_content(error_body(res.status == 404 ? "not found" : "error").dump(), "application/json");
      }
    });
  }
};

Service::Service(GeneratorRegistry registry, ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(registry), std::move(options))) {}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind " + host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw Error("cannot bind " + host + ":" + std::to_string(port) + " (port in use?)");
  }
  impl_->bound = true;
  return bound;
}

void Service::listen() {
  if (!impl_->bound) throw Error("listen() before bind()");
  impl_->server.listen_after_bind();
}

int Service::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void Service::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::size_t Service::session_count() const {
  std::shared_lock lock(impl_->sessions_mutex);
  return impl_->sessions.size();
}

}  // namespace inspire
