#include "drivelab/protocol.hpp"

#include <boost/asio.hpp>

#include <istream>
#include <mutex>
#include <thread>
#include <vector>

#include "drivelab/errors.hpp"
#include "drivelab/image_codec.hpp"

namespace drivelab {

using nlohmann::json;
namespace asio = boost::asio;
using asio::ip::tcp;

json payload_json(const Payload& p) {
  if (const auto* img = std::get_if<Image>(&p))
    return {{"shape", {img->height, img->width}}, {"encoding", "png-base64"}, {"data", base64_encode(encode_png(*img))}};
  if (const auto* vec = std::get_if<std::vector<double>>(&p)) return *vec;
  json out = json::object();
  for (const auto& [k, v] : std::get<ScalarMap>(p)) out[k] = v;
  return out;
}

json bundle_json(const ObservationBundle& b) {
  json out = json::object();
  for (const auto& [name, p] : b.entries) out[name] = payload_json(p);
  return out;
}

json terms_json(const RewardTerms& t) {
  return {{"v_parallel", t.v_parallel}, {"v_perp", t.v_perp},       {"collision", t.collision},
          {"waypoints_reached", t.waypoints_reached}, {"signal", t.signal}, {"bonus_terms", t.bonus_terms},
          {"total", t.total}};
}

json info_json(const StepInfo& info) {
  json out = terms_json(info.terms);
  out["cause"] = info.cause ? json(std::string(to_string(*info.cause))) : json(nullptr);
  out["tick"] = info.tick;
  out["sim_time"] = info.sim_time;
  out["ego_speed"] = info.ego_speed;
  out["actors"] = info.actors;
  return out;
}

json reset_json(const ResetResult& r) { return {{"ok", true}, {"obs", bundle_json(r.obs)}, {"info", info_json(r.info)}}; }

json step_json(const StepResult& r) {
  return {{"ok", true},
          {"obs", bundle_json(r.obs)},
          {"reward", r.reward},
          {"terminated", r.terminated},
          {"truncated", r.truncated},
          {"info", info_json(r.info)}};
}

Action action_from_json(const json& j) {
  if (j.is_number_integer()) return Action::discrete(j.get<int>());
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Action{j[0].get<double>(), j[1].get<double>()};
  throw ProtocolError("action must be [throttle, steer] or a discrete index in [0, 14]");
}

// ---------------------------------------------------------------------------

WireSession::WireSession(TaskFactory factory) : factory_(std::move(factory)) {}

std::string WireSession::handle_line(const std::string& line) {
  json request;
  try {
    request = json::parse(line);
  } catch (const json::parse_error& e) {
    return json{{"ok", false}, {"error", std::string("malformed JSON: ") + e.what()}}.dump();
  }
  return handle(request).dump();
}

Env& WireSession::env_for(const json& request) {
  if (!request.contains("env_id") || !request["env_id"].is_number_integer())
    throw ProtocolError("missing integer env_id");
  const auto id = request["env_id"].get<std::int64_t>();
  auto it = envs_.find(id);
  if (it == envs_.end()) throw ProtocolError("unknown env_id " + std::to_string(id));
  return *it->second;
}

json WireSession::handle(const json& request) {
  try {
    if (!request.is_object() || !request.contains("cmd") || !request["cmd"].is_string())
      throw ProtocolError("request must be an object with a string 'cmd'");
    const std::string cmd = request["cmd"].get<std::string>();
    if (cmd == "make") {
      if (!request.contains("task") || !request["task"].is_string()) throw ProtocolError("make needs a string 'task'");
      const json overrides = request.value("overrides", json::object());
      auto env = std::make_unique<Env>(factory_(request["task"].get<std::string>(), overrides));
      const std::int64_t id = next_id_++;
      envs_.emplace(id, std::move(env));
      return {{"ok", true}, {"env_id", id}};
    }
    if (cmd == "reset") {
      Env& env = env_for(request);
      if (!request.contains("seed") || !request["seed"].is_number_integer() ||
          (!request["seed"].is_number_unsigned() && request["seed"].get<std::int64_t>() < 0))
        throw ProtocolError("reset needs a non-negative integer 'seed'");
      return reset_json(env.reset(request["seed"].get<std::uint64_t>()));
    }
    if (cmd == "step") {
      Env& env = env_for(request);
      if (!request.contains("action")) throw ProtocolError("step needs an 'action'");
      return step_json(env.step(action_from_json(request["action"])));
    }
    if (cmd == "close") {
      env_for(request);
      envs_.erase(request["env_id"].get<std::int64_t>());
      return {{"ok", true}};
    }
    throw ProtocolError("unknown cmd '" + cmd + "'");
  } catch (const std::exception& e) {
    return {{"ok", false}, {"error", e.what()}};
  }
}

// ---------------------------------------------------------------------------

struct WireServer::Impl {
  asio::io_context io;
  tcp::acceptor acceptor{io};
  TaskFactory factory;
  std::thread accept_thread;
  std::mutex mu;
  std::vector<std::shared_ptr<tcp::socket>> clients;
  std::vector<std::thread> workers;
  std::atomic<bool> stopping{false};

  void accept_next() {
    acceptor.async_accept([this](const boost::system::error_code& ec, tcp::socket socket) {
      if (stopping) return;
      if (!ec) {
        auto sock = std::make_shared<tcp::socket>(std::move(socket));
        std::lock_guard lock(mu);
        clients.push_back(sock);
        workers.emplace_back([this, sock] { serve(sock); });
      }
      accept_next();
    });
  }

  void serve(const std::shared_ptr<tcp::socket>& sock) {
    WireSession session(factory);
    asio::streambuf buf;
    std::istream in(&buf);
    boost::system::error_code ec;
    while (!stopping) {
      asio::read_until(*sock, buf, '\n', ec);
      if (ec) break;
      std::string line;
      std::getline(in, line);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const std::string reply = session.handle_line(line) + "\n";
      asio::write(*sock, asio::buffer(reply), ec);
      if (ec) break;
    }
    sock->shutdown(tcp::socket::shutdown_both, ec);
  }
};

WireServer::WireServer(const std::string& host, std::uint16_t port, TaskFactory factory)
    : impl_(std::make_unique<Impl>()) {
  impl_->factory = std::move(factory);
  const tcp::endpoint ep(asio::ip::make_address(host), port);
  impl_->acceptor.open(ep.protocol());
  impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
  impl_->acceptor.bind(ep);
  impl_->acceptor.listen();
}

WireServer::~WireServer() { stop(); }

std::uint16_t WireServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void WireServer::start() {
  impl_->accept_next();
  impl_->accept_thread = std::thread([this] { impl_->io.run(); });
}

void WireServer::run() {
  impl_->accept_next();
  impl_->io.run();
}

void WireServer::stop() {
  if (impl_->stopping.exchange(true)) return;
  asio::post(impl_->io, [this] {
    boost::system::error_code ec;
    impl_->acceptor.close(ec);
  });
  impl_->io.stop();
  if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(impl_->mu);
    for (auto& s : impl_->clients) {
      boost::system::error_code ec;
      s->shutdown(tcp::socket::shutdown_both, ec);
    }
    workers.swap(impl_->workers);
  }
  for (auto& t : workers) t.join();
}

std::pair<std::string, std::uint16_t> parse_address(const std::string& addr, const std::string& default_host) {
  std::string host = default_host;
  std::string port_text = addr;
  if (const auto colon = addr.rfind(':'); colon != std::string::npos) {
    if (colon > 0) host = addr.substr(0, colon);
    port_text = addr.substr(colon + 1);
  }
  try {
    std::size_t used = 0;
    const int port = std::stoi(port_text, &used);
    if (used != port_text.size() || port < 0 || port > 65535) throw std::out_of_range("port");
    return {host, static_cast<std::uint16_t>(port)};
  } catch (const std::exception&) {
    throw ConfigError("invalid address '" + addr + "'; expected host:port");
  }
}

}  // namespace drivelab
