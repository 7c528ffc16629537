// Copyright 2026 The Hyperstep Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hyperstep/server.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "hyperstep/errors.h"

namespace hyperstep {

using Json = nlohmann::ordered_json;

Json fact_to_json(const RetrievedFact& fact, const KnowledgeHypergraph& graph,
                  bool explain) {
  Json j;
  j["edge_id"] = fact.edge_id;
  j["text"] = fact.text;
  j["entities"] = fact.entity_names;
  j["score"] = fact.score;
  if (explain) {
    Json rows = Json::array();
    for (const EntityContribution& c : fact.breakdown) {
      rows.push_back({{"entity", graph.entity(c.entity_id).name},
                      {"semantic", c.semantic},
                      {"share", c.share},
                      {"informativeness", c.informativeness},
                      {"relevance", c.relevance}});
    }
    j["breakdown"] = rows;
  }
  return j;
}

QueryService::QueryService(const Retriever& retriever, int default_k,
                           RetrievalMode default_mode)
    : retriever_(retriever), default_k_(default_k),
      default_mode_(default_mode) {}

std::string QueryService::handle(std::string_view line) const {
  Json id = nullptr;
  try {
    nlohmann::json req = nlohmann::json::parse(line);
    if (!req.is_object()) throw std::invalid_argument("request must be an object");
    if (req.contains("id")) id = req["id"];
    if (!req.contains("query") || !req["query"].is_string()) {
      throw std::invalid_argument("missing string field 'query'");
    }
    RetrievalQuery q;
    q.text = req["query"].get<std::string>();
    q.k = req.value("k", default_k_);
    if (q.k < 1) throw std::invalid_argument("k must be >= 1");
    RetrievalMode mode = default_mode_;
    if (req.contains("mode")) {
      mode = parse_retrieval_mode(req["mode"].get<std::string>());
    }
    if (req.contains("query_entities")) {
      std::vector<EntityId> ids;
      for (const auto& e : req["query_entities"]) {
        if (e.is_number_unsigned()) {
          const auto v = e.get<uint64_t>();
          if (v >= retriever_.graph().entities().size()) {
            throw std::invalid_argument("unknown entity id " + e.dump());
          }
          ids.push_back(static_cast<EntityId>(v));
        } else {
          auto found = retriever_.graph().find_entity(e.get<std::string>());
          if (!found) throw std::invalid_argument("unknown entity " + e.dump());
          ids.push_back(*found);
        }
      }
      q.explicit_entities = std::move(ids);
    }
    const bool explain = req.value("explain", false);
    RetrievedFactSet result = retriever_.retrieve(q, mode);
    Json resp;
    resp["id"] = id;
    resp["mode"] = retrieval_mode_name(result.mode);
    resp["truncated"] = result.truncated;
    Json facts = Json::array();
    for (const RetrievedFact& f : result.facts) {
      facts.push_back(fact_to_json(f, retriever_.graph(), explain));
    }
    resp["facts"] = std::move(facts);
    return resp.dump();
  } catch (const std::exception& e) {
    Json err;
    err["id"] = id;
    err["error"] = e.what();
    return err.dump();
  }
}

void serve_stream(const QueryService& service, std::istream& in,
                  std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out << service.handle(line) << "\n" << std::flush;
  }
}

TcpServer::TcpServer(const QueryService& service, int port)
    : service_(service) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error("socket: " + std::string(std::strerror(errno)));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<uint16_t>(port));
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 ||
      ::listen(listen_fd_, 128) < 0) {
    const std::string msg = std::strerror(errno);
    ::close(listen_fd_);
    throw std::runtime_error("cannot listen on port " + std::to_string(port) +
                             ": " + msg);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpServer::~TcpServer() {
  stop();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mutex_);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpServer::run() {
  while (!stopping_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (stopping_) break;
      if (errno == EINTR || errno == ECONNABORTED) continue;
      break;
    }
    std::lock_guard lock(mutex_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    client_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { handle_connection(fd); });
  }
}

void TcpServer::stop() {
  if (stopping_.exchange(true)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  std::lock_guard lock(mutex_);
  for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
}

void TcpServer::handle_connection(int fd) {
  std::string buffer;
  char chunk[4096];
  auto send_all = [fd](const std::string& s) {
    size_t sent = 0;
    while (sent < s.size()) {
      const ssize_t n = ::send(fd, s.data() + sent, s.size() - sent, MSG_NOSIGNAL);
      if (n <= 0) return false;
      sent += static_cast<size_t>(n);
    }
    return true;
  };
  bool open = true;
  while (open) {
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<size_t>(n));
    size_t nl;
    while ((nl = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      if (!send_all(service_.handle(line) + "\n")) {
        open = false;
        break;
      }
    }
  }
  {
    std::lock_guard lock(mutex_);
    client_fds_.erase(std::remove(client_fds_.begin(), client_fds_.end(), fd),
                      client_fds_.end());
  }
  ::close(fd);
}

}  // namespace hyperstep
