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

#ifndef HYPERSTEP_SERVER_H_
#define HYPERSTEP_SERVER_H_

#include <atomic>
#include <iosfwd>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "hyperstep/retrieval.h"
#include "json.hpp"

namespace hyperstep {

// JSON rendering of one retrieved fact as printed by `query` and `serve`.
nlohmann::ordered_json fact_to_json(const RetrievedFact& fact,
                                    const KnowledgeHypergraph& graph,
                                    bool explain);

// Stateless line-delimited JSON request handler over an immutable index.
//
// Request:  {"query": str, "k": int?, "mode": str?, "query_entities": [...]?,
//            "explain": bool?, "id": any?}
// Response: {"id": ..., "mode": ..., "truncated": ..., "facts": [...]}
// Errors:   {"id": ..., "error": str}
class QueryService {
 public:
  QueryService(const Retriever& retriever, int default_k,
               RetrievalMode default_mode);

  std::string handle(std::string_view line) const;

 private:
  const Retriever& retriever_;
  int default_k_;
  RetrievalMode default_mode_;
};

// Answers one response line per request line until EOF. Blank lines are
// skipped.
void serve_stream(const QueryService& service, std::istream& in,
                  std::ostream& out);

// Loopback TCP listener, one thread per connection.
class TcpServer {
 public:
  // port 0 picks an ephemeral port. Throws std::runtime_error on bind
  // failure.
  TcpServer(const QueryService& service, int port);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  int port() const { return port_; }

  // Accepts until stop() is called.
  void run();
  void stop();

 private:
  void handle_connection(int fd);

  const QueryService& service_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> stopping_{false};
  std::mutex mutex_;
  std::vector<std::thread> workers_;
  std::vector<int> client_fds_;
};

}  // namespace hyperstep

#endif  // HYPERSTEP_SERVER_H_
