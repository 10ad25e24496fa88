// Copyright 2026 The humi Authors
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

#ifndef HUMI_PREVIEW_SERVER_H_
#define HUMI_PREVIEW_SERVER_H_

#include <cstdint>
#include <memory>
#include <string>

#include "humi/preview.h"

namespace humi::preview {

namespace detail {
struct ServerState;
}  // namespace detail

struct ServerOptions {
  std::string address = "127.0.0.1";
  uint16_t port = 0;  // 0 picks a free port
  size_t queue_capacity = 64;  // pending messages per connection
  size_t outbox_capacity = 16;  // unsent replies before solving pauses
  int io_threads = 2;
  int worker_threads = 0;  // 0: hardware concurrency
  int send_buffer_bytes = 0;  // WebSocket socket send buffer, 0: OS default
};

// HTTP and WebSocket front end for a PreviewService on one port:
//   GET  /health  service status and version
//   POST /solve   one-shot solve, request and reply as in Solve()
//   WebSocket upgrade on any path: "humi-preview/1" message channel
class PreviewServer {
 public:
  PreviewServer(PreviewService& service, ServerOptions options = {});
  ~PreviewServer();
  PreviewServer(const PreviewServer&) = delete;
  PreviewServer& operator=(const PreviewServer&) = delete;

  // Binds and starts serving. Throws IoError when the address is taken.
  void Start();
  // Bound port, valid after Start().
  uint16_t port() const;
  // Closes every connection and the sessions they opened, then joins.
  // Clients get one second to finish the close handshake. A stopped server
  // cannot be restarted.
  void Stop();

 private:
  std::unique_ptr<detail::ServerState> impl_;
};

}  // namespace humi::preview

#endif  // HUMI_PREVIEW_SERVER_H_
