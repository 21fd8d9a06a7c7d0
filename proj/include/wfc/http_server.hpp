#pragma once

#include <memory>
#include <string>

#include "wfc/api.hpp"

namespace wfc {

// cpp-httplib front for an Api. Every route is forwarded verbatim.
class HttpServer {
 public:
  explicit HttpServer(Api& api);
  ~HttpServer();

  // Binds host:port (port 0 picks a free one) and returns the bound port,
  // or -1 when binding fails.
  int bind(const std::string& host, int port);
  // Serves until stop(); returns false if the socket failed.
  bool serve();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// "host:port", ":port" or "port". Throws ParseError.
std::pair<std::string, int> parse_listen_address(const std::string& text);

}  // namespace wfc
