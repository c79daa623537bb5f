#include "deform/server.hpp"

#include <array>
#include <deque>

#include <boost/asio.hpp>

namespace deform::protocol {
namespace asio = boost::asio;
using asio::ip::tcp;

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, Endpoint& endpoint)
      : socket_(std::move(socket)), endpoint_(endpoint) {}

  void start() { read(); }

 private:
  void read() {
    auto self = shared_from_this();
    socket_.async_read_some(asio::buffer(buffer_), [this, self](boost::system::error_code ec,
                                                                std::size_t n) {
      if (ec) return;
      decoder_.feed(std::string_view(buffer_.data(), n));
      try {
        while (auto message = decoder_.next()) {
          for (const auto& reply : endpoint_.handle(*message)) queue(encode_frame(reply));
        }
      } catch (const std::exception& e) {
        // the stream cannot be resynchronized after a bad frame
        closing_ = true;
        queue(encode_frame(error_message("bad_frame", e.what())));
        return;
      }
      read();
    });
  }

  void queue(std::string frame) {
    outbox_.push_back(std::move(frame));
    if (outbox_.size() == 1) write();
  }

  void write() {
    auto self = shared_from_this();
    asio::async_write(socket_, asio::buffer(outbox_.front()),
                      [this, self](boost::system::error_code ec, std::size_t) {
                        if (ec) return;
                        outbox_.pop_front();
                        if (!outbox_.empty()) {
                          write();
                        } else if (closing_) {
                          boost::system::error_code ignored;
                          socket_.shutdown(tcp::socket::shutdown_both, ignored);
                        }
                      });
  }

  tcp::socket socket_;
  Endpoint& endpoint_;
  FrameDecoder decoder_;
  std::array<char, 1 << 16> buffer_{};
  std::deque<std::string> outbox_;
  bool closing_ = false;
};

}  // namespace

struct Server::Impl {
  asio::io_context io;
  tcp::acceptor acceptor;
  Endpoint endpoint;

  Impl(EndpointOptions options, std::uint16_t port)
      : acceptor(io, tcp::endpoint(asio::ip::address_v4::loopback(), port)),
        endpoint(std::move(options)) {}

  void accept() {
    acceptor.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
      if (ec) return;
      std::make_shared<Connection>(std::move(socket), endpoint)->start();
      accept();
    });
  }
};

Server::Server(EndpointOptions options, std::uint16_t port)
    : impl_(std::make_unique<Impl>(std::move(options), port)) {
  impl_->accept();
}

Server::~Server() = default;

std::uint16_t Server::port() const { return impl_->acceptor.local_endpoint().port(); }

void Server::run() { impl_->io.run(); }

void Server::stop() { impl_->io.stop(); }

struct Client::Impl {
  asio::io_context io;
  tcp::socket socket{io};
};

Client::Client(const std::string& host, std::uint16_t port) : impl_(std::make_unique<Impl>()) {
  tcp::resolver resolver(impl_->io);
  asio::connect(impl_->socket, resolver.resolve(host, std::to_string(port)));
}

Client::~Client() = default;

void Client::send(const json& message) {
  asio::write(impl_->socket, asio::buffer(encode_frame(message)));
}

json Client::receive() {
  std::array<unsigned char, 4> header{};
  asio::read(impl_->socket, asio::buffer(header));
  std::uint32_t n = 0;
  for (int i = 0; i < 4; ++i) n |= static_cast<std::uint32_t>(header[i]) << (8 * i);
  if (n > kMaxFrameBytes) throw std::runtime_error("oversized frame");
  std::string payload(n, '\0');
  asio::read(impl_->socket, asio::buffer(payload));
  return json::parse(payload);
}

}  // namespace deform::protocol
