#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <deque>
#include <future>
#include <set>
#include <thread>

#include "flocksim/station.hpp"

namespace flocksim {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

// Frames a client has not yet taken; beyond this the client is dropped.
constexpr std::size_t kMaxQueuedFrames = 512;

class WsSession;

struct Hub {
    GatewayHandlers handlers;
    std::set<std::shared_ptr<WsSession>> sessions;  // touched only on the io thread
};

class WsSession : public std::enable_shared_from_this<WsSession> {
public:
    WsSession(tcp::socket socket, Hub& hub) : ws_(std::move(socket)), hub_(hub) {}

    void start(http::request<http::string_body> req) {
        ws_.text(true);
        ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
            if (ec) return;
            self->hub_.sessions.insert(self);
            self->read();
        });
    }

    void send(std::shared_ptr<const std::string> text) {
        if (closed_) return;
        if (queue_.size() >= kMaxQueuedFrames) {
            close();
            return;
        }
        queue_.push_back(std::move(text));
        if (queue_.size() == 1) write_next();
    }

    void close() {
        if (closed_) return;
        closed_ = true;
        hub_.sessions.erase(shared_from_this());
        beast::error_code ec;
        ws_.next_layer().shutdown(tcp::socket::shutdown_both, ec);
        ws_.next_layer().close(ec);
    }

private:
    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->close();
                return;
            }
            const std::string text = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            const auto reason = self->hub_.handlers.on_command(text);
            nlohmann::json reply = reason ? nlohmann::json{{"type", "rejected"}, {"reason", *reason}}
                                          : nlohmann::json{{"type", "ack"}};
            self->send(std::make_shared<const std::string>(reply.dump() + "\n"));
            self->read();
        });
    }

    void write_next() {
        ws_.async_write(asio::buffer(*queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->close();
                return;
            }
            self->queue_.pop_front();
            if (!self->queue_.empty()) self->write_next();
        });
    }

    websocket::stream<tcp::socket> ws_;
    Hub& hub_;
    beast::flat_buffer buffer_;
    std::deque<std::shared_ptr<const std::string>> queue_;
    bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket socket, Hub& hub) : stream_(std::move(socket)), hub_(hub) {}

    void start() {
        http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (!ec) self->dispatch();
        });
    }

private:
    void dispatch() {
        if (websocket::is_upgrade(req_)) {
            if (req_.target() == "/ws") {
                std::make_shared<WsSession>(stream_.release_socket(), hub_)->start(std::move(req_));
                return;
            }
            respond(http::status::not_found, "text/plain", "no WebSocket endpoint here\n");
            return;
        }
        if (req_.method() != http::verb::get) {
            respond(http::status::method_not_allowed, "text/plain", "GET only\n");
            return;
        }
        if (req_.target() == "/scenario") {
            respond(http::status::ok, "application/json", hub_.handlers.scenario_json());
        } else if (req_.target() == "/metrics") {
            respond(http::status::ok, "application/json", hub_.handlers.metrics_json());
        } else {
            respond(http::status::not_found, "text/plain", "not found\n");
        }
    }

    void respond(http::status status, const char* type, std::string body) {
        auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
        res->set(http::field::content_type, type);
        res->keep_alive(false);
        res->body() = std::move(body);
        res->prepare_payload();
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
            beast::error_code ec;
            self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        });
    }

    beast::tcp_stream stream_;
    Hub& hub_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
};

}  // namespace

struct Gateway::Impl {
    asio::io_context io;
    tcp::acceptor acceptor{io};
    Hub hub;
    std::thread thread;
    std::atomic<std::size_t> clients{0};
    std::atomic<bool> stopped{false};

    void accept() {
        acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
            if (ec) return;
            std::make_shared<HttpSession>(std::move(socket), hub)->start();
            accept();
        });
    }
};

Gateway::Gateway(const std::string& host, std::uint16_t port, GatewayHandlers handlers)
    : impl_(std::make_unique<Impl>()) {
    impl_->hub.handlers = std::move(handlers);
    const tcp::endpoint endpoint{asio::ip::make_address(host), port};
    impl_->acceptor.open(endpoint.protocol());
    impl_->acceptor.set_option(asio::socket_base::reuse_address(true));
    impl_->acceptor.bind(endpoint);
    impl_->acceptor.listen();
    impl_->accept();
    impl_->thread = std::thread([impl = impl_.get()] { impl->io.run(); });
}

Gateway::~Gateway() { stop(); }

std::uint16_t Gateway::port() const { return impl_->acceptor.local_endpoint().port(); }

void Gateway::publish(const std::string& text) {
    auto shared = std::make_shared<const std::string>(text);
    asio::post(impl_->io, [impl = impl_.get(), shared] {
        // Copy first: a failed send removes the session from the set.
        const auto sessions = impl->hub.sessions;
        for (const auto& s : sessions) s->send(shared);
        impl->clients = impl->hub.sessions.size();
    });
}

std::size_t Gateway::clients() const {
    auto count = std::make_shared<std::promise<std::size_t>>();
    auto result = count->get_future();
    asio::post(impl_->io, [impl = impl_.get(), count] { count->set_value(impl->hub.sessions.size()); });
    if (result.wait_for(std::chrono::seconds(2)) != std::future_status::ready) return impl_->clients;
    return result.get();
}

void Gateway::stop() {
    if (impl_->stopped.exchange(true)) return;
    asio::post(impl_->io, [impl = impl_.get()] {
        beast::error_code ec;
        impl->acceptor.close(ec);
        const auto sessions = impl->hub.sessions;
        for (const auto& s : sessions) s->close();
        impl->io.stop();
    });
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace flocksim
