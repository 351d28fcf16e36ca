#include "qpath/sim_server.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <csignal>
#include <deque>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include "qpath/error.hpp"

namespace qpath::service {
namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

}  // namespace

struct SimServer::Impl {
    class WsConn;
    class HttpConn;

    struct Pending {
        Command command;
        std::weak_ptr<WsConn> origin;
    };
    struct Addressed {
        Event event;
        bool broadcast = true;
        std::weak_ptr<WsConn> origin;
    };
    using Outgoing = std::vector<Addressed>;

    Impl(SimSession s, ServerConfig c) : session(std::move(s)), config(std::move(c)), acceptor(ioc) {
        if (config.tick_ms <= 0) throw Error(ErrorCode::ValidationError, "tick_ms must be positive");
        session.apply(Command{0, SetSpeed{1000.0 / config.tick_ms}});
        latest_snapshot = session.snapshot();

        beast::error_code ec;
        const auto address = net::ip::make_address(config.address, ec);
        if (ec) throw Error(ErrorCode::BindError, "bad listen address '" + config.address + "'");
        const tcp::endpoint endpoint(address, config.port);
        auto fail = [&](const char* what) {
            throw Error(ErrorCode::BindError, std::string(what) + " " + config.address + ":" +
                                                  std::to_string(config.port) + ": " + ec.message());
        };
        if (acceptor.open(endpoint.protocol(), ec); ec) fail("cannot open");
        if (acceptor.set_option(net::socket_base::reuse_address(true), ec); ec) fail("cannot configure");
        if (acceptor.bind(endpoint, ec); ec) fail("cannot bind");
        if (acceptor.listen(net::socket_base::max_listen_connections, ec); ec) fail("cannot listen on");
    }

    // --- I/O side (io thread only) ---

    void accept();

    void deliver(const Outgoing& events);

    // --- simulation side ---

    void enqueue(Command command, std::weak_ptr<WsConn> origin) {
        {
            std::lock_guard lk(mutex);
            queue.push_back({std::move(command), std::move(origin)});
        }
        cv.notify_one();
    }

    void publish(Outgoing out) {
        {
            std::lock_guard lk(snapshot_mutex);
            latest_snapshot = session.snapshot();
        }
        if (!out.empty()) net::post(ioc, [this, out = std::move(out)] { deliver(out); });
    }

    json snapshot() {
        std::lock_guard lk(snapshot_mutex);
        return latest_snapshot;
    }

    void sim_loop() {
        auto period = [&] {
            return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / session.ticks_per_sec()));
        };
        auto next = Clock::now() + period();
        for (;;) {
            std::vector<Pending> batch;
            {
                std::unique_lock lk(mutex);
                auto ready = [&] { return stopping || !queue.empty(); };
                if (session.running())
                    cv.wait_until(lk, next, ready);
                else
                    cv.wait(lk, ready);
                if (stopping) return;
                batch.assign(std::make_move_iterator(queue.begin()), std::make_move_iterator(queue.end()));
                queue.clear();
            }
            Outgoing out;
            for (Pending& p : batch) {
                const bool was_running = session.running();
                for (Event& e : session.apply(p.command)) {
                    const bool direct = e.type == "Ack" || e.type == "Error";
                    out.push_back({std::move(e), !direct, p.origin});
                }
                if (!was_running && session.running()) next = Clock::now() + period();
            }
            const auto now = Clock::now();
            if (session.running() && now >= next) {
                for (Event& e : session.tick()) out.push_back({std::move(e), true, {}});
                next += period();
                if (next < now) next = now + period();  // fell behind: drop the backlog
            }
            publish(std::move(out));
        }
    }

    SimSession session;
    ServerConfig config;
    net::io_context ioc{1};
    tcp::acceptor acceptor;
    std::set<std::shared_ptr<WsConn>> conns;

    std::mutex mutex;
    std::condition_variable cv;
    std::deque<Pending> queue;
    bool stopping = false;

    std::mutex snapshot_mutex;
    json latest_snapshot;

    std::thread io_thread;
    std::thread sim_thread;
    std::atomic<bool> started{false};
    std::atomic<bool> stopped{false};
    std::mutex run_mutex;
    std::condition_variable run_cv;
    bool stop_requested = false;
};

class SimServer::Impl::WsConn : public std::enable_shared_from_this<WsConn> {
public:
    WsConn(Impl& impl, beast::tcp_stream stream) : impl_(impl), ws_(std::move(stream)) {}

    void start(http::request<http::string_body> req) {
        beast::get_lowest_layer(ws_).expires_never();
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
            if (ec) return;
            self->impl_.conns.insert(self);
            spdlog::info("client connected ({} open)", self->impl_.conns.size());
            self->send({"Snapshot", self->impl_.snapshot()});
            self->read();
        });
    }

    void send(const Event& e) {
        if (closed_) return;
        out_.push_back(encode_frame(e, ++seq_));
        if (out_.size() == 1) write();
    }

    void close(websocket::close_code code) {
        if (closed_) return;
        closed_ = true;
        impl_.conns.erase(shared_from_this());
        close_code_ = code;
        if (out_.empty()) finish_close();
    }

private:
    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return self->drop();
            const std::string text = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            self->handle(text);
            if (!self->closed_) self->read();
        });
    }

    void handle(const std::string& text) {
        try {
            auto parsed = parse_command(text);
            if (auto* fe = std::get_if<FrameError>(&parsed)) {
                send({"Error", json{{"command_id", fe->command_id}, {"reason", fe->reason}}});
                return;
            }
            impl_.enqueue(std::get<Command>(std::move(parsed)), weak_from_this());
        } catch (const Error& e) {
            spdlog::warn("closing client after malformed frame: {}", e.what());
            close(websocket::close_code::policy_error);
        }
    }

    void write() {
        ws_.async_write(net::buffer(out_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return self->drop();
            self->out_.pop_front();
            if (!self->out_.empty())
                self->write();
            else if (self->close_code_)
                self->finish_close();
        });
    }

    void finish_close() {
        ws_.async_close(*close_code_, [self = shared_from_this()](beast::error_code) {});
    }

    void drop() {
        if (closed_) return;
        closed_ = true;
        impl_.conns.erase(shared_from_this());
        spdlog::info("client disconnected ({} open)", impl_.conns.size());
    }

    Impl& impl_;
    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    std::deque<std::string> out_;
    std::uint64_t seq_ = 0;
    bool closed_ = false;
    std::optional<websocket::close_code> close_code_;
};

class SimServer::Impl::HttpConn : public std::enable_shared_from_this<HttpConn> {
public:
    HttpConn(Impl& impl, tcp::socket socket) : impl_(impl), stream_(std::move(socket)) {}

    void start() {
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (!ec) self->route();
        });
    }

private:
    void route() {
        if (websocket::is_upgrade(req_)) {
            if (req_.target() == "/session") {
                std::make_shared<WsConn>(impl_, std::move(stream_))->start(std::move(req_));
                return;
            }
            return respond(http::status::not_found, {{"error", "unknown endpoint"}});
        }
        if (req_.method() != http::verb::get) return respond(http::status::method_not_allowed, {{"error", "GET only"}});
        if (req_.target() == "/health") return respond(http::status::ok, {{"status", "ok"}});
        if (req_.target() == "/snapshot") return respond(http::status::ok, impl_.snapshot());
        respond(http::status::not_found, {{"error", "unknown endpoint"}});
    }

    void respond(http::status status, const json& body) {
        auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
        res->set(http::field::content_type, "application/json");
        res->keep_alive(false);
        res->body() = body.dump();
        res->prepare_payload();
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
            beast::error_code ignored;
            self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        });
    }

    Impl& impl_;
    beast::tcp_stream stream_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
};

void SimServer::Impl::accept() {
    acceptor.async_accept(ioc, [this](beast::error_code ec, tcp::socket socket) {
        if (ec) {
            if (acceptor.is_open()) accept();
            return;
        }
        std::make_shared<HttpConn>(*this, std::move(socket))->start();
        accept();
    });
}

void SimServer::Impl::deliver(const Outgoing& events) {
    for (const Addressed& a : events) {
        if (a.broadcast) {
            for (const auto& c : std::vector(conns.begin(), conns.end())) c->send(a.event);
        } else if (auto c = a.origin.lock()) {
            c->send(a.event);
        }
    }
}

SimServer::SimServer(SimSession session, ServerConfig config)
    : impl_(std::make_unique<Impl>(std::move(session), std::move(config))) {}

SimServer::~SimServer() { stop(); }

std::uint16_t SimServer::port() const noexcept {
    beast::error_code ec;
    const auto ep = impl_->acceptor.local_endpoint(ec);
    return ec ? 0 : ep.port();
}

void SimServer::start() {
    if (impl_->started.exchange(true)) return;
    impl_->accept();
    impl_->io_thread = std::thread([this] { impl_->ioc.run(); });
    impl_->sim_thread = std::thread([this] { impl_->sim_loop(); });
    spdlog::info("listening on {}:{}", impl_->config.address, port());
}

void SimServer::run() {
    net::signal_set signals(impl_->ioc, SIGINT, SIGTERM);
    signals.async_wait([this](beast::error_code ec, int) {
        if (ec) return;
        std::lock_guard lk(impl_->run_mutex);
        impl_->stop_requested = true;
        impl_->run_cv.notify_all();
    });
    start();
    {
        std::unique_lock lk(impl_->run_mutex);
        impl_->run_cv.wait(lk, [&] { return impl_->stop_requested; });
    }
    spdlog::info("shutting down");
    stop();
}

void SimServer::stop() {
    if (!impl_->started || impl_->stopped.exchange(true)) return;
    {
        std::lock_guard lk(impl_->mutex);
        impl_->stopping = true;
    }
    impl_->cv.notify_all();
    if (impl_->sim_thread.joinable()) impl_->sim_thread.join();
    impl_->ioc.stop();
    if (impl_->io_thread.joinable()) impl_->io_thread.join();
    {
        std::lock_guard lk(impl_->run_mutex);
        impl_->stop_requested = true;
    }
    impl_->run_cv.notify_all();
}

}  // namespace qpath::service
