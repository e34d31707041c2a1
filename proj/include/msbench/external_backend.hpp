#pragma once

#include <bit>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstdint>
#include <cstring>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

#include "msbench/backend.hpp"

namespace msbench {

/// Binary wire protocol spoken with external backend processes over their
/// standard input/output. All integers are little-endian u32; all samples
/// are little-endian IEEE-754 float32.
///
///   Request:  "MSB1" | window_count N | window_side w | channels (3) |
///             N*3*w*w floats, window-major, channel-planar per window,
///             row-major within each channel plane.
///   Response: "MSR1" | N (echoed) | class_count K | N*K floats.
namespace wire {

inline constexpr char kRequestMagic[5] = "MSB1";
inline constexpr char kResponseMagic[5] = "MSR1";
inline constexpr std::size_t kHeaderBytes = 16; // request: magic + 3 u32 fields

struct Request {
    std::uint32_t window_count = 0;
    std::uint32_t side = 0;
    std::uint32_t channels = 3;
    std::vector<float> values; // window_count * channels * side * side

    bool operator==(const Request&) const = default;
};

struct Response {
    std::uint32_t window_count = 0;
    std::uint32_t class_count = 0;
    std::vector<float> probs; // window_count * class_count

    bool operator==(const Response&) const = default;
};

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 24));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_f32(std::vector<std::uint8_t>& out, float v) {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
}

inline float get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

} // namespace detail

/// Converts a batch to the planar request layout.
inline Request request_from_batch(const WindowBatch& batch) {
    Request req;
    req.window_count = static_cast<std::uint32_t>(batch.count);
    req.side = static_cast<std::uint32_t>(batch.side);
    req.channels = 3;
    const std::size_t plane = static_cast<std::size_t>(batch.side) * batch.side;
    req.values.resize(batch.count * 3 * plane);
    for (std::size_t w = 0; w < batch.count; ++w) {
        const auto win = batch.window(w); // interleaved RGB
        float* dst = &req.values[w * 3 * plane];
        for (std::size_t i = 0; i < plane; ++i) {
            dst[i] = win[i * 3 + 0];
            dst[plane + i] = win[i * 3 + 1];
            dst[2 * plane + i] = win[i * 3 + 2];
        }
    }
    return req;
}

inline std::vector<std::uint8_t> encode_request(const Request& req) {
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderBytes + req.values.size() * 4);
    out.insert(out.end(), kRequestMagic, kRequestMagic + 4);
    detail::put_u32(out, req.window_count);
    detail::put_u32(out, req.side);
    detail::put_u32(out, req.channels);
    for (float v : req.values) detail::put_f32(out, v);
    return out;
}

inline Request decode_request(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderBytes) throw BackendError("protocol error: request shorter than header");
    if (std::memcmp(bytes.data(), kRequestMagic, 4) != 0) throw BackendError("protocol error: bad request magic");
    Request req;
    req.window_count = detail::get_u32(bytes.data() + 4);
    req.side = detail::get_u32(bytes.data() + 8);
    req.channels = detail::get_u32(bytes.data() + 12);
    const std::size_t n =
        static_cast<std::size_t>(req.window_count) * req.channels * req.side * req.side;
    if (bytes.size() != kHeaderBytes + n * 4) throw BackendError("protocol error: request payload size mismatch");
    req.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) req.values[i] = detail::get_f32(bytes.data() + kHeaderBytes + i * 4);
    return req;
}

inline std::vector<std::uint8_t> encode_response(const Response& resp) {
    std::vector<std::uint8_t> out;
    out.reserve(12 + resp.probs.size() * 4);
    out.insert(out.end(), kResponseMagic, kResponseMagic + 4);
    detail::put_u32(out, resp.window_count);
    detail::put_u32(out, resp.class_count);
    for (float v : resp.probs) detail::put_f32(out, v);
    return out;
}

inline Response decode_response(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 12) throw BackendError("protocol error: response shorter than header");
    if (std::memcmp(bytes.data(), kResponseMagic, 4) != 0) throw BackendError("protocol error: bad response magic");
    Response resp;
    resp.window_count = detail::get_u32(bytes.data() + 4);
    resp.class_count = detail::get_u32(bytes.data() + 8);
    const std::size_t n = static_cast<std::size_t>(resp.window_count) * resp.class_count;
    if (bytes.size() != 12 + n * 4) throw BackendError("protocol error: response payload size mismatch");
    resp.probs.resize(n);
    for (std::size_t i = 0; i < n; ++i) resp.probs[i] = detail::get_f32(bytes.data() + 12 + i * 4);
    return resp;
}

/// Reads exactly n bytes; returns false on EOF before the first byte,
/// throws on EOF mid-buffer.
inline bool read_exact(int fd, void* buf, std::size_t n) {
    std::uint8_t* p = static_cast<std::uint8_t*>(buf);
    std::size_t got = 0;
    while (got < n) {
        const ssize_t r = ::read(fd, p + got, n - got);
        if (r < 0) {
            if (errno == EINTR) continue;
            throw BackendError(std::string("read failed: ") + std::strerror(errno));
        }
        if (r == 0) {
            if (got == 0) return false;
            throw BackendError("truncated response from backend process");
        }
        got += static_cast<std::size_t>(r);
    }
    return true;
}

inline void write_all(int fd, const void* buf, std::size_t n) {
    const std::uint8_t* p = static_cast<const std::uint8_t*>(buf);
    std::size_t sent = 0;
    while (sent < n) {
        const ssize_t r = ::write(fd, p + sent, n - sent);
        if (r < 0) {
            if (errno == EINTR) continue;
            throw BackendError(std::string("backend process not accepting input: ") + std::strerror(errno));
        }
        sent += static_cast<std::size_t>(r);
    }
}

/// Server-side helper: reads one full request from a stream fd. Returns
/// nullopt on clean EOF between messages.
inline std::optional<Request> read_request(int fd) {
    std::uint8_t header[kHeaderBytes];
    if (!read_exact(fd, header, sizeof header)) return std::nullopt;
    if (std::memcmp(header, kRequestMagic, 4) != 0) throw BackendError("protocol error: bad request magic");
    Request req;
    req.window_count = detail::get_u32(header + 4);
    req.side = detail::get_u32(header + 8);
    req.channels = detail::get_u32(header + 12);
    const std::size_t n =
        static_cast<std::size_t>(req.window_count) * req.channels * req.side * req.side;
    std::vector<std::uint8_t> payload(n * 4);
    if (n > 0 && !read_exact(fd, payload.data(), payload.size())) {
        throw BackendError("truncated request");
    }
    req.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) req.values[i] = detail::get_f32(payload.data() + i * 4);
    return req;
}

inline void write_response(int fd, const Response& resp) {
    const auto bytes = encode_response(resp);
    write_all(fd, bytes.data(), bytes.size());
}

} // namespace wire

namespace detail {

/// Splits a command line on whitespace with single/double quote grouping.
inline std::vector<std::string> split_command(const std::string& command) {
    std::vector<std::string> args;
    std::string cur;
    char quote = 0;
    bool in_token = false;
    for (char c : command) {
        if (quote != 0) {
            if (c == quote) {
                quote = 0;
            } else {
                cur.push_back(c);
            }
        } else if (c == '\'' || c == '"') {
            quote = c;
            in_token = true;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            if (in_token) {
                args.push_back(cur);
                cur.clear();
                in_token = false;
            }
        } else {
            cur.push_back(c);
            in_token = true;
        }
    }
    if (in_token) args.push_back(cur);
    return args;
}

} // namespace detail

/// Adapter that benchmarks any model served by a child process speaking the
/// wire protocol on stdin/stdout. The process is spawned once and serves
/// every request of the run, so model startup cost lands on the first
/// measured call just like an in-process framework would.
class ExternalBackend : public Backend {
public:
    explicit ExternalBackend(const std::string& command, int expected_classes = 23)
        : command_(command), expected_classes_(expected_classes) {
        if (expected_classes_ < 1) throw ArgumentError("class count must be >= 1");
        spawn();
    }

    ExternalBackend(const ExternalBackend&) = delete;
    ExternalBackend& operator=(const ExternalBackend&) = delete;

    ~ExternalBackend() override { shutdown(); }

    std::string name() const override { return "external:" + command_; }

    PredictionSet infer(const WindowBatch& batch) override {
        require_nonempty(batch);
        const auto request = wire::encode_request(wire::request_from_batch(batch));
        wire::write_all(stdin_fd_, request.data(), request.size());

        std::uint8_t header[12];
        if (!wire::read_exact(stdout_fd_, header, sizeof header)) {
            throw BackendError("truncated response from backend process (EOF before header)");
        }
        if (std::memcmp(header, wire::kResponseMagic, 4) != 0) {
            throw BackendError("protocol error: bad response magic");
        }
        const std::uint32_t n = wire::detail::get_u32(header + 4);
        const std::uint32_t k = wire::detail::get_u32(header + 8);
        if (n != batch.count) {
            throw BackendError("window count mismatch: sent " + std::to_string(batch.count) + ", got " +
                               std::to_string(n));
        }
        if (static_cast<int>(k) != expected_classes_) {
            throw BackendError("class count mismatch: expected " + std::to_string(expected_classes_) + ", got " +
                               std::to_string(k));
        }
        std::vector<std::uint8_t> payload(static_cast<std::size_t>(n) * k * 4);
        if (!wire::read_exact(stdout_fd_, payload.data(), payload.size())) {
            throw BackendError("truncated response from backend process");
        }

        PredictionSet out;
        out.class_count = expected_classes_;
        out.window_count = n;
        out.probs.resize(static_cast<std::size_t>(n) * k);
        for (std::size_t i = 0; i < out.probs.size(); ++i) {
            out.probs[i] = wire::detail::get_f32(payload.data() + i * 4);
        }
        validate_and_renormalize(out);
        return out;
    }

private:
    void validate_and_renormalize(PredictionSet& out) const {
        for (std::size_t w = 0; w < out.window_count; ++w) {
            float* row = &out.probs[w * static_cast<std::size_t>(out.class_count)];
            double sum = 0.0;
            for (int k = 0; k < out.class_count; ++k) {
                if (row[k] < 0.0f) throw BackendError("negative probability in backend response");
                sum += row[k];
            }
            if (std::abs(sum - 1.0) > 1e-3) {
                throw BackendError("probability normalization violation: row sum " + std::to_string(sum));
            }
            for (int k = 0; k < out.class_count; ++k) row[k] = static_cast<float>(row[k] / sum);
        }
    }

    void spawn() {
        // A dead child must surface as an error on write, not a signal.
        static std::once_flag sigpipe_once;
        std::call_once(sigpipe_once, [] { std::signal(SIGPIPE, SIG_IGN); });

        const auto args = detail::split_command(command_);
        if (args.empty()) throw BackendError("external backend command is empty");

        int to_child[2], from_child[2], status[2];
        if (::pipe(to_child) != 0 || ::pipe(from_child) != 0 || ::pipe(status) != 0) {
            throw BackendError(std::string("pipe failed: ") + std::strerror(errno));
        }
        ::fcntl(status[1], F_SETFD, FD_CLOEXEC);

        pid_ = ::fork();
        if (pid_ < 0) throw BackendError(std::string("fork failed: ") + std::strerror(errno));
        if (pid_ == 0) {
            ::dup2(to_child[0], STDIN_FILENO);
            ::dup2(from_child[1], STDOUT_FILENO);
            ::close(to_child[0]);
            ::close(to_child[1]);
            ::close(from_child[0]);
            ::close(from_child[1]);
            ::close(status[0]);
            std::vector<char*> argv;
            argv.reserve(args.size() + 1);
            for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
            argv.push_back(nullptr);
            ::execvp(argv[0], argv.data());
            const int err = errno;
            [[maybe_unused]] ssize_t ignored = ::write(status[1], &err, sizeof err);
            ::_exit(127);
        }
        ::close(to_child[0]);
        ::close(from_child[1]);
        ::close(status[1]);
        stdin_fd_ = to_child[1];
        stdout_fd_ = from_child[0];

        int exec_errno = 0;
        const ssize_t r = ::read(status[0], &exec_errno, sizeof exec_errno);
        ::close(status[0]);
        if (r > 0) {
            shutdown();
            throw BackendError("failed to spawn backend process '" + args[0] +
                               "': " + std::strerror(exec_errno));
        }
    }

    void shutdown() {
        if (stdin_fd_ >= 0) {
            ::close(stdin_fd_);
            stdin_fd_ = -1;
        }
        if (stdout_fd_ >= 0) {
            ::close(stdout_fd_);
            stdout_fd_ = -1;
        }
        if (pid_ > 0) {
            int st = 0;
            for (int i = 0; i < 200; ++i) { // ~2 s grace after stdin EOF
                if (::waitpid(pid_, &st, WNOHANG) != 0) {
                    pid_ = -1;
                    return;
                }
                ::usleep(10 * 1000);
            }
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, &st, 0);
            pid_ = -1;
        }
    }

    std::string command_;
    int expected_classes_;
    pid_t pid_ = -1;
    int stdin_fd_ = -1;
    int stdout_fd_ = -1;
};

} // namespace msbench
