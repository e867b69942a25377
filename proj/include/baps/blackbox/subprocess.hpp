#pragma once

#include <atomic>
#include <csignal>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "baps/blackbox/oracle.hpp"
#include "baps/blackbox/wire.hpp"

namespace baps::blackbox {

/// Oracle that forwards every call to a child process speaking the framed
/// protocol on its stdin/stdout (e.g. `baps blackbox-serve`). Calls from
/// several threads are serialized over the single pipe.
class SubprocessOracle final : public BlackboxOracle {
public:
    explicit SubprocessOracle(std::vector<std::string> argv) {
        if (argv.empty()) throw ConfigError("subprocess oracle: empty command");
        std::signal(SIGPIPE, SIG_IGN);
        int to_child[2], from_child[2];
        if (::pipe(to_child) != 0) throw OracleError("subprocess oracle: pipe() failed");
        if (::pipe(from_child) != 0) {
            ::close(to_child[0]);
            ::close(to_child[1]);
            throw OracleError("subprocess oracle: pipe() failed");
        }
        std::vector<char*> cargv;
        for (auto& a : argv) cargv.push_back(a.data());
        cargv.push_back(nullptr);

        pid_ = ::fork();
        if (pid_ < 0) throw OracleError("subprocess oracle: fork() failed");
        if (pid_ == 0) {
            ::dup2(to_child[0], STDIN_FILENO);
            ::dup2(from_child[1], STDOUT_FILENO);
            ::close(to_child[0]);
            ::close(to_child[1]);
            ::close(from_child[0]);
            ::close(from_child[1]);
            ::execv(cargv[0], cargv.data());
            ::_exit(127);
        }
        ::close(to_child[0]);
        ::close(from_child[1]);
        write_fd_ = to_child[1];
        read_fd_ = from_child[0];
    }

    SubprocessOracle(const SubprocessOracle&) = delete;
    SubprocessOracle& operator=(const SubprocessOracle&) = delete;

    ~SubprocessOracle() override {
        if (write_fd_ >= 0) ::close(write_fd_);
        if (read_fd_ >= 0) ::close(read_fd_);
        if (pid_ > 0) {
            int status = 0;
            ::waitpid(pid_, &status, 0);
        }
    }

    SoftMask segment(const Image& img, const PointPrompt& p) override {
        calls_.fetch_add(1, std::memory_order_relaxed);
        const auto request = wire::encode_request(img, p);
        std::lock_guard lock(mutex_);
        wire::write_frame(write_fd_, request);
        auto reply = wire::read_frame(read_fd_);
        if (!reply) throw OracleError("blackbox process exited");
        return wire::decode_response(*reply);
    }

    std::uint64_t call_count() const override { return calls_.load(std::memory_order_relaxed); }

private:
    pid_t pid_ = -1;
    int write_fd_ = -1;
    int read_fd_ = -1;
    std::mutex mutex_;
    std::atomic<std::uint64_t> calls_{0};
};

}  // namespace baps::blackbox
