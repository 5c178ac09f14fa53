#include "valvebench/devicebus/serial_transport.hpp"

#include <fcntl.h>
#include <poll.h>
#include <termios.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>

namespace valvebench::devicebus {

namespace {

speed_t baud_constant(int baud) {
  switch (baud) {
    case 57600: return B57600;
    case 115200: return B115200;
    case 1000000: return B1000000;
    case 2000000: return B2000000;
    case 3000000: return B3000000;
    default: throw std::invalid_argument("unsupported baud rate " + std::to_string(baud));
  }
}

std::runtime_error os_error(const std::string& what) {
  return std::runtime_error(what + ": " + std::strerror(errno));
}

/// Complete frames at the front of `buf`, counting corrupt ones too.
int complete_frames(const Bytes& buf) {
  int n = 0;
  std::span<const std::uint8_t> rest(buf);
  while (const std::size_t size = declared_frame_size(rest)) {
    if (size > rest.size()) break;
    ++n;
    rest = rest.subspan(size);
  }
  return n;
}

}  // namespace

SerialTransport::SerialTransport(const std::map<int, std::string>& ports, int baud) {
  const speed_t speed = baud_constant(baud);
  for (const auto& [chain, path] : ports) {
    const int fd = ::open(path.c_str(), O_RDWR | O_NOCTTY | O_NONBLOCK);
    if (fd < 0) {
      for (auto& [c, open_fd] : fds_) ::close(open_fd);
      throw os_error("cannot open " + path);
    }
    termios tio{};
    if (::tcgetattr(fd, &tio) != 0) {
      ::close(fd);
      throw os_error("tcgetattr " + path);
    }
    ::cfmakeraw(&tio);
    ::cfsetispeed(&tio, speed);
    ::cfsetospeed(&tio, speed);
    tio.c_cflag |= CLOCAL | CREAD;
    if (::tcsetattr(fd, TCSANOW, &tio) != 0) {
      ::close(fd);
      throw os_error("tcsetattr " + path);
    }
    fds_[chain] = fd;
  }
}

SerialTransport::~SerialTransport() {
  for (auto& [chain, fd] : fds_) ::close(fd);
}

Bytes SerialTransport::exchange(int chain, std::span<const std::uint8_t> request,
                                int expected_replies, Micros timeout) {
  const auto it = fds_.find(chain);
  if (it == fds_.end()) throw std::invalid_argument("no port for chain " + std::to_string(chain));
  const int fd = it->second;
  ::tcflush(fd, TCIFLUSH);
  for (std::size_t sent = 0; sent < request.size();) {
    const auto n = ::write(fd, request.data() + sent, request.size() - sent);
    if (n < 0 && errno != EAGAIN) throw os_error("serial write");
    if (n > 0) sent += static_cast<std::size_t>(n);
  }
  ::tcdrain(fd);

  Bytes reply;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (complete_frames(reply) < expected_replies) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) break;
    pollfd p{fd, POLLIN, 0};
    if (::poll(&p, 1, static_cast<int>(left.count())) <= 0) break;
    std::uint8_t buf[256];
    const auto n = ::read(fd, buf, sizeof buf);
    if (n > 0) reply.insert(reply.end(), buf, buf + n);
  }
  return reply;
}

}  // namespace valvebench::devicebus
