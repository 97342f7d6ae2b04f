// Connects stdin/stdout to the z3 wasm broker's unix socket, starting the
// broker on demand. This gives every solver session a private subprocess with
// SMT-LIB2 on stdin/stdout while the expensive wasm runtime is shared.
//
//   z3relay [--socket PATH] [--broker-js PATH]
//
// Environment: MINIKIND_Z3_SOCKET, MINIKIND_Z3_BROKER_JS override defaults.
// The default broker script is z3broker.js next to this executable.

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include <fcntl.h>
#include <poll.h>
#include <sys/file.h>
#include <sys/socket.h>
#include <sys/stat.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

namespace {

std::string default_socket_path() {
  const char* env = getenv("MINIKIND_Z3_SOCKET");
  if (env && *env) return env;
  return "/tmp/minikind-z3-" + std::to_string(getuid()) + ".sock";
}

std::string self_directory() {
  char buf[4096];
  ssize_t n = readlink("/proc/self/exe", buf, sizeof(buf) - 1);
  if (n <= 0) return ".";
  buf[n] = '\0';
  std::string path(buf);
  size_t slash = path.rfind('/');
  return slash == std::string::npos ? "." : path.substr(0, slash);
}

std::string default_broker_js() {
  const char* env = getenv("MINIKIND_Z3_BROKER_JS");
  if (env && *env) return env;
  return self_directory() + "/z3broker.js";
}

int try_connect(const std::string& path) {
  int fd = socket(AF_UNIX, SOCK_STREAM, 0);
  if (fd < 0) return -1;
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  if (path.size() >= sizeof(addr.sun_path)) {
    close(fd);
    return -1;
  }
  strcpy(addr.sun_path, path.c_str());
  if (connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    close(fd);
    return -1;
  }
  return fd;
}

void spawn_broker(const std::string& broker_js, const std::string& socket_path) {
  pid_t pid = fork();
  if (pid != 0) return;  // parent (or failure): polling will find out
  // Child: detach fully so the broker outlives this relay.
  setsid();
  int devnull = open("/dev/null", O_RDWR);
  if (devnull >= 0) {
    dup2(devnull, 0);
    dup2(devnull, 1);
    dup2(devnull, 2);
    if (devnull > 2) close(devnull);
  }
  execlp("node", "node", broker_js.c_str(), socket_path.c_str(), nullptr);
  _exit(127);
}

// Connect, launching the broker under an flock so only one racer spawns it.
int connect_or_launch(const std::string& socket_path, const std::string& broker_js) {
  int fd = try_connect(socket_path);
  if (fd >= 0) return fd;

  std::string lock_path = socket_path + ".lock";
  int lock_fd = open(lock_path.c_str(), O_CREAT | O_RDWR, 0600);
  if (lock_fd >= 0 && flock(lock_fd, LOCK_EX | LOCK_NB) == 0) {
    fd = try_connect(socket_path);  // may have appeared while we raced
    if (fd < 0) spawn_broker(broker_js, socket_path);
  }
  // Poll for the socket; wasm init takes a couple of seconds on first start.
  for (int i = 0; fd < 0 && i < 600; ++i) {
    usleep(50 * 1000);
    fd = try_connect(socket_path);
  }
  if (lock_fd >= 0) {
    flock(lock_fd, LOCK_UN);
    close(lock_fd);
  }
  return fd;
}

int pump(int sock_fd) {
  pollfd fds[2];
  fds[0] = {0, POLLIN, 0};        // stdin
  fds[1] = {sock_fd, POLLIN, 0};  // broker
  char buf[65536];
  bool stdin_open = true;
  while (true) {
    fds[0].fd = stdin_open ? 0 : -1;
    if (poll(fds, 2, -1) < 0) {
      if (errno == EINTR) continue;
      return 1;
    }
    if (fds[0].revents & (POLLIN | POLLHUP)) {
      ssize_t n = read(0, buf, sizeof(buf));
      if (n <= 0) {
        stdin_open = false;
        shutdown(sock_fd, SHUT_WR);
      } else {
        for (ssize_t off = 0; off < n;) {
          ssize_t w = write(sock_fd, buf + off, n - off);
          if (w <= 0) return 1;
          off += w;
        }
      }
    }
    if (fds[1].revents & (POLLIN | POLLHUP)) {
      ssize_t n = read(sock_fd, buf, sizeof(buf));
      if (n <= 0) return 0;  // broker closed: we are done
      for (ssize_t off = 0; off < n;) {
        ssize_t w = write(1, buf + off, n - off);
        if (w <= 0) return 1;
        off += w;
      }
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::string socket_path = default_socket_path();
  std::string broker_js = default_broker_js();
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--socket" && i + 1 < argc) {
      socket_path = argv[++i];
    } else if (arg == "--broker-js" && i + 1 < argc) {
      broker_js = argv[++i];
    } else {
      fprintf(stderr, "usage: z3relay [--socket PATH] [--broker-js PATH]\n");
      return 2;
    }
  }
  signal(SIGPIPE, SIG_IGN);
  int fd = connect_or_launch(socket_path, broker_js);
  if (fd < 0) {
    fprintf(stderr, "z3relay: cannot reach broker at %s\n", socket_path.c_str());
    return 1;
  }
  int rc = pump(fd);
  close(fd);
  return rc;
}
