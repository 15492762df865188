// Copyright 2026 The tablecut Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "tablecut/cell_grid.hpp"
#include "tablecut/image_io.hpp"
#include "tablecut/ocr_output.hpp"

namespace tablecut {

struct CommandResult {
  int exit_code = -1;  // -1 when the process could not be started or was signalled
  std::string out;
  std::string err;
};

// Runs `command` through /bin/sh, feeding `input` on stdin and collecting
// both output streams.
inline CommandResult run_command(const std::string& command, std::string_view input = {}) {
  int in_pipe[2];
  int out_pipe[2];
  int err_pipe[2];
  if (pipe(in_pipe) != 0) throw IoError(std::string("pipe: ") + std::strerror(errno));
  if (pipe(out_pipe) != 0) {
    close(in_pipe[0]);
    close(in_pipe[1]);
    throw IoError(std::string("pipe: ") + std::strerror(errno));
  }
  if (pipe(err_pipe) != 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) close(fd);
    throw IoError(std::string("pipe: ") + std::strerror(errno));
  }
  const pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) close(fd);
    throw IoError(std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) close(fd);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  close(err_pipe[1]);
  // Writes to a child that stopped reading must not kill us.
  struct sigaction ignore {};
  struct sigaction previous {};
  ignore.sa_handler = SIG_IGN;
  sigaction(SIGPIPE, &ignore, &previous);

  CommandResult r;
  std::size_t written = 0;
  int to_child = in_pipe[1];
  if (input.empty()) {
    close(to_child);
    to_child = -1;
  } else {
    fcntl(to_child, F_SETFL, fcntl(to_child, F_GETFL) | O_NONBLOCK);
  }
  bool out_open = true;
  bool err_open = true;
  char buf[4096];
  while (out_open || err_open || to_child >= 0) {
    pollfd fds[3];
    nfds_t n = 0;
    int out_i = -1, err_i = -1, in_i = -1;
    if (out_open) { out_i = static_cast<int>(n); fds[n++] = {out_pipe[0], POLLIN, 0}; }
    if (err_open) { err_i = static_cast<int>(n); fds[n++] = {err_pipe[0], POLLIN, 0}; }
    if (to_child >= 0) { in_i = static_cast<int>(n); fds[n++] = {to_child, POLLOUT, 0}; }
    if (poll(fds, n, -1) < 0) {
      if (errno == EINTR) continue;
      break;
    }
    auto drain = [&](int idx, int fd, std::string& sink, bool& open) {
      if (idx < 0 || !(fds[idx].revents & (POLLIN | POLLHUP | POLLERR))) return;
      const ssize_t got = read(fd, buf, sizeof buf);
      if (got > 0) sink.append(buf, static_cast<std::size_t>(got));
      else if (got == 0 || errno != EINTR) open = false;
    };
    drain(out_i, out_pipe[0], r.out, out_open);
    drain(err_i, err_pipe[0], r.err, err_open);
    if (in_i >= 0 && (fds[in_i].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t put = write(to_child, input.data() + written, input.size() - written);
      if (put > 0) written += static_cast<std::size_t>(put);
      if (put < 0 && errno != EAGAIN && errno != EINTR) written = input.size();
      if (written >= input.size()) {
        close(to_child);
        to_child = -1;
      }
    }
  }
  close(out_pipe[0]);
  close(err_pipe[0]);
  sigaction(SIGPIPE, &previous, nullptr);
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline std::string trim_trailing(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  return s;
}

inline std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  out += '\'';
  return out;
}

// Replaces every `{input}` with the quoted path.
inline std::string expand_template(std::string_view tmpl, const std::filesystem::path& input) {
  std::string out;
  const std::string_view key = "{input}";
  std::size_t pos = 0;
  while (true) {
    const auto hit = tmpl.find(key, pos);
    out.append(tmpl.substr(pos, hit == std::string_view::npos ? std::string_view::npos : hit - pos));
    if (hit == std::string_view::npos) break;
    out += shell_quote(input.string());
    pos = hit + key.size();
  }
  return out;
}

namespace detail {

// Unique scratch path; safe across threads of one process.
inline std::filesystem::path scratch_png() {
  static std::atomic<unsigned long> counter{0};
  std::ostringstream name;
  name << "tablecut-" << getpid() << '-' << counter.fetch_add(1) << ".png";
  return std::filesystem::temp_directory_path() / name.str();
}

struct ScratchFile {
  std::filesystem::path path;
  ~ScratchFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
};

}  // namespace detail

// Runs an OCR engine once per crop. The crop goes to a scratch PNG named by
// `{input}`; without `{input}` the PNG bytes go to stdin.
class CommandOcrClient final : public OcrClient {
 public:
  explicit CommandOcrClient(std::string command_template) : tmpl_(std::move(command_template)) {}

  OcrResult recognize(const GrayImage& crop, const Box&) const override {
    OcrResult r;
    try {
      const auto png = encode_png(crop);
      CommandResult cr;
      if (tmpl_.find("{input}") != std::string::npos) {
        detail::ScratchFile file{detail::scratch_png()};
        write_file_bytes(file.path, png);
        cr = run_command(expand_template(tmpl_, file.path));
      } else {
        cr = run_command(tmpl_, std::string_view(reinterpret_cast<const char*>(png.data()), png.size()));
      }
      if (cr.exit_code != 0) {
        r.ok = false;
        r.error = "OCR command exited with " + std::to_string(cr.exit_code) +
                  (cr.exit_code == 127 ? " (command not found)" : "") + (cr.err.empty() ? "" : ": " + trim_trailing(cr.err));
        return r;
      }
      r.text = std::move(cr.out);
    } catch (const Error& e) {
      r.ok = false;
      r.error = e.what();
    }
    return r;
  }

 private:
  std::string tmpl_;
};

// Word sidecar used by stub OCR: {"words": [{"box": [x0, y0, x1, y1], "text": "..."}]}.
inline std::string write_words_json(const std::vector<WordBox>& words) {
  nlohmann::json j;
  j["words"] = nlohmann::json::array();
  for (const auto& w : words)
    j["words"].push_back({{"box", {w.box.x_min, w.box.y_min, w.box.x_max, w.box.y_max}}, {"text", w.text}});
  return j.dump(2) + "\n";
}

inline std::vector<WordBox> parse_words_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputFormatError(std::string("word sidecar: ") + e.what());
  }
  if (!j.is_object() || !j.contains("words") || !j["words"].is_array())
    throw InputFormatError("word sidecar: expected an object with a \"words\" array");
  std::vector<WordBox> out;
  for (const auto& w : j["words"]) {
    if (!w.is_object() || !w.contains("box") || !w.contains("text") || !w["box"].is_array() || w["box"].size() != 4 ||
        !w["text"].is_string())
      throw InputFormatError("word sidecar: each word needs a 4-integer \"box\" and a \"text\" string");
    for (const auto& v : w["box"])
      if (!v.is_number_integer()) throw InputFormatError("word sidecar: box entries must be integers");
    out.push_back({{w["box"][0].get<int>(), w["box"][1].get<int>(), w["box"][2].get<int>(), w["box"][3].get<int>()},
                   w["text"].get<std::string>()});
  }
  return out;
}

inline constexpr std::string_view kStubPrefix = "stub:";

inline bool is_stub_command(std::string_view cmd) { return cmd.substr(0, kStubPrefix.size()) == kStubPrefix; }

// Sidecar for `image` under stub mode: `stub:` looks next to the image,
// `stub:DIR` looks in DIR.
inline std::filesystem::path stub_sidecar_path(std::string_view cmd, const std::filesystem::path& image) {
  const auto dir = cmd.substr(kStubPrefix.size());
  const auto name = image.stem().string() + ".words.json";
  return dir.empty() ? image.parent_path() / name : std::filesystem::path(std::string(dir)) / name;
}

// External merge classifier: the 200x100 pair view goes to the command as a
// PNG (through `{input}` or stdin), which prints three reals in [0, 1].
class CommandMergeClassifier {
 public:
  explicit CommandMergeClassifier(std::string command_template) : tmpl_(std::move(command_template)) {}

  PairDecision operator()(const GrayImage& view) const {
    const auto png = encode_png(view);
    CommandResult cr;
    if (tmpl_.find("{input}") != std::string::npos) {
      detail::ScratchFile file{detail::scratch_png()};
      write_file_bytes(file.path, png);
      cr = run_command(expand_template(tmpl_, file.path));
    } else {
      cr = run_command(tmpl_, std::string_view(reinterpret_cast<const char*>(png.data()), png.size()));
    }
    if (cr.exit_code != 0) throw IoError("classifier command exited with " + std::to_string(cr.exit_code));
    std::istringstream is(cr.out);
    PairDecision d;
    if (!(is >> d.left_data >> d.right_data >> d.merge))
      throw InputFormatError("classifier output must hold three numbers, got '" + cr.out + "'");
    for (double v : {d.left_data, d.right_data, d.merge})
      if (!(v >= 0.0 && v <= 1.0)) throw InputFormatError("classifier output outside [0, 1]");
    return d;
  }

 private:
  std::string tmpl_;
};

}  // namespace tablecut
