// Copyright 2026 The facesweep Authors
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

#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <sys/types.h>

namespace facesweep {

// Child process connected through two pipes: we write its stdin and read its
// stdout. stderr is inherited. Closing stdin is the shutdown signal; the
// destructor waits briefly and then kills the child.
class ChildProcess {
 public:
  explicit ChildProcess(const std::string& command);
  ~ChildProcess();

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  // Appends '\n'. Throws Error(kBackendExited) when the child is gone.
  void write_line(std::string_view line);
  // One line without its terminator, or nullopt at end of stream.
  std::optional<std::string> read_line();

  void close_stdin();
  // Blocks until exit; returns the exit code, or 128 + signal.
  int wait();
  pid_t pid() const { return pid_; }

 private:
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::optional<int> status_;
};

}  // namespace facesweep
