#pragma once

#include <stdexcept>
#include <string>

namespace syncron {

// Invalid configuration or out-of-range addresses / ids.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)) {}
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class CodecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A message that is not valid for the current synchronization state. These
// indicate a bug in the protocol implementation or a misbehaving workload.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DeadlockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace syncron
