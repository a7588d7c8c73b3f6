#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flare {

enum class ErrorKind {
  InvalidInput,
  UnknownClass,
  IoError,
  LayoutError,
  EmptyDataset,
  DimensionError,
  ServiceUnavailable,
  ProtocolViolation,
  ChannelError,
  InvalidWeight,
  StageError,
  TaxonomyError,
  TooSmall,
  ConfigError,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` carries the category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), message_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  // what() without the kind prefix.
  const std::string& message() const noexcept { return message_; }

  // IO and remote-service failures map to exit code 2, everything else to 1.
  bool is_environmental() const noexcept {
    return kind_ == ErrorKind::IoError || kind_ == ErrorKind::ServiceUnavailable;
  }

 private:
  ErrorKind kind_;
  std::string message_;
};

/// A stage gave up after per-sample failures; carries every failed sample key.
class StageAborted : public Error {
 public:
  StageAborted(ErrorKind kind, std::vector<std::string> failed, const std::string& first_error)
      : Error(kind, "stage aborted, " + std::to_string(failed.size()) +
                        " sample(s) failed; first error: " + first_error),
        failed_(std::move(failed)) {}

  const std::vector<std::string>& failed_ids() const noexcept { return failed_; }

 private:
  std::vector<std::string> failed_;
};

/// Per-task failure slots filled by parallel workers and turned into one StageAborted.
class FailureLog {
 public:
  explicit FailureLog(std::size_t n) : slots_(n) {}

  template <typename Fn>
  void capture(std::size_t i, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      slots_[i] = Slot{true, e.is_environmental(), e.what()};
    } catch (const std::exception& e) {
      slots_[i] = Slot{true, false, e.what()};
    }
  }

  /// Throws if any slot failed; `key(i)` names the sample for slot i.
  template <typename KeyFn>
  void raise_if_failed(KeyFn&& key) const {
    std::vector<std::string> failed;
    std::string first;
    bool environmental = false;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (!slots_[i].failed) continue;
      failed.push_back(key(i));
      environmental = environmental || slots_[i].environmental;
      if (first.empty()) first = failed.back() + ": " + slots_[i].message;
    }
    if (!failed.empty())
      throw StageAborted(environmental ? ErrorKind::ServiceUnavailable : ErrorKind::StageError,
                         std::move(failed), first);
  }

 private:
  struct Slot {
    bool failed = false;
    bool environmental = false;
    std::string message;
  };
  std::vector<Slot> slots_;
};

}  // namespace flare
