#pragma once

#include <algorithm>
#include <string>
#include <vector>

namespace timberline {

/// Ordered, de-duplicated notes about estimation edge cases.
class Diagnostics {
 public:
  void add(std::string message) {
    if (std::find(messages_.begin(), messages_.end(), message) == messages_.end())
      messages_.push_back(std::move(message));
  }
  void merge(const Diagnostics& other) {
    for (const auto& m : other.messages_) add(m);
  }
  const std::vector<std::string>& messages() const { return messages_; }
  bool empty() const { return messages_.empty(); }

 private:
  std::vector<std::string> messages_;
};

}  // namespace timberline
