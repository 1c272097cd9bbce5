#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "psyling/error.hpp"

namespace psyling {

/// Closed label set. Integer codes are part of every on-disk vector layout:
///   0 ADHD, 1 Anxiety, 2 Bipolar, 3 Depression, 4 PTSD, 5 Stress, 6 Control.
enum class MhcLabel : std::uint8_t {
  ADHD = 0,
  Anxiety = 1,
  Bipolar = 2,
  Depression = 3,
  PTSD = 4,
  Stress = 5,
  Control = 6,
};

inline constexpr std::size_t kNumLabels = 7;

inline constexpr std::array<MhcLabel, kNumLabels> kAllLabels = {
    MhcLabel::ADHD, MhcLabel::Anxiety, MhcLabel::Bipolar, MhcLabel::Depression,
    MhcLabel::PTSD, MhcLabel::Stress,  MhcLabel::Control};

inline constexpr int label_code(MhcLabel l) { return static_cast<int>(l); }

inline std::string_view label_name(MhcLabel l) {
  static constexpr std::array<std::string_view, kNumLabels> names = {
      "ADHD", "Anxiety", "Bipolar", "Depression", "PTSD", "Stress", "Control"};
  return names[static_cast<std::size_t>(l)];
}

inline std::optional<MhcLabel> try_parse_label(std::string_view s) {
  for (MhcLabel l : kAllLabels)
    if (label_name(l) == s) return l;
  return std::nullopt;
}

inline MhcLabel parse_label(std::string_view s) {
  if (auto l = try_parse_label(s)) return *l;
  throw UnknownLabel(std::string(s));
}

/// Column order of the published results tables (reports only; never a vector layout).
inline constexpr std::array<MhcLabel, kNumLabels> kReportOrder = {
    MhcLabel::Depression, MhcLabel::Anxiety, MhcLabel::Bipolar, MhcLabel::ADHD,
    MhcLabel::Stress,     MhcLabel::PTSD,    MhcLabel::Control};

/// The classes active in one experiment, in label-code order. Model output
/// index k corresponds to labels()[k].
class ClassSet {
 public:
  ClassSet() : labels_(kAllLabels.begin(), kAllLabels.end()) {}

  static ClassSet excluding(const std::set<MhcLabel>& excluded) {
    ClassSet cs;
    std::erase_if(cs.labels_, [&](MhcLabel l) { return excluded.count(l) > 0; });
    return cs;
  }

  static ClassSet from_labels(std::vector<MhcLabel> labels) {
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    ClassSet cs;
    cs.labels_ = std::move(labels);
    return cs;
  }

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<MhcLabel>& labels() const noexcept { return labels_; }
  MhcLabel at(std::size_t index) const { return labels_.at(index); }

  std::optional<std::size_t> index_of(MhcLabel l) const {
    auto it = std::find(labels_.begin(), labels_.end(), l);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
  }
  bool contains(MhcLabel l) const { return index_of(l).has_value(); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (MhcLabel l : labels_) out.emplace_back(label_name(l));
    return out;
  }

  static ClassSet from_names(const std::vector<std::string>& names) {
    std::vector<MhcLabel> v;
    for (const auto& n : names) v.push_back(parse_label(n));
    return from_labels(std::move(v));
  }

  bool operator==(const ClassSet&) const = default;

 private:
  std::vector<MhcLabel> labels_;
};

}  // namespace psyling
