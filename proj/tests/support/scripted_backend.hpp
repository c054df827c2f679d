// Offline stand-in for an LLM: answers coarse prompts with seeded random
// layouts and refinement prompts with a tidied copy of the current layout.
#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <regex>
#include <string>
#include <vector>

#include "layoutcot/gateway.hpp"
#include "layoutcot/hash.hpp"
#include "layoutcot/html.hpp"

namespace scripted {

using layoutcot::BBox;
using layoutcot::ChatRequest;
using layoutcot::ChatResponse;
using layoutcot::Layout;

inline std::uint64_t seed_of(const std::string& key) { return std::stoull(key.substr(0, 15), nullptr, 16); }

inline bool is_coarse(const ChatRequest& r) { return r.user.find("Generate a layout for a ") != std::string::npos; }

inline int stage_of(const ChatRequest& r) {
  if (is_coarse(r)) return 0;
  if (r.user.find("after Stage 2") != std::string::npos) return 3;
  if (r.user.find("after Stage 1") != std::string::npos) return 2;
  return 1;
}

// Label counts from "- label: n" lines of the constraint block.
inline std::vector<std::string> requested_labels(const std::string& user) {
  std::vector<std::string> out;
  static const std::regex line(R"(\n- ([a-z_]+): (\d+))");
  for (auto it = std::sregex_iterator(user.begin(), user.end(), line); it != std::sregex_iterator(); ++it) {
    for (int i = 0; i < std::stoi((*it)[2]); ++i) out.push_back((*it)[1]);
  }
  if (out.empty()) out = {"text", "text", "logo", "underlay"};
  return out;
}

inline Layout random_layout(std::mt19937_64& rng, double w, double h, const std::vector<std::string>& labels) {
  Layout l;
  l.canvas.width = w;
  l.canvas.height = h;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& label : labels) {
    const double bw = std::round(w * (label == "underlay" ? 0.5 + 0.4 * u(rng) : 0.15 + 0.5 * u(rng)));
    const double bh = std::round(h * (label == "underlay" ? 0.15 + 0.2 * u(rng) : 0.04 + 0.1 * u(rng)));
    const double left = std::round((w - bw) * u(rng));
    const double top = std::round((h - bh) * u(rng));
    l.elements.push_back({label, BBox{left, top, bw, bh}, false});
  }
  return l;
}

// Snaps every element's left edge to the first element's and nudges them
// apart vertically: a crude "refinement" that keeps labels and sizes.
inline Layout tidy(Layout l, int stage) {
  if (l.elements.empty()) return l;
  const double left = l.elements.front().bbox.left;
  for (std::size_t i = 0; i < l.elements.size(); ++i) {
    auto& b = l.elements[i].bbox;
    if (stage == 1) b.left = std::min(left, l.canvas.width - b.width);
    if (stage == 2) b.top = std::min(b.top + 2.0 * static_cast<double>(i), l.canvas.height - b.height);
    if (stage == 3) b.width = std::max(1.0, b.width - 1.0);
  }
  return l;
}

class ScriptedBackend : public layoutcot::ChatBackend {
 public:
  // Returns replacement text for a request, or nullopt for the default answer.
  using Override = std::function<std::optional<std::string>(const ChatRequest&, std::size_t call)>;

  explicit ScriptedBackend(Override override = {}) : override_(std::move(override)) {}

  ChatResponse send(const ChatRequest& r) override {
    const std::size_t call = calls_++;
    if (override_) {
      if (auto text = override_(r, call)) return {*text, 0, 0};
    }
    const std::string key = layoutcot::transcript_key(r);
    std::mt19937_64 rng(seed_of(key));
    if (is_coarse(r)) {
      static const std::regex size(R"(Generate a layout for a (\d+)x(\d+) canvas)");
      std::smatch m;
      std::regex_search(r.user, m, size);
      const double w = std::stod(m[1]), h = std::stod(m[2]);
      const auto layout = random_layout(rng, w, h, requested_labels(r.user));
      const std::string html = layoutcot::to_html(layout).text;
      switch (rng() % 10) {
        case 0: return {"I'm sorry, but I can't produce a layout for this request.", 0, 0};
        case 1: return {"Here is the layout:\n```html\n" + html + "\n```\nLet me know if you need changes.", 0, 0};
        case 2: return {"```\n" + html + "\n```", 0, 0};
        default: return {html, 0, 0};
      }
    }
    // The current layout is the last snippet in the user prompt.
    const Layout current = layoutcot::parse_html(r.user).layout;
    const std::string html = layoutcot::to_html(tidy(current, stage_of(r))).text;
    return {"Adjusted the elements as requested.\n```html\n" + html + "\n```", 0, 0};
  }

  std::size_t calls() const { return calls_; }

 private:
  Override override_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace scripted
