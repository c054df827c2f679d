#pragma once

#include <optional>
#include <string>
#include <vector>

#include "layoutcot/layout.hpp"

namespace layoutcot {

struct HtmlSnippet {
  std::string text;

  bool operator==(const HtmlSnippet&) const = default;
};

/// Emits the canonical snippet:
///
///   <html><body><div class="canvas" style="width:{W}px; height:{H}px"></div>
///   <div class="{label}" style="left:{x}px; top:{y}px; width:{w}px; height:{h}px"></div>
///   ...</body></html>
///
/// on a single line, coordinates in pixels rounded half-up to integers.
/// Normalized layouts are mapped back to pixels through their original size.
HtmlSnippet to_html(const Layout& layout);

/// Rounds half-up, the rule used for every emitted coordinate.
long long round_half_up(double value);

struct ParseOptions {
  // Labels accepted as element classes. Empty accepts every class.
  std::vector<std::string> vocabulary;
  // Strict mode rejects unknown classes and a missing canvas div.
  bool strict = false;
  // Used when the text has element divs but no canvas div.
  std::optional<Canvas> fallback_canvas;
};

struct ParsedLayout {
  Layout layout;
  std::vector<std::string> warnings;
};

/// Tolerant extraction of a layout from snippet text or free-form LLM output.
///
/// Whitespace, quoting style, style property order, missing wrapper tags,
/// code fences and surrounding prose are all accepted. When the text holds
/// several canvas divs (an LLM echoing its references, say) the last snippet
/// wins. Unknown classes are dropped with a warning.
///
/// Throws Error(ParseFailure) when neither a canvas nor an element div is
/// found, and Error(NegativeDimension) for a negative width or height.
ParsedLayout parse_html(const std::string& text, const ParseOptions& options = {});

inline ParsedLayout parse_html(const HtmlSnippet& snippet, const ParseOptions& options = {}) {
  return parse_html(snippet.text, options);
}

}  // namespace layoutcot
