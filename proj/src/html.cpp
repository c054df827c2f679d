#include "layoutcot/html.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <string_view>

#include "layoutcot/error.hpp"

namespace layoutcot {

long long round_half_up(double value) {
  return static_cast<long long>(std::floor(value + 0.5));
}

HtmlSnippet to_html(const Layout& layout) {
  const Layout px = denormalize(layout);
  std::ostringstream os;
  os << "<html><body><div class=\"canvas\" style=\"width:" << round_half_up(px.canvas.width)
     << "px; height:" << round_half_up(px.canvas.height) << "px\"></div>";
  for (const auto& e : px.elements) {
    os << "<div class=\"" << e.label << "\" style=\"left:" << round_half_up(e.bbox.left)
       << "px; top:" << round_half_up(e.bbox.top) << "px; width:" << round_half_up(e.bbox.width)
       << "px; height:" << round_half_up(e.bbox.height) << "px\"></div>";
  }
  os << "</body></html>";
  return HtmlSnippet{os.str()};
}

namespace {

struct DivTag {
  std::vector<std::string> classes;
  std::optional<double> left, top, width, height;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr == s.data()) return std::nullopt;
  return value;
}

// Splits `name=value` pairs out of the text between "<div" and ">".
std::vector<std::pair<std::string, std::string>> parse_attributes(std::string_view attrs) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t i = 0;
  const auto is_name = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':';
  };
  while (i < attrs.size()) {
    while (i < attrs.size() && !is_name(attrs[i])) ++i;
    const std::size_t name_begin = i;
    while (i < attrs.size() && is_name(attrs[i])) ++i;
    if (name_begin == i) break;
    std::string name = lower(attrs.substr(name_begin, i - name_begin));
    while (i < attrs.size() && std::isspace(static_cast<unsigned char>(attrs[i]))) ++i;
    std::string value;
    if (i < attrs.size() && attrs[i] == '=') {
      ++i;
      while (i < attrs.size() && std::isspace(static_cast<unsigned char>(attrs[i]))) ++i;
      if (i < attrs.size() && (attrs[i] == '"' || attrs[i] == '\'')) {
        const char quote = attrs[i++];
        const std::size_t end = attrs.find(quote, i);
        const std::size_t stop = end == std::string_view::npos ? attrs.size() : end;
        value = std::string(attrs.substr(i, stop - i));
        i = stop == attrs.size() ? stop : stop + 1;
      } else {
        const std::size_t begin = i;
        while (i < attrs.size() && !std::isspace(static_cast<unsigned char>(attrs[i])) &&
               attrs[i] != '/')
          ++i;
        value = std::string(attrs.substr(begin, i - begin));
      }
    }
    out.emplace_back(std::move(name), std::move(value));
  }
  return out;
}

DivTag parse_div(std::string_view attrs) {
  DivTag tag;
  for (const auto& [name, value] : parse_attributes(attrs)) {
    if (name == "class") {
      std::istringstream is(value);
      std::string token;
      while (is >> token) tag.classes.push_back(token);
    } else if (name == "style") {
      std::string_view rest = value;
      while (!rest.empty()) {
        const std::size_t semi = rest.find(';');
        const std::string_view decl = rest.substr(0, semi);
        rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
        const std::size_t colon = decl.find(':');
        if (colon == std::string_view::npos) continue;
        const std::string key = lower(trim(decl.substr(0, colon)));
        const auto number = parse_number(decl.substr(colon + 1));
        if (!number) continue;
        if (key == "left") tag.left = number;
        else if (key == "top") tag.top = number;
        else if (key == "width") tag.width = number;
        else if (key == "height") tag.height = number;
      }
    }
  }
  return tag;
}

std::vector<DivTag> scan_divs(const std::string& text) {
  const std::string lowered = lower(text);
  std::vector<DivTag> divs;
  std::size_t pos = 0;
  while ((pos = lowered.find("<div", pos)) != std::string::npos) {
    const std::size_t attr_begin = pos + 4;
    if (attr_begin < lowered.size()) {
      const char next = lowered[attr_begin];
      if (!std::isspace(static_cast<unsigned char>(next)) && next != '>' && next != '/') {
        pos = attr_begin;
        continue;
      }
    }
    // Closing '>' outside quotes.
    std::size_t i = attr_begin;
    char quote = 0;
    for (; i < text.size(); ++i) {
      const char c = text[i];
      if (quote) {
        if (c == quote) quote = 0;
      } else if (c == '"' || c == '\'') {
        quote = c;
      } else if (c == '>') {
        break;
      }
    }
    divs.push_back(parse_div(std::string_view(text).substr(attr_begin, i - attr_begin)));
    pos = i;
  }
  return divs;
}

bool is_canvas(const DivTag& tag) {
  return std::find(tag.classes.begin(), tag.classes.end(), "canvas") != tag.classes.end();
}

}  // namespace

ParsedLayout parse_html(const std::string& text, const ParseOptions& options) {
  const std::vector<DivTag> divs = scan_divs(text);

  std::optional<std::size_t> canvas_pos;
  for (std::size_t i = 0; i < divs.size(); ++i) {
    if (is_canvas(divs[i])) canvas_pos = i;
  }

  ParsedLayout result;
  Layout& layout = result.layout;
  bool have_canvas = false;
  if (canvas_pos) {
    const DivTag& c = divs[*canvas_pos];
    if (c.width && c.height) {
      if (*c.width < 0.0 || *c.height < 0.0) {
        throw Error(ErrorCode::NegativeDimension, "canvas has a negative dimension");
      }
      layout.canvas.width = *c.width;
      layout.canvas.height = *c.height;
      have_canvas = true;
    } else {
      result.warnings.push_back("canvas div without width/height ignored");
    }
  }

  const auto in_vocabulary = [&](const std::string& label) {
    return options.vocabulary.empty() ||
           std::find(options.vocabulary.begin(), options.vocabulary.end(), label) !=
               options.vocabulary.end();
  };

  const std::size_t first = canvas_pos ? *canvas_pos + 1 : 0;
  for (std::size_t i = first; i < divs.size(); ++i) {
    const DivTag& d = divs[i];
    if (d.classes.empty()) continue;
    const auto known = std::find_if(d.classes.begin(), d.classes.end(), in_vocabulary);
    if (known == d.classes.end()) {
      if (options.strict) {
        throw Error(ErrorCode::VocabularyError, "unknown element class '" + d.classes.front() + "'");
      }
      result.warnings.push_back("unknown element class '" + d.classes.front() + "' skipped");
      continue;
    }
    if (!d.width || !d.height) {
      if (options.strict) {
        throw Error(ErrorCode::ParseFailure, "element '" + *known + "' lacks width/height");
      }
      result.warnings.push_back("element '" + *known + "' without width/height skipped");
      continue;
    }
    if (*d.width < 0.0 || *d.height < 0.0) {
      throw Error(ErrorCode::NegativeDimension, "element '" + *known + "' has a negative size");
    }
    Element e;
    e.label = *known;
    e.bbox = BBox{d.left.value_or(0.0), d.top.value_or(0.0), *d.width, *d.height};
    layout.elements.push_back(std::move(e));
  }

  if (!have_canvas) {
    if (layout.elements.empty()) {
      throw Error(ErrorCode::ParseFailure, "no canvas dimensions and no element divs found");
    }
    if (options.strict) {
      throw Error(ErrorCode::ParseFailure, "strict mode requires a canvas div");
    }
    if (options.fallback_canvas) {
      layout.canvas = *options.fallback_canvas;
    } else {
      double w = 1.0, h = 1.0;
      for (const auto& e : layout.elements) {
        w = std::max(w, e.bbox.right());
        h = std::max(h, e.bbox.bottom());
      }
      layout.canvas.width = std::ceil(w);
      layout.canvas.height = std::ceil(h);
    }
    result.warnings.push_back("canvas div missing; canvas taken from fallback");
  }
  return result;
}

}  // namespace layoutcot
