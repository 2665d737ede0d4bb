#include "imgquiz/wiki.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "imgquiz/digest.hpp"
#include "imgquiz/error.hpp"
#include "imgquiz/quizgen.hpp"
#include "imgquiz/text.hpp"

namespace imgquiz::wiki {

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- HTML to sections -------------------------------------------------------

bool is_void_tag(std::string_view tag) {
  static const std::set<std::string_view> kVoid = {"area", "base", "br",    "col",   "embed",
                                                   "hr",   "img",  "input", "link",  "meta",
                                                   "param", "source", "track", "wbr"};
  return kVoid.count(tag) > 0;
}

bool is_block_tag(std::string_view tag) {
  static const std::set<std::string_view> kBlock = {
      "p",  "li", "dd", "dt", "div", "br", "ul", "ol", "dl", "blockquote",
      "h1", "h4", "h5", "h6", "tr",  "pre", "section"};
  return kBlock.count(tag) > 0;
}

std::string attribute(std::string_view tag_text, std::string_view name) {
  std::size_t pos = 0;
  while ((pos = tag_text.find(name, pos)) != std::string_view::npos) {
    const bool boundary = pos > 0 && std::isspace(static_cast<unsigned char>(tag_text[pos - 1]));
    std::size_t p = pos + name.size();
    pos = p;
    if (!boundary) continue;
    while (p < tag_text.size() && std::isspace(static_cast<unsigned char>(tag_text[p]))) ++p;
    if (p >= tag_text.size() || tag_text[p] != '=') continue;
    ++p;
    while (p < tag_text.size() && std::isspace(static_cast<unsigned char>(tag_text[p]))) ++p;
    if (p >= tag_text.size()) break;
    const char quote = tag_text[p];
    if (quote == '"' || quote == '\'') {
      const auto end = tag_text.find(quote, p + 1);
      if (end == std::string_view::npos) break;
      return std::string(tag_text.substr(p + 1, end - p - 1));
    }
    std::size_t end = p;
    while (end < tag_text.size() && !std::isspace(static_cast<unsigned char>(tag_text[end])) &&
           tag_text[end] != '>')
      ++end;
    return std::string(tag_text.substr(p, end - p));
  }
  return {};
}

bool skipped_element(std::string_view tag, std::string_view tag_text) {
  if (tag == "script" || tag == "style" || tag == "table" || tag == "figure" || tag == "noscript" ||
      tag == "math" || tag == "svg") {
    return true;
  }
  const std::string cls = " " + attribute(tag_text, "class") + " ";
  static const char* kSkipClasses[] = {
      "infobox",  "navbox",    "reflist",       "references", "mw-references-wrap", "reference",
      "mw-editsection", "hatnote", "thumb",     "gallery",    "metadata",           "noprint",
      "toc",      "sistersitebox", "shortdescription", "mw-empty-elt", "mw-cite-backlink",
      "navigation-not-searchable", "sidebar"};
  for (const char* skip : kSkipClasses) {
    if (cls.find(std::string(" ") + skip + " ") != std::string::npos) return true;
  }
  return false;
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x110000) {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string decode_entities(std::string_view s) {
  static const std::map<std::string, std::string, std::less<>> kNamed = {
      {"amp", "&"},       {"lt", "<"},        {"gt", ">"},       {"quot", "\""},
      {"apos", "'"},      {"nbsp", " "},      {"ndash", "\xE2\x80\x93"},
      {"mdash", "\xE2\x80\x94"}, {"minus", "\xE2\x88\x92"}, {"times", "\xC3\x97"},
      {"deg", "\xC2\xB0"}, {"hellip", "\xE2\x80\xA6"}};
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    const auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    const std::string_view name = s.substr(i + 1, semi - i - 1);
    if (!name.empty() && name[0] == '#') {
      unsigned long cp = 0;
      try {
        cp = (name.size() > 1 && (name[1] == 'x' || name[1] == 'X'))
                 ? std::stoul(std::string(name.substr(2)), nullptr, 16)
                 : std::stoul(std::string(name.substr(1)));
      } catch (const std::exception&) {
        out.push_back('&');
        continue;
      }
      append_utf8(out, cp == 0xA0 ? 0x20 : cp);
      i = semi;
      continue;
    }
    if (auto it = kNamed.find(name); it != kNamed.end()) {
      out += it->second;
      i = semi;
      continue;
    }
    out.push_back('&');
  }
  return out;
}

std::optional<std::string> article_link(std::string_view href) {
  constexpr std::string_view kPrefix = "/wiki/";
  if (!href.starts_with(kPrefix)) return std::nullopt;
  std::string title = percent_decode(href.substr(kPrefix.size()));
  if (auto hash = title.find('#'); hash != std::string::npos) title.resize(hash);
  if (title.empty() || title.find(':') != std::string::npos) return std::nullopt;
  std::replace(title.begin(), title.end(), '_', ' ');
  return title;
}

bool excluded_heading(std::string_view heading) {
  static const char* kExcluded[] = {"references", "see also",     "external links", "notes",
                                    "further reading", "bibliography", "sources", "citations",
                                    "footnotes", "gallery"};
  const std::string h = text::to_lower(text::trim(heading));
  return std::any_of(std::begin(kExcluded), std::end(kExcluded),
                     [&](const char* e) { return h == e; });
}

std::string clean_heading(std::string_view s) {
  std::string h = text::collapse_whitespace(decode_entities(s));
  if (h.ends_with("[edit]")) h = text::collapse_whitespace(h.substr(0, h.size() - 6));
  return h;
}

bool image_file(std::string_view name) {
  const std::string lower = text::to_lower(name);
  for (const char* ext : {".jpg", ".jpeg", ".png", ".gif", ".webp"}) {
    if (lower.ends_with(ext)) return true;
  }
  return false;
}

void merge_continue(QueryParams& params, const Json& cont) {
  for (const auto& [k, v] : cont.items()) {
    const std::string value = v.is_string() ? v.get<std::string>() : v.dump();
    auto it = std::find_if(params.begin(), params.end(), [&](const auto& p) { return p.first == k; });
    if (it != params.end()) it->second = value;
    else params.emplace_back(k, value);
  }
}

const Json& first_page(const Json& doc) {
  static const Json kEmpty = Json::object();
  if (!doc.contains("query") || !doc["query"].contains("pages")) return kEmpty;
  const Json& pages = doc["query"]["pages"];
  if (pages.is_array() && !pages.empty()) return pages[0];
  return kEmpty;
}

}  // namespace

// ---- transports -------------------------------------------------------------

LiveTransport::LiveTransport(LiveTransportConfig config)
    : config_(std::move(config)), slots_(std::clamp<std::ptrdiff_t>(config_.max_concurrent, 1, 64)) {}

HttpResponse LiveTransport::get(const std::string& url) {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<64>& s;
    ~Release() { s.release(); }
  } release{slots_};

  const UrlParts parts = split_url(url);
  httplib::Client client(parts.origin);
  client.set_follow_location(true);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_default_headers({{"User-Agent", config_.user_agent}});
  auto res = client.Get(parts.path);
  if (config_.politeness_delay.count() > 0) std::this_thread::sleep_for(config_.politeness_delay);
  if (!res) {
    throw Error(ErrorKind::transient,
                "request to " + parts.origin + " failed: " + httplib::to_string(res.error()));
  }
  HttpResponse out;
  out.status = res->status;
  out.body = res->body;
  out.content_type = res->get_header_value("Content-Type");
  return out;
}

FixtureTransport::FixtureTransport(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::fixture_load, "fixture directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    Json doc;
    try {
      doc = Json::parse(read_file(file));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::fixture_load, file.string() + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("request") || !doc["request"].is_string()) {
      throw Error(ErrorKind::fixture_load, file.string() + ": missing \"request\" URL");
    }
    HttpResponse r;
    r.status = doc.value("status", 200);
    r.content_type = doc.value("content_type", std::string("application/json"));
    if (doc.contains("body")) {
      r.body = doc["body"].is_string() ? doc["body"].get<std::string>() : doc["body"].dump();
    } else if (doc.contains("body_base64")) {
      r.body = base64_decode(doc["body_base64"].get<std::string>());
    } else if (doc.contains("body_file")) {
      r.body = read_file(file.parent_path() / doc["body_file"].get<std::string>());
    }
    const std::string key = canonical_url(doc["request"].get<std::string>());
    if (!responses_.emplace(key, std::move(r)).second) {
      throw Error(ErrorKind::fixture_load, file.string() + ": duplicate request " + key);
    }
  }
}

HttpResponse FixtureTransport::get(const std::string& url) {
  auto it = responses_.find(canonical_url(url));
  if (it == responses_.end()) throw Error(ErrorKind::fixture_miss, "no recorded response for " + url);
  return it->second;
}

std::string fixture_file_name(std::string_view url) {
  return sha256_hex(canonical_url(url)).substr(0, 16) + ".json";
}

RecordingTransport::RecordingTransport(std::shared_ptr<HttpTransport> inner,
                                       std::filesystem::path dir)
    : inner_(std::move(inner)), dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

HttpResponse RecordingTransport::get(const std::string& url) {
  HttpResponse r = inner_->get(url);
  Json doc;
  doc["request"] = url;
  doc["status"] = r.status;
  doc["content_type"] = r.content_type;
  const bool textual = r.content_type.find("json") != std::string::npos ||
                       r.content_type.starts_with("text/");
  if (textual) doc["body"] = r.body;
  else doc["body_base64"] = base64_encode(r.body);
  std::lock_guard lock(write_mutex_);
  std::ofstream out(dir_ / fixture_file_name(url), std::ios::binary | std::ios::trunc);
  out << doc.dump(2) << "\n";
  return r;
}

// ---- parsing ----------------------------------------------------------------

ParsedHtml parse_article_html(std::string_view html) {
  ParsedHtml out;
  out.sections.push_back({"", ""});
  out.links.emplace_back();
  bool dropping_section = false;

  std::string block;
  std::string heading;
  bool in_heading = false;
  std::string skip_tag;
  int skip_depth = 0;

  auto flush_block = [&] {
    std::string b = text::collapse_whitespace(decode_entities(block));
    block.clear();
    if (b.empty() || dropping_section) return;
    auto& body = out.sections.back().body;
    if (!body.empty()) body.append("\n\n");
    body.append(b);
  };

  std::size_t i = 0;
  while (i < html.size()) {
    if (html[i] != '<') {
      const auto next = html.find('<', i);
      const std::string_view chunk = html.substr(i, next == std::string_view::npos ? html.npos : next - i);
      if (skip_depth == 0) (in_heading ? heading : block).append(chunk);
      i = next == std::string_view::npos ? html.size() : next;
      continue;
    }
    if (html.substr(i, 4) == "<!--") {
      const auto end = html.find("-->", i + 4);
      i = end == std::string_view::npos ? html.size() : end + 3;
      continue;
    }
    const auto close = html.find('>', i);
    if (close == std::string_view::npos) break;
    const std::string_view tag_text = html.substr(i, close - i + 1);
    i = close + 1;

    const bool closing = tag_text.size() > 1 && tag_text[1] == '/';
    std::size_t name_start = closing ? 2 : 1;
    std::size_t name_end = name_start;
    while (name_end < tag_text.size() && std::isalnum(static_cast<unsigned char>(tag_text[name_end])))
      ++name_end;
    const std::string tag = text::to_lower(tag_text.substr(name_start, name_end - name_start));
    if (tag.empty()) continue;
    const bool self_closing = tag_text.ends_with("/>") || is_void_tag(tag);

    if (skip_depth > 0) {
      if (tag == skip_tag && !self_closing) skip_depth += closing ? -1 : 1;
      continue;
    }
    if (!closing && !self_closing && skipped_element(tag, tag_text)) {
      skip_tag = tag;
      skip_depth = 1;
      continue;
    }

    if (tag == "h2" || tag == "h3") {
      if (!closing) {
        flush_block();
        in_heading = true;
        heading.clear();
      } else if (in_heading) {
        in_heading = false;
        const std::string h = clean_heading(heading);
        dropping_section = excluded_heading(h);
        if (!dropping_section) {
          out.sections.push_back({h, ""});
          out.links.emplace_back();
        }
      }
      continue;
    }
    if (tag == "a" && !closing && !in_heading && !dropping_section) {
      if (auto link = article_link(attribute(tag_text, "href"))) {
        auto& links = out.links.back();
        if (std::find(links.begin(), links.end(), *link) == links.end()) links.push_back(*link);
      }
      continue;
    }
    if (is_block_tag(tag) && !in_heading) flush_block();
    else if (!in_heading) block.push_back(' ');
  }
  flush_block();

  // Drop empty sections, keeping links aligned.
  ParsedHtml kept;
  for (std::size_t s = 0; s < out.sections.size(); ++s) {
    if (out.sections[s].body.empty()) continue;
    kept.sections.push_back(std::move(out.sections[s]));
    kept.links.push_back(std::move(out.links[s]));
  }
  return kept;
}

std::optional<std::string> sniff_media_type(std::string_view b) {
  if (b.size() >= 3 && b.substr(0, 3) == "\xFF\xD8\xFF") return "image/jpeg";
  if (b.size() >= 8 && b.substr(0, 8) == std::string_view("\x89PNG\r\n\x1A\n", 8)) return "image/png";
  if (b.size() >= 6 && (b.substr(0, 6) == "GIF87a" || b.substr(0, 6) == "GIF89a")) return "image/gif";
  if (b.size() >= 12 && b.substr(0, 4) == "RIFF" && b.substr(8, 4) == "WEBP") return "image/webp";
  return std::nullopt;
}

std::string normalize_file_name(std::string_view name) {
  std::string s(text::trim(name));
  if (text::starts_with_ci(s, "File:")) s.erase(0, 5);
  else if (text::starts_with_ci(s, "Image:")) s.erase(0, 6);
  std::replace(s.begin(), s.end(), '_', ' ');
  return text::collapse_whitespace(s);
}

// ---- client -----------------------------------------------------------------

WikiClient::WikiClient(std::shared_ptr<HttpTransport> transport, Endpoints endpoints,
                       FetchLimits limits)
    : transport_(std::move(transport)), endpoints_(std::move(endpoints)), limits_(limits) {}

Json WikiClient::get_json(const std::string& api, const QueryParams& params) {
  QueryParams full = params;
  full.emplace_back("format", "json");
  full.emplace_back("formatversion", "2");
  const std::string url = api + "?" + build_query(full);
  const HttpResponse r = transport_->get(url);
  if (r.status == 404) throw Error(ErrorKind::not_found, "404 for " + url);
  if (r.status != 200) {
    throw Error(r.status >= 500 ? ErrorKind::transient : ErrorKind::permanent,
                "HTTP " + std::to_string(r.status) + " for " + url);
  }
  try {
    return Json::parse(r.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, "malformed API response for " + url + ": " + e.what());
  }
}

Concept WikiClient::fetch_article(const std::string& title) {
  const Json doc = get_json(endpoints_.wiki_api, {{"action", "parse"},
                                                  {"page", title},
                                                  {"prop", "text|categories|properties"},
                                                  {"redirects", "1"}});
  if (doc.contains("error")) {
    const std::string code = doc["error"].value("code", std::string());
    if (code == "missingtitle" || code == "invalidtitle") {
      throw Error(ErrorKind::not_found, "no article titled \"" + title + "\"");
    }
    throw Error(ErrorKind::permanent, "article fetch failed: " + doc["error"].value("info", code));
  }
  const Json& parse = doc.at("parse");
  const std::string resolved = parse.value("title", title);
  const ParsedHtml parsed = parse_article_html(parse.value("text", std::string()));

  if (parse.contains("properties") && parse["properties"].is_object() &&
      parse["properties"].contains("disambiguation")) {
    std::vector<std::string> options;
    for (const auto& l : parsed.links) options.insert(options.end(), l.begin(), l.end());
    throw Error(ErrorKind::ambiguous_title,
                "\"" + title + "\" is a disambiguation page; candidates: " + text::join(options, "; "));
  }
  if (parsed.sections.empty()) throw Error(ErrorKind::not_found, "article \"" + resolved + "\" has no text");

  std::vector<std::string> aliases;
  if (parse.contains("redirects")) {
    for (const auto& r : parse["redirects"]) aliases.push_back(r.value("from", std::string()));
  }
  if (!text::iequals(title, resolved)) aliases.push_back(title);

  Concept c = make_concept(resolved, parsed.sections, std::move(aliases));
  if (parse.contains("categories")) {
    for (const auto& cat : parse["categories"]) {
      if (cat.value("hidden", false)) continue;
      std::string name = cat.value("category", std::string());
      std::replace(name.begin(), name.end(), '_', ' ');
      if (!name.empty()) c.categories.push_back(name);
    }
  }
  if (!c.categories.empty()) c.category = c.categories.front();
  const auto& allow = quizgen::default_section_allowlist();
  for (std::size_t s = 0; s < parsed.sections.size(); ++s) {
    const std::string heading = text::to_lower(parsed.sections[s].heading);
    const bool visual = heading.empty() ||
                        std::any_of(allow.begin(), allow.end(), [&](const std::string& a) {
                          return heading.find(text::to_lower(a)) != std::string::npos;
                        });
    if (!visual) continue;
    for (const auto& link : parsed.links[s]) {
      if (std::find(c.links.begin(), c.links.end(), link) == c.links.end()) c.links.push_back(link);
    }
  }
  return c;
}

std::vector<ImageCandidate> WikiClient::list_candidate_images(const std::string& title,
                                                              const CandidateOptions& options) {
  if (options.limit < 1) throw Error(ErrorKind::argument, "candidate limit must be at least 1");
  std::set<std::string> names;

  QueryParams article{{"action", "query"}, {"prop", "images"}, {"titles", title},
                      {"imlimit", "max"},  {"redirects", "1"}};
  for (;;) {
    const Json doc = get_json(endpoints_.wiki_api, article);
    const Json& page = first_page(doc);
    if (page.contains("images")) {
      for (const auto& img : page["images"]) names.insert(normalize_file_name(img.value("title", "")));
    }
    if (!doc.contains("continue")) break;
    merge_continue(article, doc["continue"]);
  }

  QueryParams category{{"action", "query"}, {"list", "categorymembers"},
                       {"cmtitle", "Category:" + title}, {"cmtype", "file"}, {"cmlimit", "max"}};
  for (;;) {
    const Json doc = get_json(endpoints_.commons_api, category);
    if (doc.contains("query") && doc["query"].contains("categorymembers")) {
      for (const auto& m : doc["query"]["categorymembers"]) {
        names.insert(normalize_file_name(m.value("title", "")));
      }
    }
    if (!doc.contains("continue")) break;
    merge_continue(category, doc["continue"]);
  }

  std::vector<std::string> files;
  for (const auto& n : names) {
    if (!n.empty() && image_file(n)) files.push_back(n);
  }

  std::vector<ImageCandidate> out;
  for (const auto& file : files) {
    if (out.size() >= options.limit) break;
    std::uint64_t usage = 0;
    if (options.min_usage > 0) {
      usage = fetch_usage_count(file);
      if (usage < options.min_usage) continue;
    }
    ImageCandidate c;
    c.id = file;
    c.file_name = file;
    c.usage_count = usage;
    out.push_back(std::move(c));
  }

  constexpr std::size_t kBatch = 50;
  for (std::size_t start = 0; start < out.size(); start += kBatch) {
    std::vector<std::string> titles;
    for (std::size_t k = start; k < std::min(out.size(), start + kBatch); ++k) {
      titles.push_back("File:" + out[k].file_name);
    }
    const Json doc = get_json(endpoints_.commons_api, {{"action", "query"},
                                                       {"prop", "imageinfo"},
                                                       {"titles", text::join(titles, "|")},
                                                       {"iiprop", "url|size|mime|timestamp"},
                                                       {"iiurlwidth", "1024"}});
    if (!doc.contains("query") || !doc["query"].contains("pages")) continue;
    for (const auto& page : doc["query"]["pages"]) {
      const std::string name = normalize_file_name(page.value("title", ""));
      auto it = std::find_if(out.begin(), out.end(), [&](const auto& c) { return c.file_name == name; });
      if (it == out.end() || !page.contains("imageinfo") || page["imageinfo"].empty()) continue;
      const Json& info = page["imageinfo"][0];
      if (info.contains("url")) it->source_url = info["url"].get<std::string>();
      if (info.contains("thumburl")) it->thumb_url = info["thumburl"].get<std::string>();
      if (info.contains("size")) it->byte_size = info["size"].get<std::uint64_t>();
      if (info.contains("mime")) it->media_type = info["mime"].get<std::string>();
      if (info.contains("timestamp")) {
        const std::string ts = info["timestamp"].get<std::string>();
        if (ts.size() >= 10) it->upload_date = ts.substr(0, 10);
      }
    }
  }
  return out;
}

std::uint64_t WikiClient::fetch_usage_count(const std::string& file_name,
                                            const std::optional<std::string>& project) {
  QueryParams params{{"action", "query"},
                     {"prop", "globalusage"},
                     {"titles", "File:" + normalize_file_name(file_name)},
                     {"gulimit", "500"}};
  std::set<std::pair<std::string, std::string>> pages;
  for (;;) {
    const Json doc = get_json(endpoints_.commons_api, params);
    const Json& page = first_page(doc);
    if (page.value("missing", false) || page.value("invalid", false)) {
      throw Error(ErrorKind::not_found, "no file named \"" + file_name + "\"");
    }
    if (page.contains("globalusage")) {
      for (const auto& use : page["globalusage"]) {
        const std::string wiki = use.value("wiki", "");
        if (project && wiki.find(*project) == std::string::npos) continue;
        pages.emplace(wiki, use.value("title", ""));
      }
    }
    if (!doc.contains("continue")) break;
    merge_continue(params, doc["continue"]);
  }
  return pages.size();
}

LoadedImage WikiClient::fetch_image_bytes(ImageCandidate& candidate) {
  if (!candidate.source_url) {
    throw Error(ErrorKind::argument, "candidate " + candidate.id + " has no source URL");
  }
  auto download = [&](const std::string& url) {
    const HttpResponse r = transport_->get(url);
    if (r.status == 404) throw Error(ErrorKind::not_found, "404 for " + url);
    if (r.status != 200) {
      throw Error(r.status >= 500 ? ErrorKind::transient : ErrorKind::permanent,
                  "HTTP " + std::to_string(r.status) + " for " + url);
    }
    return r.body;
  };

  LoadedImage out;
  const bool known_oversize = candidate.byte_size && *candidate.byte_size > limits_.max_bytes;
  if (!known_oversize) out.bytes = download(*candidate.source_url);
  if (known_oversize || out.bytes.size() > limits_.max_bytes) {
    if (!candidate.thumb_url) {
      throw Error(ErrorKind::size, candidate.file_name + " exceeds the size cap and has no thumbnail");
    }
    out.bytes = download(*candidate.thumb_url);
    out.scaled = true;
    if (out.bytes.size() > limits_.max_bytes) {
      throw Error(ErrorKind::size, candidate.file_name + " exceeds the size cap even as a thumbnail");
    }
  }
  const auto media = sniff_media_type(out.bytes);
  if (!media) throw Error(ErrorKind::format, candidate.file_name + " is not a supported image format");
  candidate.content_hash = sha256_hex(out.bytes);
  candidate.media_type = *media;
  out.media_type = *media;
  out.candidate = candidate;
  return out;
}

std::vector<std::string> WikiClient::suggest_distractor_concepts(const Concept& target) {
  std::map<std::string, std::size_t> shared;
  for (const auto& link : target.links) shared.emplace(link, 0);
  for (const auto& cat : target.categories) {
    QueryParams params{{"action", "query"}, {"list", "categorymembers"},
                       {"cmtitle", "Category:" + cat}, {"cmtype", "page"},
                       {"cmnamespace", "0"}, {"cmlimit", "max"}};
    std::set<std::string> members;
    for (;;) {
      const Json doc = get_json(endpoints_.wiki_api, params);
      if (doc.contains("query") && doc["query"].contains("categorymembers")) {
        for (const auto& m : doc["query"]["categorymembers"]) members.insert(m.value("title", ""));
      }
      if (!doc.contains("continue")) break;
      merge_continue(params, doc["continue"]);
    }
    for (const auto& m : members) {
      if (!m.empty()) ++shared[m];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (const auto& [title, count] : shared) {
    const bool self = text::iequals(title, target.title) ||
                      std::any_of(target.aliases.begin(), target.aliases.end(),
                                  [&](const std::string& a) { return text::iequals(a, title); });
    if (!self) ranked.emplace_back(title, count);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (auto& [title, count] : ranked) out.push_back(std::move(title));
  return out;
}

}  // namespace imgquiz::wiki
