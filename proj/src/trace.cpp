// SPDX-License-Identifier: Apache-2.0
#include "trace.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "error.hpp"
#include "event.hpp"

namespace kpiflow {

namespace {

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t lineno) : lineno_(lineno) {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) tokens_.push_back(line.substr(i, j - i));
      i = j;
    }
  }

  bool empty() const { return tokens_.empty(); }
  std::size_t remaining() const { return tokens_.size() - pos_; }

  std::string_view next(std::string_view what) {
    if (pos_ >= tokens_.size()) fail("missing " + std::string(what));
    return tokens_[pos_++];
  }

  std::optional<std::string_view> peek() const {
    if (pos_ >= tokens_.size()) return std::nullopt;
    return tokens_[pos_];
  }

  void expect(std::string_view word) {
    auto tok = next(word);
    if (tok != word) fail("expected '" + std::string(word) + "', got '" + std::string(tok) + "'");
  }

  template <typename T>
  T number(std::string_view tok, std::string_view what) {
    T value{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
      fail("invalid " + std::string(what) + " '" + std::string(tok) + "'");
    return value;
  }

  // Parses "key=<number>" and checks the key.
  template <typename T>
  T keyed(std::string_view key) {
    auto tok = next(key);
    return keyed_value<T>(tok, key);
  }

  template <typename T>
  T keyed_value(std::string_view tok, std::string_view key) {
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos || tok.substr(0, eq) != key)
      fail("expected " + std::string(key) + "=<value>, got '" + std::string(tok) + "'");
    return number<T>(tok.substr(eq + 1), key);
  }

  Endpoint endpoint(std::string_view tok) {
    auto ep = Endpoint::parse(tok);
    if (!ep) fail("invalid endpoint '" + std::string(tok) + "'");
    return *ep;
  }

  PathSpec path() {
    PathSpec p;
    p.src = endpoint(next("source endpoint"));
    expect("->");
    p.dst = endpoint(next("destination endpoint"));
    if (p.src.addr.family() != p.dst.addr.family()) fail("mixed address families");
    expect("via");
    p.iface = std::string(next("interface"));
    if (p.iface.size() > kMaxIfaceLength) fail("interface name longer than 15 characters");
    return p;
  }

  void done() {
    if (pos_ != tokens_.size())
      fail("unexpected trailing token '" + std::string(tokens_[pos_]) + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ScriptError, "line " + std::to_string(lineno_) + ": " + msg);
  }

 private:
  std::vector<std::string_view> tokens_;
  std::size_t pos_ = 0;
  std::size_t lineno_;
};

DirectiveBody parse_body(std::string_view verb, LineParser& p) {
  using namespace directive;
  if (verb == "open") {
    Open d;
    d.path = p.path();
    if (auto t = p.peek(); t && *t == "mptcp") {
      p.next("mptcp");
      d.mptcp = true;
    }
    return d;
  }
  if (verb == "accepted") {
    Accepted d;
    if (p.remaining() > 0) d.path = p.path();
    return d;
  }
  if (verb == "connect_error") return ConnectError{p.number<int>(p.next("errno"), "errno")};
  if (verb == "established") {
    Established d;
    d.rtt_us = p.keyed<std::uint64_t>("rtt");
    if (p.remaining() > 0) d.meta_uid = p.keyed<std::uint64_t>("meta");
    return d;
  }
  if (verb == "send") return Send{p.number<std::uint64_t>(p.next("length"), "length")};
  if (verb == "recv") {
    Recv d;
    d.seq = p.keyed<std::uint32_t>("seq");
    d.len = p.keyed<std::uint64_t>("len");
    if (p.remaining() > 0) d.dss = p.keyed<std::uint64_t>("dss");
    return d;
  }
  if (verb == "rtt_sample") return RttSample{p.number<std::uint64_t>(p.next("sample"), "sample")};
  if (verb == "rto") {
    Rto d;
    if (p.remaining() > 0) d.retrans = p.keyed<std::uint64_t>("retrans");
    return d;
  }
  if (verb == "recovered") return Recovered{};
  if (verb == "corrupt") return Corrupt{p.number<std::uint64_t>(p.next("length"), "length")};
  if (verb == "close") {
    auto how = p.next("close kind");
    if (how == "fin") return Close{CloseKind::Fin};
    if (how == "rst") return Close{CloseKind::Rst};
    if (how == "drop") return Close{CloseKind::Drop};
    p.fail("close expects fin, rst or drop");
  }
  if (verb == "join") {
    Join d;
    d.subflow_uid = p.keyed<std::uint64_t>("subflow");
    if (p.remaining() > 0) d.path = p.path();
    return d;
  }
  if (verb == "reinject") {
    Reinject d;
    d.bytes = p.number<std::uint64_t>(p.next("bytes"), "bytes");
    d.from_uid = p.keyed<std::uint64_t>("from");
    return d;
  }
  if (verb == "meta_rto") return MetaRto{};
  p.fail("unknown directive '" + std::string(verb) + "'");
}

void check_lengths(const DirectiveBody& body, const LineParser& p) {
  constexpr std::uint64_t kMaxSegment = 1ull << 30;
  if (const auto* r = std::get_if<directive::Recv>(&body)) {
    if (r->len == 0 || r->len > kMaxSegment) p.fail("recv length out of range");
  } else if (const auto* s = std::get_if<directive::Send>(&body)) {
    if (s->len == 0) p.fail("send length must be positive");
  } else if (const auto* c = std::get_if<directive::Corrupt>(&body)) {
    if (c->len == 0) p.fail("corrupt length must be positive");
  } else if (const auto* r2 = std::get_if<directive::RttSample>(&body)) {
    if (r2->us == 0) p.fail("rtt sample must be positive");
  } else if (const auto* e = std::get_if<directive::Established>(&body)) {
    if (e->rtt_us == 0) p.fail("rtt must be positive");
  } else if (const auto* ri = std::get_if<directive::Reinject>(&body)) {
    if (ri->bytes == 0) p.fail("reinjected bytes must be positive");
  }
}

}  // namespace

std::uint64_t TraceScript::max_uid() const {
  std::uint64_t m = 0;
  for (const auto& d : directives) {
    m = std::max(m, d.uid);
    if (const auto* e = std::get_if<directive::Established>(&d.body); e && e->meta_uid)
      m = std::max(m, *e->meta_uid);
    if (const auto* j = std::get_if<directive::Join>(&d.body)) m = std::max(m, j->subflow_uid);
    if (const auto* r = std::get_if<directive::Reinject>(&d.body)) m = std::max(m, r->from_uid);
  }
  return m;
}

TraceScript parse_trace(std::string_view text) {
  TraceScript script;
  std::size_t lineno = 0;
  std::size_t start = 0;
  Timestamp last = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    LineParser p(line, lineno);
    if (p.empty()) {
      if (end == text.size()) break;
      continue;
    }
    Directive d;
    d.line = lineno;
    auto stamp = p.next("timestamp");
    if (stamp.size() < 2 || stamp.front() != '@') p.fail("directive must start with @<time_ns>");
    d.at = p.number<Timestamp>(stamp.substr(1), "timestamp");
    if (d.at < last) p.fail("timestamp goes backwards");
    last = d.at;
    p.expect("conn");
    d.uid = p.number<std::uint64_t>(p.next("connection uid"), "connection uid");
    auto verb = p.next("directive");
    d.body = parse_body(verb, p);
    p.done();
    check_lengths(d.body, p);
    script.directives.push_back(std::move(d));
    if (end == text.size()) break;
  }
  return script;
}

TraceScript load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open trace " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_trace(ss.str());
}

}  // namespace kpiflow
