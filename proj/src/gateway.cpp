#include "emocue/gateway.hpp"

#include <atomic>
#include <cctype>
#include <cstdlib>
#include <regex>
#include <thread>

#include <httplib.h>

#include "emocue/io.hpp"

namespace emocue {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string_view to_string(BackendKind kind) {
  return kind == BackendKind::Mock ? "mock" : "http";
}

void BackendConfig::validate() const {
  if (!(timeout_s > 0.0)) throw Error(Errc::InvalidArgument, "timeout_s must be > 0");
  if (max_retries < 0) throw Error(Errc::InvalidArgument, "max_retries must be >= 0");
  if (max_concurrent < 1) throw Error(Errc::InvalidArgument, "max_concurrent must be >= 1");
  if (max_tokens < 1) throw Error(Errc::InvalidArgument, "max_tokens must be >= 1");
  if (backoff_ms < 0) throw Error(Errc::InvalidArgument, "backoff_ms must be >= 0");
  if (backend == BackendKind::Http && endpoint_url.empty()) {
    throw Error(Errc::InvalidArgument, "http backend needs endpoint_url");
  }
}

ojson to_json(const BackendConfig& c) {
  ojson o;
  o["backend"] = to_string(c.backend);
  o["endpoint_url"] = c.endpoint_url;
  o["model_id"] = c.model_id;
  o["api_key_env"] = c.api_key_env;
  o["timeout_s"] = c.timeout_s;
  o["max_retries"] = c.max_retries;
  o["max_concurrent"] = c.max_concurrent;
  o["temperature"] = c.temperature;
  o["max_tokens"] = c.max_tokens;
  o["backoff_ms"] = c.backoff_ms;
  o["fixture_id"] = c.fixture_id;
  o["mock_fixture"] = c.mock_fixture;
  return o;
}

BackendConfig backend_config_from_json(const json& j) {
  BackendConfig c;
  if (!j.is_object()) throw Error(Errc::ParseError, "backend config must be an object");
  try {
    if (j.contains("backend")) {
      const std::string b = j["backend"].get<std::string>();
      if (b == "mock") {
        c.backend = BackendKind::Mock;
      } else if (b == "http") {
        c.backend = BackendKind::Http;
      } else {
        throw Error(Errc::InvalidArgument, "unknown backend '" + b + "'");
      }
    }
    const auto get = [&](const char* key, auto& field) {
      if (j.contains(key) && !j[key].is_null()) {
        field = j[key].get<std::decay_t<decltype(field)>>();
      }
    };
    get("endpoint_url", c.endpoint_url);
    get("model_id", c.model_id);
    get("api_key_env", c.api_key_env);
    get("timeout_s", c.timeout_s);
    get("max_retries", c.max_retries);
    get("max_concurrent", c.max_concurrent);
    get("temperature", c.temperature);
    get("max_tokens", c.max_tokens);
    get("backoff_ms", c.backoff_ms);
    get("fixture_id", c.fixture_id);
    get("mock_fixture", c.mock_fixture);
  } catch (const json::exception& e) {
    throw Error(Errc::ParseError, std::string("backend config: ") + e.what());
  }
  c.validate();
  return c;
}

BackendConfig load_backend_config(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ParseError, e.what(), io::line_of(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  // the pipeline config nests the backend section
  if (j.contains("backend") && j["backend"].is_object()) return backend_config_from_json(j["backend"]);
  return backend_config_from_json(j);
}

Gateway::Gateway(BackendConfig config)
    : config_(std::move(config)),
      slots_(std::make_unique<std::counting_semaphore<>>(
          (config_.validate(), config_.max_concurrent))),
      sleep_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  if (config_.backend == BackendKind::Mock && !config_.mock_fixture.empty()) {
    const std::string text = io::read_file(config_.mock_fixture);
    try {
      const json j = json::parse(text);
      for (const auto& [id, completion] : j.items()) {
        fixture_[id] = completion.get<std::string>();
      }
    } catch (const json::exception& e) {
      throw Error(Errc::ParseError, "mock fixture: " + std::string(e.what()));
    }
  }
}

Gateway::~Gateway() = default;

void Gateway::set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) {
  sleep_ = std::move(sleeper);
}

RawCompletion Gateway::complete(const PromptInstance& prompt) {
  slots_->acquire();
  struct Release {
    std::counting_semaphore<>* s;
    ~Release() { s->release(); }
  } release{slots_.get()};
  const auto start = std::chrono::steady_clock::now();
  RawCompletion out = config_.backend == BackendKind::Mock ? complete_mock(prompt)
                                                           : complete_http(prompt);
  out.latency_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return out;
}

namespace {

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

const std::vector<std::string_view> kSeriousCues = {
    "kill myself", "want to die", "end it all", "suicide", "suicidal",
    "cutting",     "cut myself",  "hurt myself", "hurting myself", "self-harm",
    "self harm",   "blade",       "overdose",   "scars",          "relapse"};

const std::vector<std::string_view> kCasualMarkers = {
    "lol", "lmao", "haha", "jk", "joking", "literally", "kidding"};

bool contains_word(const std::string& lower, std::string_view word) {
  std::size_t pos = lower.find(word);
  while (pos != std::string::npos) {
    const bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(lower[pos - 1]));
    const std::size_t end = pos + word.size();
    const bool right =
        end >= lower.size() || !std::isalnum(static_cast<unsigned char>(lower[end]));
    if (left && right) return true;
    pos = lower.find(word, pos + 1);
  }
  return false;
}

// Cue phrase plus up to two following words, cut at sentence punctuation.
std::vector<std::string> cue_spans(const std::string& text) {
  const std::string lower = ascii_lower(text);
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::string_view cue : kSeriousCues) {
    const std::size_t pos = lower.find(cue);
    if (pos == std::string::npos) continue;
    std::size_t end = pos + cue.size();
    int words = 0;
    while (end < text.size() && words < 2) {
      std::size_t next = end;
      while (next < text.size() && text[next] == ' ') ++next;
      if (next == end || next >= text.size()) break;
      std::size_t stop = next;
      while (stop < text.size() && text[stop] != ' ' &&
             std::string_view(".,!?;:\n\"").find(text[stop]) == std::string_view::npos) {
        ++stop;
      }
      if (stop == next) break;
      end = stop;
      ++words;
    }
    const bool overlaps = std::any_of(ranges.begin(), ranges.end(), [&](const auto& r) {
      return pos < r.second && r.first < end;
    });
    if (!overlaps) ranges.emplace_back(pos, end);
  }
  std::sort(ranges.begin(), ranges.end());
  std::vector<std::string> out;
  for (const auto& [b, e] : ranges) {
    if (out.size() == 3) break;
    out.push_back(text.substr(b, e - b));
  }
  return out;
}

Prediction mock_classify(const PromptInstance& prompt) {
  const std::string text = prompt_post_text(prompt);
  const std::string lower = ascii_lower(text);
  std::size_t serious = 0;
  for (std::string_view cue : kSeriousCues) serious += lower.find(cue) != std::string::npos;
  std::size_t casual = 0;
  for (std::string_view m : kCasualMarkers) casual += contains_word(lower, m);
  std::size_t high_si = 0;
  if (prompt.input.contains("emojis")) {
    for (const auto& e : prompt.input["emojis"]) {
      high_si += e.value("serious intent chance", "") == "High";
    }
  }

  Prediction p;
  p.label = serious > 0 && (casual == 0 || high_si > 0) ? Label::SelfHarm
                                                         : Label::NonSelfHarm;
  auto spans = cue_spans(text);
  (p.label == Label::SelfHarm ? p.si_spans : p.cm_spans) = std::move(spans);
  return p;
}

std::string mock_rationale(const Prediction& p, const ojson& emojis) {
  std::string out = "The post is classified as " + std::string(to_string(p.label)) + ".";
  for (const auto& s : p.si_spans) out += " The phrase \"" + s + "\" signals serious intent.";
  for (const auto& s : p.cm_spans) out += " The phrase \"" + s + "\" reads as a casual mention.";
  if (p.si_spans.empty() && p.cm_spans.empty()) {
    out += " No self-harm language was found.";
  }
  if (emojis.is_array()) {
    for (const auto& e : emojis) {
      const std::string meaning = e.value("contextual_meaning", "");
      if (meaning.empty()) continue;
      out += " The emoji " + e.value("emoji", "") + " adds context: " + meaning;
      if (out.back() != '.') out += '.';
    }
  }
  return out;
}

}  // namespace

RawCompletion Gateway::complete_mock(const PromptInstance& prompt) const {
  RawCompletion out;
  const std::string digest =
      io::sha256_hex(render_prompt(prompt) + '\0' + config_.fixture_id);
  out.backend_meta["backend"] = "mock";
  out.backend_meta["prompt_sha256"] = digest;
  if (auto it = fixture_.find(prompt.id); it != fixture_.end()) {
    out.text = it->second;
    out.backend_meta["source"] = "fixture";
    return out;
  }
  out.backend_meta["source"] = "rules";

  switch (prompt.mode) {
    case PromptMode::FineTune:
      out.text = serialize_prediction(mock_classify(prompt));
      break;
    case PromptMode::Rationale: {
      Prediction p;
      if (auto label = parse_label(prompt.input.value("classification", ""))) p.label = *label;
      p.cm_spans = prompt.input.value("casual_mention_spans", std::vector<std::string>{});
      p.si_spans = prompt.input.value("serious_intent_spans", std::vector<std::string>{});
      out.text = mock_rationale(p, prompt.input.value("emojis", ojson::array()));
      break;
    }
    case PromptMode::ZeroShot:
    case PromptMode::FewShot: {
      Prediction p = mock_classify(prompt);
      p.rationale = mock_rationale(p, ojson::array());
      // the low bit of the digest picks the output format
      const int nibble = std::stoi(digest.substr(digest.size() - 1), nullptr, 16);
      if (nibble % 2 == 0) {
        out.text = "Classification: " + std::string(prompt_label(p.label)) +
                   "\nRationale: " + p.rationale;
      } else {
        out.text = "```json\n" + serialize_prediction(p) + "\n```";
      }
      break;
    }
    case PromptMode::Synthetic:
      out.text = prompt.input.value("label", "") == "self-harm"
                     ? "Some nights the urge to hurt myself comes back and I sit with it "
                       "until it passes."
                     : "My code compiled on the first try, guess I'll go jump off a "
                       "bridge from shock lol";
      break;
  }
  return out;
}

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(url, m, re)) {
    throw Error(Errc::InvalidArgument, "endpoint_url '" + url + "' is not an http(s) URL");
  }
  return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

}  // namespace

RawCompletion Gateway::complete_http(const PromptInstance& prompt) {
  const Endpoint ep = split_url(config_.endpoint_url);
  ojson body;
  body["model"] = config_.model_id;
  body["messages"] = ojson::array({{{"role", "user"}, {"content", render_prompt(prompt)}}});
  body["temperature"] = config_.temperature;
  body["max_tokens"] = config_.max_tokens;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  const auto seconds = static_cast<time_t>(config_.timeout_s);
  const auto micros =
      static_cast<time_t>((config_.timeout_s - static_cast<double>(seconds)) * 1e6);

  std::string last_cause;
  bool all_timeouts = true;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      sleep_(std::chrono::milliseconds(static_cast<long long>(config_.backoff_ms)
                                       << std::min(attempt - 1, 20)));
    }
    httplib::Client client(ep.origin);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);
    auto res = client.Post(ep.path, headers, payload, "application/json");
    if (!res) {
      const httplib::Error err = res.error();
      const bool timeout =
          err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
      all_timeouts = all_timeouts && timeout;
      last_cause = "transport error: " + httplib::to_string(err);
      continue;
    }
    const int status = res->status;
    if (status >= 500 || status == 429) {
      all_timeouts = false;
      last_cause = "HTTP " + std::to_string(status);
      continue;
    }
    if (status < 200 || status >= 300) {
      throw Error(Errc::HttpError, "HTTP " + std::to_string(status) + ": " +
                                       res->body.substr(0, 200));
    }
    RawCompletion out;
    try {
      const json j = json::parse(res->body);
      const json& choice = j.at("choices").at(0);
      if (choice.contains("message")) {
        out.text = choice["message"].value("content", "");
      } else {
        out.text = choice.value("text", "");
      }
      if (j.contains("model")) out.backend_meta["model"] = j["model"];
    } catch (const json::exception& e) {
      throw Error(Errc::HttpError, "HTTP " + std::to_string(status) +
                                       ": malformed completion body (" + e.what() + ")");
    }
    out.backend_meta["backend"] = "http";
    out.backend_meta["status"] = status;
    out.backend_meta["attempts"] = attempt + 1;
    return out;
  }
  const std::string attempts = std::to_string(config_.max_retries + 1) + " attempt(s)";
  if (all_timeouts) throw Error(Errc::Timeout, "timed out after " + attempts);
  throw Error(Errc::RetriesExhausted, attempts + " failed; last: " + last_cause);
}

RawCompletion complete(const PromptInstance& prompt, const BackendConfig& config) {
  Gateway gateway(config);
  return gateway.complete(prompt);
}

std::vector<CompletionOutcome> complete_all(Gateway& gateway,
                                            const std::vector<PromptInstance>& prompts) {
  std::vector<CompletionOutcome> out(prompts.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < prompts.size(); i = next++) {
      try {
        out[i].completion = gateway.complete(prompts[i]);
      } catch (const Error& e) {
        out[i].error = e.code();
        out[i].error_message = e.what();
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(
      static_cast<std::size_t>(gateway.config().max_concurrent), prompts.size());
  std::vector<std::thread> threads;
  for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  return out;
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> string_list(const json& obj, const char* key) {
  std::vector<std::string> out;
  if (!obj.contains(key) || obj[key].is_null()) return out;
  const json& v = obj[key];
  if (v.is_string()) {
    out.push_back(v.get<std::string>());
    return out;
  }
  if (!v.is_array()) throw std::invalid_argument(std::string(key) + " is not a list");
  for (const json& s : v) {
    if (s.is_string()) {
      out.push_back(s.get<std::string>());
    } else if (s.is_object() && s.contains("text") && s["text"].is_string()) {
      out.push_back(s["text"].get<std::string>());
    } else {
      throw std::invalid_argument(std::string(key) + " holds a non-string");
    }
  }
  return out;
}

std::optional<Prediction> from_object(const json& obj) {
  if (!obj.is_object()) return std::nullopt;
  const char* key = obj.contains("classification") ? "classification"
                    : obj.contains("label")        ? "label"
                                                   : nullptr;
  if (key == nullptr || !obj[key].is_string()) return std::nullopt;
  const auto label = parse_label(obj[key].get<std::string>());
  if (!label) return std::nullopt;
  Prediction p;
  p.label = *label;
  try {
    p.cm_spans = string_list(obj, "casual_mention_spans");
    p.si_spans = string_list(obj, "serious_intent_spans");
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  if (obj.contains("rationale") && obj["rationale"].is_string()) {
    p.rationale = obj["rationale"].get<std::string>();
  }
  return p;
}

// Start of each balanced {...} region, skipping braces inside strings.
std::optional<Prediction> first_embedded_object(const std::string& text) {
  for (std::size_t start = text.find('{'); start != std::string::npos;
       start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escape = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escape) {
          escape = false;
        } else if (c == '\\') {
          escape = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}' && --depth == 0) {
        const json obj = json::parse(text.substr(start, i - start + 1), nullptr, false);
        if (!obj.is_discarded()) {
          if (auto p = from_object(obj)) return p;
        }
        break;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

Prediction parse_prediction(std::string_view raw_text) {
  const std::string text = trim(raw_text);
  if (text.empty()) throw Error(Errc::Unparseable, "empty completion");

  const json whole = json::parse(text, nullptr, false);
  if (!whole.is_discarded()) {
    if (auto p = from_object(whole)) {
      p->route = ParseRoute::Strict;
      return *p;
    }
  }
  if (auto p = first_embedded_object(text)) {
    p->route = ParseRoute::Recovered;
    return *p;
  }

  static const std::regex label_re(
      R"(classification\**\s*:\s*\**\s*\[?\s*(non[\s_-]*self[\s_-]*harm|self[\s_-]*harm))",
      std::regex::icase);
  std::smatch m;
  if (std::regex_search(text, m, label_re)) {
    Prediction p;
    p.route = ParseRoute::Fallback;
    p.label = ascii_lower(m[1].str()).rfind("non", 0) == 0 ? Label::NonSelfHarm
                                                            : Label::SelfHarm;
    static const std::regex rationale_re(R"(rationale\**\s*:\s*\**)", std::regex::icase);
    const std::string rest = m.suffix().str();
    std::smatch r;
    if (std::regex_search(rest, r, rationale_re)) {
      p.rationale = trim(r.suffix().str());
    } else {
      const std::string before = text.substr(0, static_cast<std::size_t>(m.position(0)));
      p.rationale = trim(trim(before) + "\n" + trim(rest));
    }
    return p;
  }
  throw Error(Errc::Unparseable,
              "no classification found in completion: " + text.substr(0, 80));
}

Prediction parse_prediction(const RawCompletion& raw) { return parse_prediction(raw.text); }

}  // namespace emocue
