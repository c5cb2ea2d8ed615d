#pragma once

// Provider-agnostic chat interface used for vision-language models, judges
// and explanation refinement.
//
// HTTP wire format (docs/protocols.md):
//   POST <endpoint>
//   {"model": "...",
//    "messages": [{"role": "system"|"user",
//                  "content": [{"type": "text", "text": "..."},
//                              {"type": "image", "ref": "...", "base64": "..."}]}]}
//   -> {"text": "..."}   or   {"choices": [{"message": {"content": "..."}}]}

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "ricl/core/error.hpp"
#include "ricl/core/http.hpp"
#include "ricl/core/jsonl.hpp"

namespace ricl {

struct ContentPart {
  enum class Kind { text, image };
  Kind kind = Kind::text;
  std::string text;       // Kind::text
  std::string image_ref;  // Kind::image: path or URL as stored in the corpus
  std::optional<std::string> image_base64;

  static ContentPart of_text(std::string t) { return {Kind::text, std::move(t), {}, std::nullopt}; }
  static ContentPart of_image(std::string ref) { return {Kind::image, {}, std::move(ref), std::nullopt}; }

  friend bool operator==(const ContentPart&, const ContentPart&) = default;
};

struct ChatMessage {
  std::string role;
  std::vector<ContentPart> content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;

  static ChatRequest text(std::string model, std::string system, std::string user) {
    ChatRequest r;
    r.model = std::move(model);
    if (!system.empty()) r.messages.push_back({"system", {ContentPart::of_text(std::move(system))}});
    r.messages.push_back({"user", {ContentPart::of_text(std::move(user))}});
    return r;
  }

  // Concatenated text of all user parts; handy for scripted clients.
  std::string user_text() const {
    std::string s;
    for (const auto& m : messages)
      if (m.role == "user")
        for (const auto& p : m.content)
          if (p.kind == ContentPart::Kind::text) s += p.text;
    return s;
  }
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  // Returns the reply text; throws ProviderError on transport failure.
  virtual std::string chat(const ChatRequest& request) = 0;
};

inline Json to_json(const ChatRequest& r) {
  Json j;
  j["model"] = r.model;
  j["messages"] = Json::array();
  for (const auto& m : r.messages) {
    Json msg;
    msg["role"] = m.role;
    msg["content"] = Json::array();
    for (const auto& p : m.content) {
      Json part;
      if (p.kind == ContentPart::Kind::text) {
        part["type"] = "text";
        part["text"] = p.text;
      } else {
        part["type"] = "image";
        part["ref"] = p.image_ref;
        if (p.image_base64) part["base64"] = *p.image_base64;
      }
      msg["content"].push_back(std::move(part));
    }
    j["messages"].push_back(std::move(msg));
  }
  return j;
}

inline std::string parse_chat_reply(const std::string& body) {
  Json j;
  try {
    j = Json::parse(body);
  } catch (const std::exception& e) {
    throw ProviderError(std::string("chat reply is not JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("text") && j["text"].is_string()) return j["text"].get<std::string>();
  if (j.is_object() && j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
    const auto& c = j["choices"][0];
    if (c.contains("message") && c["message"].contains("content") && c["message"]["content"].is_string())
      return c["message"]["content"].get<std::string>();
  }
  throw ProviderError("chat reply has neither 'text' nor 'choices[0].message.content'");
}

class HttpChatClient : public ChatClient {
 public:
  HttpChatClient(std::string endpoint, std::string bearer, std::chrono::milliseconds timeout)
      : endpoint_(std::move(endpoint)), bearer_(std::move(bearer)), timeout_(timeout) {}

  std::string chat(const ChatRequest& request) override {
    return parse_chat_reply(post_json(endpoint_, dump_line(to_json(request)), bearer_, timeout_));
  }

 private:
  std::string endpoint_;
  std::string bearer_;
  std::chrono::milliseconds timeout_;
};

}  // namespace ricl
