#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pambench/trial.hpp"

namespace pambench {

enum class EvalMode : std::uint8_t { base, pc, sc, sc_i };
std::string_view to_string(EvalMode m) noexcept;  // "Base", "PC", "SC", "SC_I"
std::optional<EvalMode> parse_eval_mode(std::string_view s) noexcept;
inline bool needs_self_captions(EvalMode m) noexcept { return m == EvalMode::sc || m == EvalMode::sc_i; }

struct Part {
  enum class Type : std::uint8_t { text, image };
  Type type = Type::text;
  std::string text;        // text parts
  std::string media_type;  // image parts, e.g. "image/png"
  std::string data;        // image parts: base64, empty when not embedded
  std::string source;      // image parts: file the image came from

  static Part make_text(std::string t) { return {Type::text, std::move(t), {}, {}, {}}; }
  friend bool operator==(const Part&, const Part&) = default;
};

struct Turn {
  std::string role;
  std::vector<Part> parts;
  friend bool operator==(const Turn&, const Turn&) = default;
};

struct MessageSeq {
  std::vector<Turn> turns;
  friend bool operator==(const MessageSeq&, const MessageSeq&) = default;
};

struct PromptOptions {
  bool chain_of_thought = true;  // off for fine-tuning records
  bool embed_images = true;      // base64 image bytes into image parts
};

// Intro paragraph; `images` picks "frame images" over "frames described by captions".
std::string prompt_intro(bool images);
std::string prompt_question(const AnswerSet& possible, bool chain_of_thought);

// Throws MissingCaptions, CaptionCountMismatch, EmptyCaption.
MessageSeq build_prompt(const LoadedTrial& trial, EvalMode mode,
                        const std::optional<std::vector<std::string>>& self_captions = std::nullopt,
                        const PromptOptions& opts = {});

// Single-image caption request for one frame.
MessageSeq caption_request(const std::filesystem::path& frame);

// Concatenated text of the user turn with each image replaced by `placeholder`.
std::string flatten_user_text(const MessageSeq& m, std::string_view placeholder = "<image>");

}  // namespace pambench
