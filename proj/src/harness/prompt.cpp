#include "pambench/prompt.hpp"

#include "pambench/errors.hpp"
#include "pambench/language.hpp"
#include "pambench/util.hpp"

namespace pambench {
namespace {

constexpr std::string_view kIntroHead = "In this task, we will show you ";
constexpr std::string_view kIntroTail =
    ". Each frame will either be blank (delay frame) or contain one or more 3D objects. The objects will always be "
    "from one of eight categories: benches, boats, cars, chairs, couches, lighting, planes, and tables. For each "
    "category, there are eight unique objects that could be used in the task. Any object sampled will be displayed as "
    "an image taken from a random viewing angle. The objects will be placed in one of four locations: top left, top "
    "right, bottom left, and bottom right. If there are multiple objects on a single frame, only one of them would be "
    "specified in the task instruction by either its location or its category. A written instruction will be "
    "provided. Your goal is to follow the instructions and answer the question contained in the instructions. "
    "Answers will always be one of the following: true, false, bottom right, bottom left, top left, top right, "
    "benches, boats, cars, chairs, couches, lighting, planes, tables.";

std::string task_header(const Trial& t, bool images) {
  return prompt_intro(images) + "\n\nPlease solve the following task:\nTask instruction: " + t.instruction;
}

Part image_part(const std::filesystem::path& p, bool embed) {
  Part part;
  part.type = Part::Type::image;
  part.media_type = "image/png";
  part.source = p.generic_string();
  if (embed) part.data = base64_encode(read_file_bytes(p));
  return part;
}

std::vector<std::string> caption_bodies(const LoadedTrial& lt, EvalMode mode,
                                        const std::optional<std::vector<std::string>>& self_captions) {
  const std::size_t n = lt.frames.size();
  std::vector<std::string> bodies;
  if (mode == EvalMode::pc) {
    if (lt.trial.captions.empty()) {
      throw MissingCaptions("trial " + lt.trial.task + "/" + std::to_string(lt.trial.trial_id) +
                            " has no ground-truth captions");
    }
    for (const auto& c : lt.trial.captions) bodies.push_back(strip_caption_prefix(c));
  } else {
    if (!self_captions) throw MissingCaptions(std::string(to_string(mode)) + " mode needs self-captions");
    for (const auto& c : *self_captions) bodies.push_back(strip_caption_prefix(c));
  }
  if (bodies.size() != n) {
    throw CaptionCountMismatch("expected " + std::to_string(n) + " captions, got " + std::to_string(bodies.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (trim(bodies[i]).empty()) throw EmptyCaption("caption for frame " + std::to_string(i + 1) + " is empty");
  }
  return bodies;
}

}  // namespace

std::string_view to_string(EvalMode m) noexcept {
  switch (m) {
    case EvalMode::base: return "Base";
    case EvalMode::pc: return "PC";
    case EvalMode::sc: return "SC";
    case EvalMode::sc_i: return "SC_I";
  }
  return "?";
}

std::optional<EvalMode> parse_eval_mode(std::string_view s) noexcept {
  const std::string l = to_lower(s);
  if (l == "base") return EvalMode::base;
  if (l == "pc") return EvalMode::pc;
  if (l == "sc") return EvalMode::sc;
  if (l == "sc_i" || l == "sc-i" || l == "sci") return EvalMode::sc_i;
  return std::nullopt;
}

std::string prompt_intro(bool images) {
  return std::string(kIntroHead) + (images ? "a series of frame images" : "a series of frames described by captions") +
         std::string(kIntroTail);
}

std::string prompt_question(const AnswerSet& possible, bool chain_of_thought) {
  std::string q = "What is the correct answer to this task? " + format_answer_list(possible) + ". ";
  if (chain_of_thought) {
    q += "Think step-by-step, analyze each frame and provide your answer here:\nAnswers:\nLet's think step by step.";
  } else {
    q += "Provide your answer here: ";
  }
  return q;
}

MessageSeq build_prompt(const LoadedTrial& lt, EvalMode mode,
                        const std::optional<std::vector<std::string>>& self_captions, const PromptOptions& opts) {
  const Trial& t = lt.trial;
  const std::string question = "\n\n" + prompt_question(t.possible_answers, opts.chain_of_thought);
  Turn user{"user", {}};
  switch (mode) {
    case EvalMode::base:
      user.parts.push_back(Part::make_text(task_header(t, true) + "\n\nHere are the corresponding frames: "));
      for (const auto& f : lt.frames) user.parts.push_back(image_part(f, opts.embed_images));
      user.parts.push_back(Part::make_text(question));
      break;
    case EvalMode::pc:
    case EvalMode::sc: {
      const auto bodies = caption_bodies(lt, mode, self_captions);
      std::string lines;
      for (std::size_t i = 0; i < bodies.size(); ++i) {
        if (i) lines += "\n";
        lines += "Frame " + std::to_string(i + 1) + ": " + bodies[i];
      }
      user.parts.push_back(Part::make_text(task_header(t, false) + "\n\nHere are the frame captions:\n"));
      user.parts.push_back(Part::make_text(lines + question));
      break;
    }
    case EvalMode::sc_i: {
      const auto bodies = caption_bodies(lt, mode, self_captions);
      user.parts.push_back(Part::make_text(task_header(t, true) + "\n\nHere are the corresponding frames: "));
      for (std::size_t i = 0; i < bodies.size(); ++i) {
        user.parts.push_back(image_part(lt.frames[i], opts.embed_images));
        user.parts.push_back(Part::make_text("Frame " + std::to_string(i + 1) + ": " + bodies[i]));
      }
      user.parts.push_back(Part::make_text(question));
      break;
    }
  }
  return MessageSeq{{std::move(user)}};
}

MessageSeq caption_request(const std::filesystem::path& frame) {
  Turn user{"user", {Part::make_text(std::string(kSelfCaptionPrompt)), image_part(frame, true)}};
  return MessageSeq{{std::move(user)}};
}

std::string flatten_user_text(const MessageSeq& m, std::string_view placeholder) {
  std::string out;
  for (const Turn& t : m.turns) {
    if (t.role != "user") continue;
    for (const Part& p : t.parts) out += p.type == Part::Type::text ? p.text : std::string(placeholder);
  }
  return out;
}

}  // namespace pambench
