#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pambench/task.hpp"

namespace pambench {

inline constexpr std::string_view kGrammarVersion = "1";

// Timeline clauses then the query, comma separated, ending in "?".
// Throws InvalidGraph, MissingFrame.
std::string synth_instruction(const TaskGraph& graph, const Scene& scene);

// "A chairs located at the top left" (joined by "; "), or "delay frame".
std::string caption_body(const Frame& frame);

// One "Frame {i}: ..." caption per frame, 1-based.
std::vector<std::string> synth_ground_truth_captions(const Scene& scene);

// Strips a leading "Frame {i}: " if present.
std::string strip_caption_prefix(std::string_view caption);

inline std::string answer_to_string(const Answer& a) { return to_string(a); }

// "(bottom right, bottom left, top left, top right)"
std::string format_answer_list(const AnswerSet& set);

enum class CaptionStyle { ground_truth, self_caption_request };

// Per-image captioning request text.
extern const std::string_view kSelfCaptionPrompt;

}  // namespace pambench
