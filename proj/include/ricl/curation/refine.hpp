#pragma once

#include <string>

#include "ricl/core/prompts.hpp"
#include "ricl/core/record.hpp"
#include "ricl/core/template.hpp"
#include "ricl/llm/chat_client.hpp"

namespace ricl {

inline std::string render_refinement_prompt(std::string_view context, std::string_view outcome,
                                            std::string_view human_explanation) {
  std::string p(prompts::kRefineExplanationPrompt);
  p = replace_all(p, "{INPUT CONTEXT HERE}", context);
  p = replace_all(p, "{INPUT OUTCOME HERE}", outcome);
  p = replace_all(p, "{INPUT EXPLANATION HERE}", human_explanation);
  return p;
}

// Sends the refinement prompt and stores the reply as a human_llm
// explanation of `scenario_id`.
inline Explanation refine_explanation(const std::string& scenario_id, std::string_view context,
                                      std::string_view outcome, std::string_view human_explanation,
                                      ChatClient& llm, const std::string& model = {}) {
  if (is_blank(context) || is_blank(outcome) || is_blank(human_explanation))
    throw PreconditionError("refine_explanation needs non-empty context, outcome and explanation");
  const auto reply =
      llm.chat(ChatRequest::text(model, "", render_refinement_prompt(context, outcome, human_explanation)));
  if (is_blank(reply)) throw ProviderError("refinement reply is empty");
  return make_explanation(scenario_id, ExplanationSource::human_llm, reply);
}

}  // namespace ricl
