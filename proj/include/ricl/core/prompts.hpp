#pragma once

// Prompt templates. Each constant is byte-identical to the file of the same
// name under prompts/ (checked by test_curation).

#include <string_view>

namespace ricl::prompts {

// prompts/generate_vis.txt
inline constexpr std::string_view kGenerateVisPrompt = R"PROMPT(You are tasked with generating a dataset where each entry consists of the following components:

Caption: A short description of an object or scene in an image.
Rationale: A plausible reasoning explaining why the object or scene might lead to an issue.
Situation: A potential outcome based on the caption and rationale, without explicitly mentioning the cause.

Guidelines for Output:
- The Situation must describe the outcome without directly linking it to the rationale.
- Use clear and concise language.
- Format the output for each entry as follows, enclosed in curly brackets {} to make it easy to parse:

{Caption: "<caption text>"} {Rationale: "<rationale text>"} {Situation: "<situation text>"}

Examples:

Example 1:
{Caption: "red liquid in steak packaging"} {Rationale: "The red liquid found in steak packaging is often mistaken for blood. It is actually a mixture of water and a protein called myoglobin that naturally occurs in muscle tissue. This liquid is perfectly normal and does not indicate that the meat is unsafe."} {Situation: "Person cooked and enjoyed the steak without health issues."}

Example 2:
{Caption: "settling of liquid in yogurt"} {Rationale: "When you open a container of yogurt, you might observe a layer of clear liquid on top, which some may believe signifies spoilage. This liquid is simply whey separating from the yogurt solids, a natural process that doesn't affect the yogurt's quality. Stirring the whey back into the yogurt will restore its creamy texture."} {Situation: "Person enjoyed the yogurt as part of their breakfast."}

Example 3:
{Caption: "green patina on copper cookware"} {Rationale: "Copper cookware may develop a greenish layer called patina. Some people mistake this for harmful corrosion, but patina is natural and can actually protect the copper from further oxidation. The cookware is still usable after proper cleaning."} {Situation: "Person used copper cookware to prepare a delicious meal."}

Example 4:
{Caption: "yellowing leaves on indoor plants"} {Rationale: "Indoor plant leaves may start to turn yellow as a natural part of their growth cycle or due to minor stress factors like overwatering. A few yellow leaves do not necessarily indicate that the plant is dying."} {Situation: "Person continued to care for the plant, and it grew healthy new leaves over time."}

Example 5:
{Caption: "skin peeling after a sunburn"} {Rationale: "After a sunburn, the skin may start to peel. This peeling is part of the natural healing process where the body sheds damaged skin cells. While it might look alarming, it is a normal response to skin damage from ultraviolet light exposure and not a cause for concern."} {Situation: "Person applied moisturizer and supported the skin's healing process comfortably."}

Now your task:
Based on the provided Caption and Rationale, generate the corresponding Situation following the structure and format above.

{Caption: "{INPUT CAPTION HERE}"}{Rationale: "{INPUT RATIONALE HERE}"}
)PROMPT";

// prompts/generate_lang.txt
inline constexpr std::string_view kGenerateLangPrompt = R"PROMPT(You are tasked with generating a dataset where each entry consists of the following components:

Caption: A short description of an object or scene in an image.
Rationale: A plausible reasoning explaining why the object or scene might lead to an issue.
Situation: A potential outcome based on the caption and rationale, without explicitly mentioning the cause.

Guidelines for Output:
- The Situation must describe the outcome without directly linking it to the rationale.
- Use clear and concise language.
- Format the output for each entry as follows, enclosed in curly brackets {} to make it easy to parse:

{Caption: "<caption text>"} {Rationale: "<rationale text>"} {Situation: "<situation text>"}

Examples:

Example 1:
{Caption: "A coffee maker ready to brew the perfect cup."} {Rationale: "While the coffee maker looks functional, its internals are corroded, leading to potential contamination of the brewed coffee."} {Situation: "A customer experienced stomach discomfort after drinking coffee brewed from the machine."}

Example 2:
{Caption: "A sleek sports car parked in the driveway."} {Rationale: "The sports car is problematic because it has an undiagnosed mechanical issue, making it dangerous to drive."} {Situation: "The driver encountered a sudden loss of control while driving, leading to a minor collision."}

Example 3:
{Caption: "A colorful toy ready for playtime."} {Rationale: "This is problematic because the toy is a recall item due to safety hazards that could pose a choking risk."} {Situation: "A child briefly choked while playing with the toy, requiring quick intervention."}

Example 4:
{Caption: "A desktop computer ready for work."} {Rationale: "The computer appears functional but is severely infected with malware that could compromise sensitive information."} {Situation: "The user faced unauthorized access to their private accounts after using the computer for online transactions."}

Now your task:
Based on the provided Caption and Rationale, generate the corresponding Situation following the structure and format above:

{Caption: "{INPUT CAPTION HERE}"}{Rationale: "{INPUT RATIONALE HERE}"}
)PROMPT";

// prompts/refine_explanation.txt
inline constexpr std::string_view kRefineExplanationPrompt = R"PROMPT(Can you improve this explanation so that it becomes more specific to the context and makes the outcome more likely to happen?

Context: {INPUT CONTEXT HERE}
Outcome: {INPUT OUTCOME HERE}
Explanation for the outcome: {INPUT EXPLANATION HERE}
)PROMPT";

// prompts/judge_system.txt
inline constexpr std::string_view kJudgeSystemPrompt = R"PROMPT(You are a helpful assistant, that ranks models by the quality of their answers.
)PROMPT";

// prompts/judge_pairwise.txt
inline constexpr std::string_view kJudgePairwisePrompt = R"PROMPT(I want you to create a leaderboard of different large-language models. To do so, I will give you the instructions (prompts) given to the models, and the responses of two models. Please rank the models based on which responses would be preferred by humans. All inputs and outputs should be Python dictionaries.

Here is the prompt:
{
    "instruction": """{instruction}"""
}

Here are the outputs of the models:
[
    {
        "model": "model_1",
        "answer": """{output_1}"""
    },
    {
        "model": "model_2",
        "answer": """{output_2}"""
    }
]

Now please rank the models by the quality of their answers, so that the model with rank 1 has the best output. Then return a list of the model names and ranks, i.e., produce the following output:
[
    {"model": "model_1", "rank": 1},
    {"model": "model_2", "rank": 2}
]

Your response must be a valid Python dictionary and should contain nothing else because we will directly execute it in Python. Please provide the ranking that the majority of humans would give.
)PROMPT";

// prompts/specificity.txt
inline constexpr std::string_view kSpecificityPrompt = R"PROMPT(You are tasked with evaluating the specificity of a given text on a scale of 1 to 5.
1 (Very Low Specificity): Extremely vague and general.
2 (Low Specificity): Limited details, mostly general.
3 (Moderate Specificity): Includes some details but still general in parts.
4 (High Specificity): Contains clear and detailed information.
5 (Very High Specificity): Extremely detailed and precise, leaving no room for ambiguity.

Only output the score as a single number.

Input Text:
[Insert the generated text here]

Output Format:
[Score (1-5)]
)PROMPT";

// prompts/flask_rubric.txt
inline constexpr std::string_view kFlaskRubricPrompt = R"PROMPT(We would like to request your feedback on the performance of an AI assistant that explains why an outcome happened given a visual context.

Context: {context}
Outcome: {outcome}
Explanation: {explanation}

Score the explanation on each of the following skills with an integer from 1 to 5.

Logical Robustness (LR): Is the reasoning free of contradictions and does it hold up when the scenario's details are taken into account, including unusual ones?
1: The reasoning is incoherent or contradicts the context.
3: The reasoning mostly holds but ignores some relevant details or edge cases.
5: The reasoning is consistent and accounts for every relevant detail of the context and outcome.

Logical Correctness (LC): Is the final explanation actually a valid account of how the context leads to the outcome?
1: The explanation does not lead to the outcome.
3: The explanation partially accounts for the outcome but has gaps.
5: The explanation fully and correctly accounts for the outcome.

Logical Efficiency (LE): Is the reasoning concise and free of redundant or irrelevant steps?
1: The reasoning is dominated by irrelevant or repeated steps.
3: The reasoning contains some unnecessary steps.
5: Every step is necessary and the explanation is as direct as possible.

Commonsense Understanding (CS): Does the explanation use accurate world knowledge, including knowledge of why an unusual situation can still occur?
1: The explanation relies on false or implausible world knowledge.
3: The world knowledge is plausible but shallow.
5: The explanation shows accurate, specific world knowledge.

Respond with a JSON object and nothing else, in the form:
{"LR": <1-5>, "LC": <1-5>, "LE": <1-5>, "CS": <1-5>}
)PROMPT";

// prompts/icl_template.json
inline constexpr std::string_view kIclTemplateJson = R"PROMPT({
  "instruction": "Each example shows an image, a context describing it, an outcome, and an explanation of how the context could lead to the outcome. Read the examples, then write an explanation for the final outcome.",
  "exemplar": "Context: {context}\nOutcome: {outcome}\nExplanation: {explanation}",
  "query": "Context: {context}\nOutcome: {outcome}\nExplanation:",
  "judge_instruction": "Given the context \"{context}\", explain why the following outcome happened: \"{outcome}\""
}
)PROMPT";

}  // namespace ricl::prompts
