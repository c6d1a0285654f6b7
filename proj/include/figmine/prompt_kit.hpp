#pragma once

#include <string>
#include <vector>

namespace figmine::prompts {

enum class PromptKind { classification, extraction };

struct PromptText {
  PromptKind kind;
  std::string body;
  std::string version;  // metadata only, never part of the body
};

// Six-choice page-analysis prompt (short form).
PromptText build_classification_prompt();

// Full six-question prompt including both answer templates.
PromptText build_extraction_prompt();

// Keys a conforming response carries, in template order.
struct ResponseSchema {
  std::vector<std::string> required_keys_no_isotherm;
  std::vector<std::string> required_keys_with_isotherm;
  std::string na_token = "N/A";
  std::string unsure_token = "I do not know";
};

ResponseSchema schema_for(PromptKind kind);

const char* to_string(PromptKind kind);
PromptKind prompt_kind_from_string(const std::string& name);

}  // namespace figmine::prompts
