#include "figmine/prompt_kit.hpp"

#include "figmine/errors.hpp"

namespace figmine::prompts {

namespace {

constexpr const char* kPromptVersion = "v1";

// Short page-labeling prompt.
constexpr const char* kClassificationPrompt =
    R"(Analyze the provided literature paper page to determine if it includes:

- (1) Nitrogen Isotherm
- (2) PXRD Pattern
- (3) TGA Curve
- (4) Crystal Structure
- (5) Other Isotherm
- (6) None of Above
)";

// Full six-question prompt with both answer templates.
constexpr const char* kExtractionPrompt =
    R"(Please analyze the provided image, which is a page from a literature paper discussing metal-organic frameworks, and answer the following questions:

1. Does the image contain one of the following figures:

- (1) Nitrogen adsorption-desorption isotherm
- (2) PXRD pattern
- (3) TGA curve
- (4) Crystal structure or topology illustration
- (5) Other gas sorption isotherm (e.g. water vapor, CO₂, H₂, CH₄, etc.)
- (6) It does not have figures or has figures that do not belong to the above class

2. If the figure contains a nitrogen adsorption-desorption isotherm, in which figure (e.g. Figure 1, 2, 3, Figure S18) or panel (e.g., a, b, c, d, if applicable) is it displayed? Note that we are interested only in the nitrogen adsorption-desorption isotherms that show the direct relationship between pressure and nitrogen uptake, explicitly excluding BET analysis, linear fitting, pore size distribution graphs, and any other analyses that do not present this direct relationship and do not label these cases as (1).

3. If a nitrogen isotherm is present, can you identify the name of the compound being measured? If there are multiple compounds in the same nitrogen isotherm, please separate your answer by a comma. Please note that for figure labeling, if there are adsorption (ads) and desorption (des) plots for the same compound, the author tends to label them as ads xxx or xxx adsorption or des xxx or xxx desorption, you should treat them as one compound and list the name xxx only once, usually a compound name does not include ads or des.

4. Does the page provide information on porosity information such as surface area or nitrogen uptake for the compound? If not provided on this page, please indicate with "N/A."

5. For each nitrogen isotherm, identify the saturation amount of nitrogen gas in the plateau region of the adsorption branch. The plateau region refers to the area where the curve levels off before any significant further increase in gas uptake, even as the relative pressure (P/P0) continues to rise. The saturation level should be determined from the range within this plateau, ignoring extreme points or outliers (e.g. those at the top right corner where P/P0 > 0.9). Report the value in a range of the y values given in the plot next to the y-axis which can be read (e.g., 300 - 400 cm³/g). If you are unsure about your answer, please indicate with "I do not know."

6. Localize the region in this page containing nitrogen isotherm plot and its Figure caption and description of nitrogen isotherm plot. Regions are represented by (x1,y1,x2,y2) coordinates. x1 and x2 are the leftmost and rightmost positions, normalized into 0 to 1, where 0 is the left and 1 is the right. y1 and y2 are the topmost and bottommost positions, normalized into 0 to 1, where 0 is the top and 1 is the bottom. For example, if Figures 5(a) and 5(b) are both nitrogen isotherm and figure 5(c) is something else, you tell me the box that cover top left corner coordinate and bottom right coordinate of entire figure 5 including caption in the format like (0,0,1,0.5). Please try to make your selection to include all elements, especially that in that figure and its caption and it is okay if you use larger box selection which results in the inclusion of some parts like text or blank space or journal logo or something else that is outside figure 5. On the other hand, if Figure 5 and Figure 7(c) are nitrogen isotherms, while Figure 6 and Figures 7(a) and 7(b) are something else, you will give two regions, one specify the entire Figure 5, and the other one cover all elements in Figure 7.

Please strictly adhere to the templates provided.

Template for your answer if no nitrogen adsorption-desorption isotherm is found:

Figures: [Answer: (2) ... (6) or two or more combinations of them like (2);(3)]

Nitrogen Isotherm: No

Template for your answer if a nitrogen isotherm is presented:

Figures: [Answer: (1), (2) ... (5) or two or more combinations of them like (1);(4);(5)]

Nitrogen Isotherm: [Answer: specify figure and/or panel]

Compound: [Answer: Compound name or "N/A"]

Porosity: [Answer: Specific value/details or "N/A"]

Hysteresis: [Answer: Yes or No or "I do not know"]

Saturation: [Answer: Specific range or "I do not know"]

Position: [Answer: Specify region(s) (x1, y1, x2, y2)]
)";

}  // namespace

PromptText build_classification_prompt() {
  return {PromptKind::classification, kClassificationPrompt, kPromptVersion};
}

PromptText build_extraction_prompt() {
  return {PromptKind::extraction, kExtractionPrompt, kPromptVersion};
}

ResponseSchema schema_for(PromptKind kind) {
  ResponseSchema schema;
  if (kind == PromptKind::classification) {
    schema.required_keys_no_isotherm = {"Figures"};
    schema.required_keys_with_isotherm = {"Figures"};
    return schema;
  }
  schema.required_keys_no_isotherm = {"Figures", "Nitrogen Isotherm"};
  schema.required_keys_with_isotherm = {"Figures",   "Nitrogen Isotherm", "Compound", "Porosity",
                                        "Hysteresis", "Saturation",        "Position"};
  return schema;
}

const char* to_string(PromptKind kind) {
  return kind == PromptKind::classification ? "classification" : "extraction";
}

PromptKind prompt_kind_from_string(const std::string& name) {
  if (name == "classification") return PromptKind::classification;
  if (name == "extraction") return PromptKind::extraction;
  throw UsageError("prompt: unknown kind '" + name + "' (expected classification|extraction)");
}

}  // namespace figmine::prompts
