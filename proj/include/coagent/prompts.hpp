#pragma once

#include <string>

namespace coagent::prompts {

// Agent instructions used on the live wire. The same texts are shipped as
// plain files under prompts/ for auditability; a test keeps both in sync.

const std::string& planner_system();
const std::string& planner_schema();
const std::string& planner_refine();
const std::string& verifier_stage1_template();
const std::string& verifier_stage2_template();
const std::string& portrait_template();

// Fills the [Script Description] slot of the stage-1 reviewer instruction.
std::string render_stage1(const std::string& script_description);

// Stage-2 instruction is parameter-free; images ride as attachments.
std::string render_stage2();

// Fills [Character Description] / [Style Description or 'Default'].
std::string render_portrait(const std::string& character_description,
                            const std::string& style);

}  // namespace coagent::prompts
