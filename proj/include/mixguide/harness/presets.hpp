#pragma once

#include <string>
#include <vector>

// Named experiment presets: complete JSON config documents for one-command
// reproduction of the library's reference figures. A preset can be used as a
// base and partially overridden by --config / flags.
namespace mixguide::harness {

std::vector<std::string> preset_names();
bool has_preset(const std::string& name);

// JSON text of the preset; throws ConfigError for unknown names.
std::string preset_config_text(const std::string& name);

// The command the preset was designed for (informational; any data command
// accepts any config).
std::string preset_default_command(const std::string& name);

}  // namespace mixguide::harness
