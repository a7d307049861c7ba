#pragma once

#include <map>
#include <string>

#include "qcpulse/control.hpp"

namespace qcp {

// Controls CSV: header "step,t_start,u_1,...,u_N", one row per step, values
// printed with 17 significant digits so write-then-read is bit exact.
void write_controls_csv(const std::string& path, const ControlSequence& u);
ControlSequence read_controls_csv(const std::string& path);

// Sectioned key=value text ("[section]" headers, '#' comments).  Duplicate
// keys within a section are rejected; validation of key names happens at the
// consumer, which knows the schema.
using ConfigMap = std::map<std::string, std::map<std::string, std::string>>;
ConfigMap parse_config_file(const std::string& path);

// Refuses to overwrite an existing file unless force is set.
void ensure_writable(const std::string& path, bool force);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace qcp
