#ifndef NORMFLOW_SRC_PRESETS_HPP
#define NORMFLOW_SRC_PRESETS_HPP

#include <cstddef>

namespace normflow::cli::detail
{

// Generated at configure time from presets/*.json, sorted by name.
struct preset_source {
    const char *name;
    const char *json;
};

extern const preset_source preset_table[];
extern const std::size_t preset_count;

} // namespace normflow::cli::detail

#endif
