#pragma once

namespace narvis::player {

extern const char* const kStyle;
extern const char* const kScript;

}  // namespace narvis::player
