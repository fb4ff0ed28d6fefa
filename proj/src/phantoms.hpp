#pragma once

#include <string>
#include <vector>

#include "image.hpp"

namespace cred {

// Deterministic synthetic ground-truth images in [0,255]. Known names:
// "edges", "blobs", "bars", "checker", "texture".
Image make_phantom(const std::string& name, int size);

std::vector<std::string> phantom_names();

}  // namespace cred
