#pragma once

#include <string>

namespace layoutcot::detail {

// Contents of templates/<relative_path>, or nullptr. Generated at build time.
const char* embedded_template(const std::string& relative_path);

}  // namespace layoutcot::detail
