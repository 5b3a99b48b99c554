#include "twostage/errors.hpp"

namespace twostage {

void require_same_size(std::size_t a, std::size_t b, const char* what) {
	if (a != b) {
		throw ShapeError(std::string(what) + ": size " + std::to_string(a) + " does not match " +
		                 std::to_string(b));
	}
}

} // namespace twostage
