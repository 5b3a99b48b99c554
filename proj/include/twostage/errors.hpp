#pragma once

#include <stdexcept>
#include <string>

namespace twostage {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

#define TWOSTAGE_ERROR(Name)                   \
	class Name : public Error {                \
	public:                                    \
		using Error::Error;                    \
	}

TWOSTAGE_ERROR(ParseError);
TWOSTAGE_ERROR(EmptyInputError);
TWOSTAGE_ERROR(DegenerateSeriesError);
TWOSTAGE_ERROR(LengthError);
TWOSTAGE_ERROR(InsufficientDataError);
TWOSTAGE_ERROR(ParameterError);
TWOSTAGE_ERROR(ShapeError);
TWOSTAGE_ERROR(CacheError);
TWOSTAGE_ERROR(NoPeriodError);
TWOSTAGE_ERROR(UndefinedMetricError);
TWOSTAGE_ERROR(Stage1DisabledError);
TWOSTAGE_ERROR(LoadError);
TWOSTAGE_ERROR(ConfigError);

#undef TWOSTAGE_ERROR

// Throws ShapeError with `what` when the two sizes differ.
void require_same_size(std::size_t a, std::size_t b, const char* what);

} // namespace twostage
