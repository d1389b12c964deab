#pragma once

// The core is compiled twice: once with 32-bit floats (the shipped library)
// and once with doubles for finite-difference gradient checks. The inline
// namespace keeps both builds linkable into one test binary.

#if defined(BNAS_WIDE_REAL)
#define BNAS_NS_BEGIN namespace bnas { inline namespace wide {
#else
#define BNAS_NS_BEGIN namespace bnas { inline namespace narrow {
#endif
#define BNAS_NS_END } }

BNAS_NS_BEGIN

#if defined(BNAS_WIDE_REAL)
using real = double;
#else
using real = float;
#endif

BNAS_NS_END
