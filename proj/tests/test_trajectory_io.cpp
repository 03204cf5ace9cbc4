#include <catch2/catch_amalgamated.hpp>
#include "stowave/stowave.hpp"
