#include "msvar/dataset.hpp"

// StackedDataset is a plain aggregate; assembly lives in csv.cpp and
// simulation in montecarlo.cpp.
