// SPDX-License-Identifier: Apache-2.0
#include "tensordec/cp.hpp"

int main() { return 0; }
