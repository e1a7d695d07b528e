// One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

#include "acceptance.hpp"

#include <iostream>

int main()
{
    auto results = acceptance::run_all(std::cout);
    std::size_t passed = 0;
    for (const auto& r : results)
        passed += r.passed();
    std::cout << passed << "/" << results.size() << " criteria passed" << std::endl;
    return passed == results.size() ? 0 : 1;
}
